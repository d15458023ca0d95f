#ifndef RQPD_OPERATOR_CORE_HPP
#define RQPD_OPERATOR_CORE_HPP

#include <vector>

#include "rqpd/eigen.hpp"
#include "rqpd/matrix.hpp"

namespace rqpd {

// Kronecker product; dims multiply.
Mat tensor(const Mat& a, const Mat& b);
Mat tensor(const std::vector<Mat>& ms);

// Trace out the factors NOT listed in `keep`. `keep` is a strictly
// increasing list of factor indices into `shape`; the result lives on the
// kept factors in their original order.
Mat partial_trace(const Mat& m, const SpaceShape& shape, const std::vector<int>& keep);

// Transpose the listed factors in place (partial transpose).
Mat partial_transpose(const Mat& m, const SpaceShape& shape, const std::vector<int>& which);

// Lift `op` (acting on the factors listed in `positions`, in that order) to
// the full space described by `shape`. Positions may be in any order; the
// op's tensor factor order follows the list.
Mat embed_on(const Mat& op, const SpaceShape& shape, const std::vector<int>& positions);

// Permute tensor factors of an operator: entry ordering changes from
// `shape` order to the order given by perm (perm[k] = source factor index).
Mat permute_factors(const Mat& m, const SpaceShape& shape, const std::vector<int>& perm);

// A <= B in the Loewner order, to tolerance.
bool loewner_leq(const Mat& a, const Mat& b, double tol = kDefaultTol);
// min eigenvalue of (b - a).
double loewner_margin(const Mat& a, const Mat& b);

// Projector onto the span of eigenvectors of a PSD operator with eigenvalue
// above rank_tol relative to the largest one.
Mat support_projector(const Mat& a, double rank_tol = 1e-8);

// SWAP operator S|i,j> = |j,i> on d (x) d, and the symmetric-subspace
// projector (I + S)/2.
Mat swap_operator(int d);
Mat sym_projector(int d);

// Row-major operator/vector correspondence: vec(|b><a|) = |b>|a>.
Mat vec(const Mat& m);
Mat unvec(const Mat& v, int rows, int cols);

// The matrix S with S vec(rho) = vec(sum_i E_i rho E_i^dag): sum_i E_i (x) conj(E_i).
Mat superop_matrix(const std::vector<Mat>& kraus);
// Choi matrix J = sum_ij |i><j| (x) E(|i><j|), from the vectorized form.
Mat choi_from_superop(const Mat& shat, int dout, int din);
// Canonical Kraus set from a CP map's Choi matrix (eigen-decomposition,
// dropping components below tol).
std::vector<Mat> kraus_from_choi(const Mat& choi, int dout, int din, double tol = 1e-12);

// Apply a Kraus map: sum_i E_i rho E_i^dag.
Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& rho);
// Dual map on observables: sum_i E_i^dag A E_i.
Mat apply_kraus_dual(const std::vector<Mat>& kraus, const Mat& a);

}  // namespace rqpd

#endif
