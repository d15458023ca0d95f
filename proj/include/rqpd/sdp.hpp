#ifndef RQPD_SDP_HPP
#define RQPD_SDP_HPP

#include <vector>

#include "rqpd/matrix.hpp"

namespace rqpd {

// Dense primal-dual interior-point solver for small complex SDPs:
//
//   minimize    sum_k tr(C_k X_k)
//   subject to  sum_k tr(A_{i,k} X_k) = b_i,   X_k >= 0 (Hermitian blocks)
//
// HKM direction with Mehrotra predictor-corrector. Sized for the desk-scale
// problems here (block dims <= ~100, constraints <= ~300); everything dense.
struct SdpConstraint {
  // sparse across blocks: parallel arrays of (block index, Hermitian matrix)
  std::vector<int> block;
  std::vector<Mat> op;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<Mat> objective;  // per block; minimized
  std::vector<SdpConstraint> constraints;
};

struct SdpOptions {
  int max_iters = 200;
  double tol_gap = 2e-9;    // relative duality gap
  double tol_feas = 1e-9;   // relative primal/dual infeasibility
};

enum class SdpStatus { Optimal, Feasible, IterLimit, NumericalFailure };

struct SdpResult {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<Mat> X;
  std::vector<double> y;
  double primal_obj = 0.0;
  double gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  int iters = 0;
};

SdpResult solve_sdp(const SdpProblem& p, const SdpOptions& opt = {});

}  // namespace rqpd

#endif
