#ifndef RQPD_COUPLING_HPP
#define RQPD_COUPLING_HPP

#include <optional>
#include <string>

#include "rqpd/matrix.hpp"
#include "rqpd/sdp.hpp"

namespace rqpd {

// max tr(objective * sigma) over couplings sigma of (rho1, rho2), optionally
// restricted to supp(sigma) inside a projector X and/or to PPT states.
struct CouplingProblem {
  Mat rho1, rho2;              // PSD, equal traces
  Mat objective;               // Hermitian on the product space
  std::optional<Mat> support;  // projector
  bool ppt = false;
};

enum class CouplingStatus { Optimal, Feasible, Infeasible, NumericalFailure };

struct CouplingSolution {
  CouplingStatus status = CouplingStatus::NumericalFailure;
  Mat witness;               // on the full product space
  double value = 0.0;        // tr(objective * witness) at the solver optimum
  double marginal_residual = 0.0;  // max-norm defect of both partial traces
  double psd_residual = 0.0;       // |min eigenvalue| below zero
  int iterations = 0;
  std::string note;
};

// Coupling constructions from the standard examples.
Mat tensor_coupling(const Mat& rho1, const Mat& rho2);
// sum_i p_i |ii><ii| in the eigenbasis of rho.
Mat basis_identity_coupling(const Mat& rho);
// (1/d) sum_i (|i> U|i>)(<i| <i|U^dag); requires U unitary.
Mat unitary_unif_coupling(int d, const Mat& u);

CouplingSolution max_coupling_value(const CouplingProblem& p);

// Lifting rho1 X^# rho2: feasible iff the best coupling puts all its weight
// inside X, i.e. max tr(X sigma) reaches tr(rho1).
CouplingSolution lifting_exists(const Mat& rho1, const Mat& rho2, const Mat& x_projector,
                                double tol = 1e-6);

// Peres-Horodecki: exact separability test on a 2 (x) 2 state.
bool is_separable_2x2(const Mat& rho, double tol = kDefaultTol);

}  // namespace rqpd

#endif
