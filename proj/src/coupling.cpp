#include "rqpd/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqpd/eigen.hpp"
#include "rqpd/operator_core.hpp"

namespace rqpd {

namespace {

// Hermitian operator basis of dimension d^2: diagonal units, then
// (|i><j|+|j><i|)/sqrt2 and i(|i><j|-|j><i|)/sqrt2.
std::vector<Mat> herm_basis(int d, bool drop_last_diag) {
  std::vector<Mat> out;
  for (int i = 0; i < d; ++i) {
    if (drop_last_diag && i == d - 1) continue;
    out.push_back(Mat::ketbra(d, i, i));
  }
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Mat re(d, d), im(d, d);
      re(i, j) = s;
      re(j, i) = s;
      im(i, j) = cplx(0.0, s);
      im(j, i) = cplx(0.0, -s);
      out.push_back(std::move(re));
      out.push_back(std::move(im));
    }
  return out;
}

// columns spanning the support of a PSD matrix
Mat support_isometry(const Mat& rho, double tol = 1e-11) {
  auto eg = eig_hermitian(rho.hermitize());
  double lmax = std::max(eg.values.empty() ? 0.0 : eg.values.back(), 0.0);
  std::vector<int> keep;
  for (int k = 0; k < rho.rows(); ++k)
    if (eg.values[k] > tol * std::max(lmax, 1e-300)) keep.push_back(k);
  Mat v(rho.rows(), int(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (int i = 0; i < rho.rows(); ++i) v(i, int(c)) = eg.vectors(i, keep[c]);
  return v;
}

}  // namespace

Mat tensor_coupling(const Mat& rho1, const Mat& rho2) {
  double t1 = rho1.trace().real();
  if (t1 <= 0.0) return Mat::zero(rho1.rows() * rho2.rows(), rho1.rows() * rho2.rows());
  return tensor(rho1, rho2) * cplx(1.0 / t1, 0.0);
}

Mat basis_identity_coupling(const Mat& rho) {
  auto eg = eig_hermitian(rho.hermitize());
  const int d = rho.rows();
  Mat out(d * d, d * d);
  for (int k = 0; k < d; ++k) {
    if (eg.values[k] <= 0.0) continue;
    Mat v(d, 1);
    for (int i = 0; i < d; ++i) v(i, 0) = eg.vectors(i, k);
    Mat vv = tensor(v, v);
    out += (vv * vv.dagger()) * cplx(eg.values[k], 0.0);
  }
  return out;
}

Mat unitary_unif_coupling(int d, const Mat& u) {
  if (u.rows() != d || u.cols() != d) throw std::invalid_argument("unitary_unif: bad dims");
  if ((u.dagger() * u - Mat::identity(d)).max_norm() > 1e-9)
    throw std::invalid_argument("unitary_unif: U is not unitary");
  Mat out(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    Mat ei = Mat::basis_ket(d, i);
    Mat v = tensor(ei, u * ei);
    out += (v * v.dagger()) * cplx(1.0 / d, 0.0);
  }
  return out;
}

namespace {

struct Compressed {
  Mat v1, v2;   // isometries d_i x r_i
  Mat r1, r2;   // compressed marginals
  Mat w;        // v1 (x) v2
};

Compressed compress_supports(const Mat& rho1, const Mat& rho2) {
  Compressed c;
  c.v1 = support_isometry(rho1);
  c.v2 = support_isometry(rho2);
  c.r1 = (c.v1.dagger() * rho1 * c.v1).hermitize();
  c.r2 = (c.v2.dagger() * rho2 * c.v2).hermitize();
  c.w = tensor(c.v1, c.v2);
  return c;
}

// marginal constraints on a coupling block of shape (r1 x r2)
void add_marginal_constraints(SdpProblem& prob, int block, const Mat& r1, const Mat& r2) {
  const int d1 = r1.rows(), d2 = r2.rows();
  for (const Mat& g : herm_basis(d1, false)) {
    SdpConstraint c;
    c.block = {block};
    c.op = {tensor(g, Mat::identity(d2))};
    c.rhs = (g * r1).trace().real();
    prob.constraints.push_back(std::move(c));
  }
  // drop one diagonal unit on side 2: the total trace is already pinned
  for (const Mat& g : herm_basis(d2, true)) {
    SdpConstraint c;
    c.block = {block};
    c.op = {tensor(Mat::identity(d1), g)};
    c.rhs = (g * r2).trace().real();
    prob.constraints.push_back(std::move(c));
  }
}

CouplingSolution pack_solution(const Mat& witness_full, const CouplingProblem& p,
                               const SdpResult& sr) {
  CouplingSolution out;
  out.iterations = sr.iters;
  out.witness = witness_full;
  out.value = (p.objective * witness_full).trace().real();
  const int d1 = p.rho1.rows(), d2 = p.rho2.rows();
  SpaceShape sh({d1, d2});
  double m1 = (partial_trace(witness_full, sh, {0}) - p.rho1).max_norm();
  double m2 = (partial_trace(witness_full, sh, {1}) - p.rho2).max_norm();
  out.marginal_residual = std::max(m1, m2);
  auto w = eigenvalues_hermitian(witness_full.hermitize());
  out.psd_residual = std::max(0.0, -w.front());
  switch (sr.status) {
    case SdpStatus::Optimal:
      out.status = CouplingStatus::Optimal;
      break;
    case SdpStatus::Feasible:
      out.status = CouplingStatus::Feasible;
      break;
    default:
      out.status = CouplingStatus::NumericalFailure;
      out.note = "solver did not converge";
      break;
  }
  if (out.status != CouplingStatus::NumericalFailure && out.marginal_residual > 1e-6) {
    out.status = CouplingStatus::NumericalFailure;
    out.note = "marginal residual above contract";
  }
  return out;
}

}  // namespace

CouplingSolution max_coupling_value(const CouplingProblem& p) {
  const int d1 = p.rho1.rows(), d2 = p.rho2.rows();
  const int n = d1 * d2;
  if (p.objective.rows() != n)
    throw std::invalid_argument("max_coupling_value: objective dim != d1*d2");
  double t1 = p.rho1.trace().real(), t2 = p.rho2.trace().real();
  CouplingSolution out;
  if (std::abs(t1 - t2) > 1e-8) {
    out.status = CouplingStatus::Infeasible;
    out.note = "marginal traces differ";
    out.witness = Mat::zero(n, n);
    return out;
  }
  if (t1 <= 1e-14) {
    out.status = CouplingStatus::Optimal;
    out.witness = Mat::zero(n, n);
    out.value = 0.0;
    return out;
  }

  // A support-constrained solve goes through the lifting feasibility check
  // first; run the unconstrained problem with the support projector as
  // objective and compare against tr(rho1).
  if (p.support) {
    CouplingProblem feas = p;
    feas.support.reset();
    feas.objective = *p.support;
    feas.ppt = false;
    CouplingSolution fs = max_coupling_value(feas);
    if (fs.status == CouplingStatus::Optimal || fs.status == CouplingStatus::Feasible) {
      if (fs.value < t1 - 1e-6) {
        out.status = CouplingStatus::Infeasible;
        out.note = "no coupling supported inside X (best mass " +
                   std::to_string(fs.value) + " of " + std::to_string(t1) + ")";
        out.witness = Mat::zero(n, n);
        return out;
      }
    }
  }

  Compressed c = compress_supports(p.rho1, p.rho2);
  const int r1 = c.r1.rows(), r2 = c.r2.rows();
  const int rn = r1 * r2;
  Mat obj_c = (c.w.dagger() * p.objective * c.w).hermitize();

  SdpProblem prob;
  prob.block_dims = {rn};
  prob.objective = {obj_c * cplx(-1.0, 0.0)};  // solver minimizes
  add_marginal_constraints(prob, 0, c.r1, c.r2);

  if (p.support) {
    // supp(sigma) inside X: for PSD sigma this is the single affine condition
    // <I - X, sigma> = 0.
    Mat gap = (c.w.dagger() * (Mat::identity(n) - *p.support) * c.w).hermitize();
    SdpConstraint sc;
    sc.block = {0};
    sc.op = {gap};
    sc.rhs = 0.0;
    prob.constraints.push_back(std::move(sc));
  }
  if (p.ppt) {
    // second block carries the partial transpose: Y = sigma^{T2} >= 0, coupled
    // entrywise through a Hermitian constraint basis.
    prob.block_dims.push_back(rn);
    prob.objective.push_back(Mat::zero(rn, rn));
    SpaceShape shc({r1, r2});
    for (const Mat& e : herm_basis(rn, false)) {
      SdpConstraint cc;
      cc.block = {0, 1};
      cc.op = {partial_transpose(e, shc, {1}), e * cplx(-1.0, 0.0)};
      cc.rhs = 0.0;
      prob.constraints.push_back(std::move(cc));
    }
  }

  SdpResult sr = solve_sdp(prob);
  Mat witness_full = c.w * sr.X[0] * c.w.dagger();
  return pack_solution(witness_full.hermitize(), p, sr);
}

CouplingSolution lifting_exists(const Mat& rho1, const Mat& rho2, const Mat& x_projector,
                                double tol) {
  CouplingProblem p;
  p.rho1 = rho1;
  p.rho2 = rho2;
  p.objective = x_projector;
  CouplingSolution s = max_coupling_value(p);
  double t1 = rho1.trace().real();
  if (s.status == CouplingStatus::Optimal || s.status == CouplingStatus::Feasible) {
    if (s.value >= t1 - tol) {
      s.note = "lifting feasible";
    } else {
      s.status = CouplingStatus::Infeasible;
      s.note = "best coupling mass inside X: " + std::to_string(s.value) + " < " +
               std::to_string(t1);
    }
  }
  return s;
}

bool is_separable_2x2(const Mat& rho, double tol) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("is_separable_2x2: need a 2x2 (x) 2x2 state");
  Mat pt = partial_transpose(rho, SpaceShape({2, 2}), {1});
  auto w = eigenvalues_hermitian(pt.hermitize());
  return w.front() >= -tol;
}

}  // namespace rqpd
