#ifndef RQPD_TEST_ORACLES_HPP
#define RQPD_TEST_ORACLES_HPP

// Test-only reference implementations, kept independent of the production
// solver paths they validate.

#include <random>
#include <vector>

#include "rqpd/eigen.hpp"
#include "rqpd/matrix.hpp"
#include "rqpd/operator_core.hpp"

namespace rqpd::test {

// Orthonormalized Hermitian constraint set for the coupling marginals, with
// transformed right-hand sides; used for exact affine projection.
struct AffineMarginals {
  std::vector<Mat> ops;  // orthonormal in the trace inner product
  std::vector<double> rhs;

  AffineMarginals(const Mat& rho1, const Mat& rho2) {
    const int d1 = rho1.rows(), d2 = rho2.rows();
    std::vector<Mat> raw;
    std::vector<double> val;
    auto push = [&](Mat g, double v) {
      raw.push_back(std::move(g));
      val.push_back(v);
    };
    for (int i = 0; i < d1; ++i)
      for (int j = i; j < d1; ++j) {
        Mat e(d1, d1);
        if (i == j) {
          e(i, i) = 1;
          push(tensor(e, Mat::identity(d2)), (e * rho1).trace().real());
        } else {
          e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
          push(tensor(e, Mat::identity(d2)), (e * rho1).trace().real());
          Mat f(d1, d1);
          f(i, j) = cplx(0, 1.0 / std::sqrt(2.0));
          f(j, i) = cplx(0, -1.0 / std::sqrt(2.0));
          push(tensor(f, Mat::identity(d2)), (f * rho1).trace().real());
        }
      }
    for (int i = 0; i < d2; ++i)
      for (int j = i; j < d2; ++j) {
        Mat e(d2, d2);
        if (i == j) {
          e(i, i) = 1;
          push(tensor(Mat::identity(d1), e), (e * rho2).trace().real());
        } else {
          e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
          push(tensor(Mat::identity(d1), e), (e * rho2).trace().real());
          Mat f(d2, d2);
          f(i, j) = cplx(0, 1.0 / std::sqrt(2.0));
          f(j, i) = cplx(0, -1.0 / std::sqrt(2.0));
          push(tensor(Mat::identity(d1), f), (f * rho2).trace().real());
        }
      }
    // Gram-Schmidt in the Hermitian trace inner product
    for (std::size_t k = 0; k < raw.size(); ++k) {
      Mat g = raw[k];
      double v = val[k];
      for (std::size_t l = 0; l < ops.size(); ++l) {
        double ov = ops[l].inner(g).real();
        g -= ops[l] * cplx(ov, 0.0);
        v -= ov * rhs[l];
      }
      double nrm = g.frob_norm();
      if (nrm < 1e-10) continue;
      ops.push_back(g * cplx(1.0 / nrm, 0.0));
      rhs.push_back(v / nrm);
    }
  }

  Mat project(const Mat& s) const {
    Mat out = s;
    for (std::size_t l = 0; l < ops.size(); ++l) {
      double defect = rhs[l] - ops[l].inner(out).real();
      out += ops[l] * cplx(defect, 0.0);
    }
    return out;
  }
};

// Burer-Monteiro style oracle: parameterize sigma = G G^dag at full rank,
// enforce the marginal constraints with an augmented Lagrangian, ascend by
// gradient with backtracking, multi-start, then polish onto the affine set.
// Returns the best objective value found at a feasibility-polished point.
inline double bm_max_coupling(const Mat& rho1, const Mat& rho2, const Mat& obj, int starts,
                              std::uint64_t seed) {
  const int d1 = rho1.rows(), d2 = rho2.rows();
  const int n = d1 * d2;
  AffineMarginals aff(rho1, rho2);
  const int m = int(aff.ops.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = -1e300;

  for (int s = 0; s < starts; ++s) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = cplx(gauss(rng), gauss(rng)) * 0.3;
    std::vector<double> y(m, 0.0);
    double kappa = 10.0;
    for (int outer = 0; outer < 30; ++outer) {
      for (int inner = 0; inner < 120; ++inner) {
        Mat sig = g * g.dagger();
        std::vector<double> c(m);
        for (int i = 0; i < m; ++i) c[i] = aff.ops[i].inner(sig).real() - aff.rhs[i];
        Mat eff = obj;
        for (int i = 0; i < m; ++i) eff -= aff.ops[i] * cplx(y[i] + kappa * c[i], 0.0);
        Mat grad = eff * g;  // d/dG* of tr(eff G G^dag)
        double gn = grad.frob_norm();
        if (gn < 1e-12) break;
        double step = 0.5 / (kappa + 1.0);
        auto lag = [&](const Mat& gg) {
          Mat sg = gg * gg.dagger();
          double v = obj.inner(sg).real();
          for (int i = 0; i < m; ++i) {
            double ci = aff.ops[i].inner(sg).real() - aff.rhs[i];
            v -= y[i] * ci + 0.5 * kappa * ci * ci;
          }
          return v;
        };
        double f0 = lag(g);
        Mat gnew = g + grad * cplx(step, 0.0);
        int bt = 0;
        while (lag(gnew) < f0 && bt++ < 20) {
          step *= 0.5;
          gnew = g + grad * cplx(step, 0.0);
        }
        if (bt >= 20) break;
        g = gnew;
      }
      Mat sig = g * g.dagger();
      double cn = 0.0;
      for (int i = 0; i < m; ++i) {
        double ci = aff.ops[i].inner(sig).real() - aff.rhs[i];
        y[i] += kappa * ci;
        cn = std::max(cn, std::abs(ci));
      }
      if (cn < 1e-10) break;
      if (outer % 3 == 2) kappa *= 2.0;
    }
    // polish with alternating projections onto the affine set and the cone
    Mat sig = (g * g.dagger()).hermitize();
    Mat clipped = sig;
    for (int round = 0; round < 400; ++round) {
      sig = aff.project(clipped);
      auto eg = eig_hermitian(sig.hermitize());
      clipped = Mat::zero(n, n);
      bool neg = false;
      for (int k = 0; k < n; ++k) {
        double w = eg.values[k];
        if (w < 0.0) {
          neg = neg || (w < -1e-9);
          continue;
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            clipped(i, j) += w * eg.vectors(i, k) * std::conj(eg.vectors(j, k));
      }
      if (!neg && (aff.project(clipped) - clipped).max_norm() < 1e-9) break;
    }
    // only count the start if it is genuinely feasible
    double resid = (aff.project(clipped) - clipped).max_norm();
    if (resid < 1e-6) best = std::max(best, obj.inner(clipped).real());
  }
  return best;
}

}  // namespace rqpd::test

#endif
