#include "rqpd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "rqpd/eigen.hpp"

namespace rqpd {

namespace {

double real_inner(const Mat& a, const Mat& b) { return a.inner(b).real(); }

// Cholesky with escalating jitter; eigenvalue-clip repair as a last resort.
Mat chol_robust(const Mat& a) {
  const int n = a.rows();
  double base = 0.0;
  for (int i = 0; i < n; ++i) base += std::abs(a(i, i).real());
  double jit = 1e-14 * std::max(base / std::max(1, n), 1e-8);
  Mat l;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Mat aj = a;
    for (int i = 0; i < n; ++i) aj(i, i) += jit;
    if (try_cholesky(aj, l)) return l;
    jit *= 100.0;
  }
  auto eg = eig_hermitian(a.hermitize());
  Mat rep(n, n);
  for (int k = 0; k < n; ++k) {
    double w = std::max(eg.values[k], jit);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep(i, j) += w * eg.vectors(i, k) * std::conj(eg.vectors(j, k));
  }
  return cholesky(rep);
}

// Largest step alpha in [0, 1] keeping P + alpha dP positive definite
// (caller applies a safety factor).
double max_step(const Mat& p, const Mat& dp) {
  Mat l = chol_robust(p);
  Mat li = lu_solve(l, Mat::identity(l.rows()));
  Mat w = (li * dp * li.dagger()).hermitize();
  auto ev = eigenvalues_hermitian(w);
  double lmin = ev.front();
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}


}  // namespace

SdpResult solve_sdp(const SdpProblem& p, const SdpOptions& opt) {
  const int nb = int(p.block_dims.size());
  const int m = int(p.constraints.size());
  SdpResult res;
  res.y.assign(m, 0.0);

  double bnorm = 0.0, cnorm = 0.0;
  for (const auto& c : p.constraints) bnorm = std::max(bnorm, std::abs(c.rhs));
  for (const auto& c : p.objective) cnorm = std::max(cnorm, c.max_norm());

  std::vector<Mat> X, Z;
  for (int d : p.block_dims) {
    X.push_back(Mat::identity(d) * cplx(std::max(1.0, bnorm), 0.0));
    Z.push_back(Mat::identity(d) * cplx(std::max(1.0, cnorm), 0.0));
  }
  int total_dim = 0;
  for (int d : p.block_dims) total_dim += d;

  auto a_op = [&](const std::vector<Mat>& W) {
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const auto& c = p.constraints[i];
      for (std::size_t t = 0; t < c.block.size(); ++t)
        out[i] += real_inner(c.op[t], W[c.block[t]]);
    }
    return out;
  };
  auto at_op = [&](const std::vector<double>& v) {
    std::vector<Mat> out;
    for (int d : p.block_dims) out.push_back(Mat::zero(d, d));
    for (int i = 0; i < m; ++i) {
      const auto& c = p.constraints[i];
      for (std::size_t t = 0; t < c.block.size(); ++t)
        kern::active().zaxpy(c.op[t].size(), cplx(v[i], 0.0), c.op[t].data(),
                             out[c.block[t]].data());
    }
    return out;
  };

  for (int it = 0; it < opt.max_iters; ++it) {
    res.iters = it;
    double gap = 0.0;
    for (int k = 0; k < nb; ++k) gap += real_inner(X[k], Z[k]);
    auto ax = a_op(X);
    std::vector<double> rp(m);
    double rpn = 0.0;
    for (int i = 0; i < m; ++i) {
      rp[i] = p.constraints[i].rhs - ax[i];
      rpn = std::max(rpn, std::abs(rp[i]));
    }
    auto aty = at_op(res.y);
    std::vector<Mat> Rd;
    double rdn = 0.0;
    double pobj = 0.0;
    for (int k = 0; k < nb; ++k) {
      Mat r = p.objective[k] - Z[k] - aty[k];
      rdn = std::max(rdn, r.max_norm());
      Rd.push_back(std::move(r));
      pobj += real_inner(p.objective[k], X[k]);
    }
    res.gap = gap;
    res.primal_infeas = rpn / (1.0 + bnorm);
    res.dual_infeas = rdn / (1.0 + cnorm);
    res.primal_obj = pobj;
    res.X = X;
    if (res.gap <= opt.tol_gap * (1.0 + std::abs(pobj)) && res.primal_infeas <= opt.tol_feas &&
        res.dual_infeas <= opt.tol_feas) {
      res.status = SdpStatus::Optimal;
      return res;
    }

    double mu = gap / std::max(1, total_dim);
    std::vector<Mat> Zi;
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      try {
        Mat l = chol_robust(Z[k]);
        Mat li = lu_solve(l, Mat::identity(l.rows()));
        Zi.push_back(li.dagger() * li);
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok) break;

    // Schur complement M[i][j] = sum_k tr(A_i Zi A_j X)
    std::vector<std::vector<Mat>> ziax(m);
    for (int j = 0; j < m; ++j) {
      const auto& c = p.constraints[j];
      ziax[j].resize(c.block.size());
      for (std::size_t t = 0; t < c.block.size(); ++t) {
        int k = c.block[t];
        ziax[j][t] = Zi[k] * c.op[t] * X[k];
      }
    }
    Mat M(m, m);
    for (int i = 0; i < m; ++i) {
      const auto& ci = p.constraints[i];
      for (int j = 0; j < m; ++j) {
        const auto& cj = p.constraints[j];
        double s = 0.0;
        for (std::size_t ti = 0; ti < ci.block.size(); ++ti)
          for (std::size_t tj = 0; tj < cj.block.size(); ++tj)
            if (ci.block[ti] == cj.block[tj])
              s += ci.op[ti].inner(ziax[j][tj]).real();
        M(i, j) = s;
      }
    }
    M = M.hermitize();

    auto schur_solve = [&](const std::vector<double>& rhs) {
      Mat r(m, 1);
      for (int i = 0; i < m; ++i) r(i, 0) = rhs[i];
      double ridge = 0.0;
      for (int attempt = 0; attempt < 14; ++attempt) {
        Mat Mr = M;
        for (int i = 0; i < m; ++i) Mr(i, i) += ridge;
        Mat l;
        if (try_cholesky(Mr, l)) {
          Mat x = lu_solve(Mr, r);
          std::vector<double> out(m);
          for (int i = 0; i < m; ++i) out[i] = x(i, 0).real();
          return out;
        }
        ridge = std::max(ridge * 100.0, 1e-14 * std::max(1.0, M.max_norm()));
      }
      throw std::runtime_error("sdp: schur solve failed");
    };

    auto direction = [&](double mu_t, const std::vector<Mat>* dXc,
                         const std::vector<Mat>* dZc) {
      std::vector<Mat> W;
      for (int k = 0; k < nb; ++k) {
        Mat t = Zi[k] * cplx(mu_t, 0.0) - X[k] - Zi[k] * Rd[k] * X[k];
        if (dXc) t -= Zi[k] * ((*dZc)[k] * (*dXc)[k]);
        W.push_back(std::move(t));
      }
      auto aw = a_op(W);
      std::vector<double> rhs(m);
      for (int i = 0; i < m; ++i) rhs[i] = rp[i] - aw[i];
      auto dy = schur_solve(rhs);
      auto atdy = at_op(dy);
      std::vector<Mat> dZ, dX;
      for (int k = 0; k < nb; ++k) {
        dZ.push_back(Rd[k] - atdy[k]);
        Mat dx = W[k] + Zi[k] * atdy[k] * X[k];
        dX.push_back(dx.hermitize());
      }
      return std::tuple{dX, dZ, dy};
    };

    try {
      auto [dX, dZ, dy] = direction(0.0, nullptr, nullptr);
      double ap = 1.0, ad = 1.0;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dX[k]));
        ad = std::min(ad, max_step(Z[k], dZ[k]));
      }
      ap = std::min(1.0, 0.99 * ap);
      ad = std::min(1.0, 0.99 * ad);
      double gap_aff = 0.0;
      for (int k = 0; k < nb; ++k) {
        Mat xa = X[k] + dX[k] * cplx(ap, 0.0);
        Mat za = Z[k] + dZ[k] * cplx(ad, 0.0);
        gap_aff += real_inner(xa, za);
      }
      double sigma = std::pow(std::clamp(gap_aff / std::max(gap, 1e-300), 0.0, 1.0), 3.0);
      auto [dX2, dZ2, dy2] = direction(sigma * mu, &dX, &dZ);
      ap = 1.0;
      ad = 1.0;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dX2[k]));
        ad = std::min(ad, max_step(Z[k], dZ2[k]));
      }
      ap = std::min(1.0, 0.98 * ap);
      ad = std::min(1.0, 0.98 * ad);
      for (int k = 0; k < nb; ++k) {
        X[k] += dX2[k] * cplx(ap, 0.0);
        Z[k] += dZ2[k] * cplx(ad, 0.0);
      }
      for (int i = 0; i < m; ++i) res.y[i] += ad * dy2[i];
    } catch (const std::exception&) {
      break;
    }
  }

  res.X = X;
  if (res.gap <= 1e-6 * (1.0 + std::abs(res.primal_obj)) && res.primal_infeas <= 1e-7 &&
      res.dual_infeas <= 1e-7) {
    res.status = SdpStatus::Feasible;
  } else if (res.iters >= opt.max_iters - 1) {
    res.status = SdpStatus::IterLimit;
  } else {
    res.status = SdpStatus::NumericalFailure;
  }
  return res;
}

}  // namespace rqpd
