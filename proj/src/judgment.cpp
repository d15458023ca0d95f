#include "rqpd/judgment.hpp"

#include <algorithm>
#include <cmath>

#include "rqpd/coupling.hpp"
#include "rqpd/eigen.hpp"
#include "rqpd/operator_core.hpp"
#include "rqpd/sampling.hpp"

namespace rqpd {

namespace {

int dim_of(const std::vector<Register>& regs) {
  int d = 1;
  for (const auto& r : regs) d *= r.dim;
  return d;
}

SpaceShape product_shape(int d1, int d2) { return SpaceShape({d1, d2}); }

// reduced state of the left program (trace out side 2)
Mat left_marginal(const Mat& rho, int d1, int d2) {
  return partial_trace(rho, product_shape(d1, d2), {0});
}
// reduced state of the right program (trace out side 1)
Mat right_marginal(const Mat& rho, int d1, int d2) {
  return partial_trace(rho, product_shape(d1, d2), {1});
}

// affine operators D with tr(D rho) = 0 encoding a measurement condition
std::vector<Mat> meas_eq_affine(const MeasEqCond& c, int d1, int d2) {
  std::vector<Mat> out;
  for (std::size_t m = 0; m < c.m1.ops.size(); ++m) {
    Mat e1 = c.m1.ops[m].dagger() * c.m1.ops[m];
    Mat e2 = c.m2.ops[m].dagger() * c.m2.ops[m];
    out.push_back(tensor(e1, Mat::identity(d2)) - tensor(Mat::identity(d1), e2));
  }
  return out;
}

std::vector<Mat> meas_loop_eq_affine(const MeasLoopEqCond& c, int d1, int d2) {
  // K_0 = M0^dag M0, K_{n+1} = M1^dag P*(K_n) M1 per side; the Cayley-Hamilton
  // bound caps n at d1^2 + d2^2 - 1
  const int bound = d1 * d1 + d2 * d2 - 1;
  std::vector<Mat> out;
  Mat k1 = c.m1.ops[0].dagger() * c.m1.ops[0];
  Mat k2 = c.m2.ops[0].dagger() * c.m2.ops[0];
  for (int n = 0; n <= bound; ++n) {
    out.push_back(tensor(k1, Mat::identity(d2)) - tensor(Mat::identity(d1), k2));
    k1 = c.m1.ops[1].dagger() * dual_apply(c.p1, k1) * c.m1.ops[1];
    k2 = c.m2.ops[1].dagger() * dual_apply(c.p2, k2) * c.m2.ops[1];
  }
  return out;
}

struct AffineSet {
  std::vector<Mat> ops;  // orthonormalized, tr(E rho) = 0 wanted

  void add(std::vector<Mat> raw) {
    for (Mat& g : raw) {
      Mat h = g.hermitize();
      for (const Mat& e : ops) {
        cplx ov = e.inner(h);
        kern::active().zaxpy(h.size(), -ov, e.data(), h.data());
      }
      double nrm = h.frob_norm();
      if (nrm < 1e-10) continue;
      h *= cplx(1.0 / nrm, 0.0);
      ops.push_back(std::move(h));
    }
  }
  double residual(const Mat& rho) const {
    double worst = 0.0;
    for (const Mat& e : ops) worst = std::max(worst, std::abs(e.inner(rho).real()));
    return worst;
  }
  Mat project(const Mat& rho) const {
    Mat out = rho;
    for (const Mat& e : ops) {
      cplx ov = e.inner(out);
      kern::active().zaxpy(out.size(), -cplx(ov.real(), 0.0), e.data(), out.data());
    }
    return out;
  }
};

Mat psd_clip(const Mat& m) {
  auto eg = eig_hermitian(m.hermitize());
  const int d = m.rows();
  Mat out(d, d);
  for (int k = 0; k < d; ++k) {
    double w = eg.values[k];
    if (w <= 0.0) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out(i, j) += w * eg.vectors(i, k) * std::conj(eg.vectors(j, k));
  }
  return out;
}

// project onto {PSD, affine slice} by alternating projections, then normalize
std::optional<Mat> constrain_state(Mat rho, const AffineSet& aff) {
  for (int it = 0; it < 600; ++it) {
    rho = aff.project(rho);
    rho = psd_clip(rho);
    if (aff.residual(rho) < 1e-9) break;
  }
  double tr = rho.trace().real();
  if (tr < 1e-9) return std::nullopt;
  rho *= cplx(1.0 / tr, 0.0);
  if (aff.residual(rho) > 1e-8) return std::nullopt;
  return rho;
}

// permutation taking (parts concatenated) factor order to the register order
Mat product_pure_over_partition(const std::vector<std::vector<std::string>>& partition,
                                const std::vector<Register>& regs, std::mt19937_64& rng) {
  // positions of each part's registers
  std::vector<int> perm;  // perm[k] = source factor (in part order) for target slot k
  std::vector<int> part_order;
  std::vector<Mat> kets;
  std::vector<int> dims_parts;
  std::vector<std::string> flat;
  for (const auto& part : partition) {
    int d = 1;
    for (const auto& n : part) {
      bool found = false;
      for (const auto& r : regs)
        if (r.name == n) {
          d *= r.dim;
          found = true;
        }
      if (!found) throw std::invalid_argument("separability partition names unknown register " + n);
      flat.push_back(n);
    }
    kets.push_back(haar_ket(d, rng));
  }
  if (flat.size() != regs.size())
    throw std::invalid_argument("separability partition must cover all registers");
  Mat v = kets[0];
  for (std::size_t i = 1; i < kets.size(); ++i) v = tensor(v, kets[i]);
  // factor order of v: registers in partition-flat order; permute to regs order
  std::vector<int> src_dims;
  for (const auto& n : flat) {
    for (const auto& r : regs)
      if (r.name == n) src_dims.push_back(r.dim);
  }
  // build dense permutation on kets
  const int D = v.rows();
  Mat out(D, 1);
  std::vector<int> dig(flat.size());
  for (int idx = 0; idx < D; ++idx) {
    int t = idx;
    for (int k = int(flat.size()) - 1; k >= 0; --k) {
      dig[k] = t % src_dims[k];
      t /= src_dims[k];
    }
    // target index: order by regs
    int tgt = 0;
    for (const auto& r : regs) {
      int pos = 0;
      while (flat[pos] != r.name) ++pos;
      tgt = tgt * r.dim + dig[pos];
    }
    out(tgt, 0) = v(idx, 0);
  }
  return out;
}

}  // namespace

bool check_meas_eq(const MeasEqCond& c, const Mat& rho, int d1, int d2, double tol) {
  if (c.m1.outcomes != c.m2.outcomes)
    throw std::invalid_argument("check_meas_eq: outcome sets differ");
  Mat r1 = left_marginal(rho, d1, d2);
  Mat r2 = right_marginal(rho, d1, d2);
  for (std::size_t m = 0; m < c.m1.ops.size(); ++m) {
    double p1 = (c.m1.ops[m] * r1 * c.m1.ops[m].dagger()).trace().real();
    double p2 = (c.m2.ops[m] * r2 * c.m2.ops[m].dagger()).trace().real();
    if (std::abs(p1 - p2) > tol) return false;
  }
  return true;
}

bool check_meas_loop_eq(const MeasLoopEqCond& c, const Mat& rho, double tol) {
  const int d1 = dim_of(c.p1.registers), d2 = dim_of(c.p2.registers);
  const int bound = d1 * d1 + d2 * d2 - 1;
  SemanticFn f1 = denote(c.p1), f2 = denote(c.p2);
  Mat x1 = left_marginal(rho, d1, d2);
  Mat x2 = right_marginal(rho, d1, d2);
  for (int n = 0; n <= bound; ++n) {
    double z1 = (c.m1.ops[0] * x1 * c.m1.ops[0].dagger()).trace().real();
    double z2 = (c.m2.ops[0] * x2 * c.m2.ops[0].dagger()).trace().real();
    if (std::abs(z1 - z2) > tol) return false;
    x1 = f1.apply(c.m1.ops[1] * x1 * c.m1.ops[1].dagger());
    x2 = f2.apply(c.m2.ops[1] * x2 * c.m2.ops[1].dagger());
  }
  return true;
}

MeasJudgmentReport check_meas_judgment(const Measurement& m1, const Measurement& m2,
                                       const Mat& a, const std::vector<Mat>& bs,
                                       const Mat& rho, int d1, int d2) {
  MeasJudgmentReport rep;
  MeasEqCond cond{m1, m2};
  rep.precondition_ok = check_meas_eq(cond, rho, d1, d2);
  if (!rep.precondition_ok) {
    rep.note = "state does not satisfy M1 ~ M2; judgment not applicable";
    return rep;
  }
  Mat r1 = left_marginal(rho, d1, d2);
  Mat r2 = right_marginal(rho, d1, d2);
  double total = 0.0;
  for (std::size_t m = 0; m < m1.ops.size(); ++m) {
    Mat rho1m = m1.ops[m] * r1 * m1.ops[m].dagger();
    Mat rho2m = m2.ops[m] * r2 * m2.ops[m].dagger();
    double t = rho1m.trace().real();
    if (t < 1e-12) continue;
    CouplingProblem p;
    p.rho1 = rho1m;
    p.rho2 = rho2m;
    p.objective = bs[m];
    auto sol = max_coupling_value(p);
    if (sol.status == CouplingStatus::NumericalFailure) {
      rep.note = "coupling solve failed at outcome " + std::to_string(m1.outcomes[m]);
      return rep;
    }
    total += sol.value;
  }
  double lhs = (a * rho).trace().real();
  rep.margin = total - lhs;
  rep.holds = rep.margin >= -1e-6;
  return rep;
}

MeasJudgmentReport check_meas_judgment_one_sided(const Measurement& m, OneSide side,
                                                 const Mat& a, const std::vector<Mat>& bs,
                                                 const Mat& rho, int d1, int d2) {
  MeasJudgmentReport rep;
  rep.precondition_ok = true;  // the one-sided form has no measurement condition
  const int dm = (side == OneSide::Left) ? d1 : d2;
  const int dother = (side == OneSide::Left) ? d2 : d1;
  Mat rm = (side == OneSide::Left) ? left_marginal(rho, d1, d2) : right_marginal(rho, d1, d2);
  Mat rother = (side == OneSide::Left) ? right_marginal(rho, d1, d2) : left_marginal(rho, d1, d2);

  // one joint SDP: blocks sigma_m >= 0 with per-m measured marginal fixed
  // and the free-side marginals summing to the other reduced state
  struct Active {
    std::size_t m;
    Mat rho_m;   // measured-side post-measurement state
    Mat viso;    // support isometry of rho_m
  };
  std::vector<Active> act;
  for (std::size_t k = 0; k < m.ops.size(); ++k) {
    Mat rmk = m.ops[k] * rm * m.ops[k].dagger();
    if (rmk.trace().real() < 1e-12) continue;
    auto eg = eig_hermitian(rmk.hermitize());
    double lmax = eg.values.back();
    std::vector<int> keep;
    for (int i = 0; i < dm; ++i)
      if (eg.values[i] > 1e-11 * std::max(lmax, 1e-300)) keep.push_back(i);
    Mat v(dm, int(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      for (int i = 0; i < dm; ++i) v(i, int(c)) = eg.vectors(i, keep[c]);
    act.push_back({k, rmk, v});
  }
  if (act.empty()) {
    rep.margin = -(a * rho).trace().real();
    rep.holds = rep.margin >= -1e-6;
    return rep;
  }

  SdpProblem prob;
  std::vector<Mat> w_embed;  // isometry from compressed block to product space
  for (const auto& ac : act) {
    Mat w = (side == OneSide::Left) ? tensor(ac.viso, Mat::identity(dother))
                                    : tensor(Mat::identity(dother), ac.viso);
    w_embed.push_back(w);
    prob.block_dims.push_back(int(ac.viso.cols()) * dother);
    // objective tr(B_m sigma_m), minimized as negative
    prob.objective.push_back((w.dagger() * bs[ac.m] * w).hermitize() * cplx(-1.0, 0.0));
  }
  // per-block measured-side marginal constraints
  auto herm_units = [](int d, bool drop_last_diag) {
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
  };
  for (std::size_t b = 0; b < act.size(); ++b) {
    int r = int(act[b].viso.cols());
    Mat rc = (act[b].viso.dagger() * act[b].rho_m * act[b].viso).hermitize();
    for (const Mat& g : herm_units(r, false)) {
      SdpConstraint c;
      c.block = {int(b)};
      Mat op = (side == OneSide::Left) ? tensor(g, Mat::identity(dother))
                                       : tensor(Mat::identity(dother), g);
      c.op = {op};
      c.rhs = (g * rc).trace().real();
      prob.constraints.push_back(std::move(c));
    }
  }
  // joint free-side marginal: sum_m tr_measured(sigma_m) = rother (traceless basis)
  for (const Mat& g : herm_units(dother, true)) {
    SdpConstraint c;
    for (std::size_t b = 0; b < act.size(); ++b) {
      int r = int(act[b].viso.cols());
      Mat op = (side == OneSide::Left) ? tensor(Mat::identity(r), g)
                                       : tensor(g, Mat::identity(r));
      c.block.push_back(int(b));
      c.op.push_back(op);
    }
    c.rhs = (g * rother).trace().real();
    prob.constraints.push_back(std::move(c));
  }
  auto sr = solve_sdp(prob);
  if (sr.status != SdpStatus::Optimal && sr.status != SdpStatus::Feasible) {
    rep.note = "joint coupling solve failed";
    return rep;
  }
  double total = -sr.primal_obj;
  double lhs = (a * rho).trace().real();
  rep.margin = total - lhs;
  rep.holds = rep.margin >= -1e-6;
  return rep;
}

TriState check_separability(const SeparabilityCond& c, const Mat& rho,
                            const std::vector<Register>& product_regs) {
  // positions per part
  std::vector<int> dims;
  for (const auto& r : product_regs) dims.push_back(r.dim);
  SpaceShape shape(dims);
  std::vector<std::vector<int>> parts;
  for (const auto& part : c.partition) {
    std::vector<int> pos;
    for (const auto& n : part) {
      int idx = -1;
      for (std::size_t i = 0; i < product_regs.size(); ++i)
        if (product_regs[i].name == n) idx = int(i);
      if (idx < 0) throw std::invalid_argument("separability partition: unknown register " + n);
      pos.push_back(idx);
    }
    parts.push_back(pos);
  }
  // PPT across every cut part-vs-rest
  for (const auto& pos : parts) {
    Mat pt = partial_transpose(rho, shape, pos);
    auto w = eigenvalues_hermitian(pt.hermitize());
    if (w.front() < -1e-9) return TriState::No;
  }
  // exact in the 2 (x) 2 bipartite case
  if (parts.size() == 2) {
    int da = 1, db = 1;
    for (int p : parts[0]) da *= dims[p];
    for (int p : parts[1]) db *= dims[p];
    if (da == 2 && db == 2) return TriState::Yes;
  }
  // a state that factorizes exactly across the partition is separable
  double tr = rho.trace().real();
  if (tr > 1e-12) {
    std::vector<Mat> margs;
    std::vector<std::vector<int>> sorted_parts;
    for (const auto& pos : parts) {
      std::vector<int> sp = pos;
      std::sort(sp.begin(), sp.end());
      sorted_parts.push_back(sp);
      margs.push_back(partial_trace(rho, shape, sp));
    }
    // product in partition order, then permute factors back to register order
    Mat prod = margs[0];
    for (std::size_t i = 1; i < margs.size(); ++i) prod = tensor(prod, margs[i]);
    prod *= cplx(std::pow(tr, 1.0 - double(parts.size())), 0.0);
    std::vector<int> src_order;  // factor indices in partition order
    std::vector<int> pd;
    for (const auto& sp : sorted_parts)
      for (int p : sp) {
        src_order.push_back(p);
        pd.push_back(dims[p]);
      }
    // perm[k] = position (within partition order) of register k
    std::vector<int> perm(src_order.size());
    for (std::size_t k = 0; k < src_order.size(); ++k) {
      for (std::size_t l = 0; l < src_order.size(); ++l)
        if (src_order[l] == int(k)) perm[k] = int(l);
    }
    Mat aligned = permute_factors(prod, SpaceShape(pd), perm);
    if ((aligned - rho).max_norm() < 1e-9 * std::max(1.0, rho.max_norm()))
      return TriState::Yes;
  }
  return TriState::RelaxationPassed;
}

SampleSet sample_constrained_inputs(const std::vector<SideCondition>& gamma,
                                    const std::vector<Register>& regs1,
                                    const std::vector<Register>& regs2,
                                    const SamplerOptions& opt) {
  SampleSet out;
  const int d1 = dim_of(regs1), d2 = dim_of(regs2);
  const int D = d1 * d2;

  AffineSet aff;
  const SeparabilityCond* sep = nullptr;
  for (const auto& cond : gamma) {
    if (const auto* m = std::get_if<MeasEqCond>(&cond)) {
      aff.add(meas_eq_affine(*m, d1, d2));
    } else if (const auto* l = std::get_if<MeasLoopEqCond>(&cond)) {
      aff.add(meas_loop_eq_affine(*l, d1, d2));
    } else if (const auto* s = std::get_if<SeparabilityCond>(&cond)) {
      if (sep) out.note = "multiple separability conditions: using the finest one only";
      sep = s;
    }
  }
  std::vector<Register> all = regs1;
  for (const auto& r : regs2) all.push_back(r);

  auto try_push = [&](Mat rho) -> bool {
    if (aff.ops.empty()) {
      double tr = rho.trace().real();
      if (tr < 1e-12) return false;
      rho *= cplx(1.0 / tr, 0.0);
      out.states.push_back(std::move(rho));
      return true;
    }
    auto c = constrain_state(std::move(rho), aff);
    if (!c) return false;
    out.states.push_back(std::move(*c));
    return true;
  };

  if (sep) {
    // mixtures of product pure states are exactly separable; measurement
    // conditions are then imposed on the mixing weights
    out.approximate = !aff.ops.empty();
    int made = 0;
    for (int idx = 0; made < opt.count && idx < opt.count * 30; ++idx) {
      auto rng = seeded_rng(opt.seed, 0x5E9000 + idx);
      int K = opt.pure_only ? 1 : (2 + int(aff.ops.size()) * 2 + int(rng() % 4));
      std::vector<Mat> prods;
      for (int k = 0; k < K; ++k) {
        Mat v = product_pure_over_partition(sep->partition, all, rng);
        prods.push_back(v * v.dagger());
      }
      // find weights w >= 0, sum 1, satisfying the affine conditions
      std::vector<double> w(K, 1.0 / K);
      bool ok = true;
      if (!aff.ops.empty()) {
        // alternate: solve affine least squares in w, clip, renormalize
        const int m = int(aff.ops.size());
        std::vector<std::vector<double>> cmat(m, std::vector<double>(K));
        for (int i = 0; i < m; ++i)
          for (int k = 0; k < K; ++k) cmat[i][k] = aff.ops[i].inner(prods[k]).real();
        for (int rounds = 0; rounds < 300; ++rounds) {
          // project w onto {C w = 0} using Gram matrix
          Mat g(m, m), rhs(m, 1);
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
              double s = 0;
              for (int k = 0; k < K; ++k) s += cmat[i][k] * cmat[j][k];
              g(i, j) = s;
            }
            double ri = 0;
            for (int k = 0; k < K; ++k) ri += cmat[i][k] * w[k];
            rhs(i, 0) = ri;
          }
          for (int i = 0; i < m; ++i) g(i, i) += 1e-12;
          Mat lam = lu_solve(g, rhs);
          for (int k = 0; k < K; ++k) {
            double corr = 0;
            for (int i = 0; i < m; ++i) corr += lam(i, 0).real() * cmat[i][k];
            w[k] = std::max(0.0, w[k] - corr);
          }
          double s = 0;
          for (double x : w) s += x;
          if (s < 1e-9) {
            ok = false;
            break;
          }
          for (double& x : w) x /= s;
          double resid = 0;
          for (int i = 0; i < m; ++i) {
            double ri = 0;
            for (int k = 0; k < K; ++k) ri += cmat[i][k] * w[k];
            resid = std::max(resid, std::abs(ri));
          }
          if (resid < 1e-9) break;
          if (rounds == 299) ok = false;
        }
      }
      if (!ok) continue;
      Mat rho(D, D);
      for (int k = 0; k < K; ++k) rho += prods[k] * cplx(w[k], 0.0);
      double tr = rho.trace().real();
      rho *= cplx(1.0 / tr, 0.0);
      if (!aff.ops.empty() && aff.residual(rho) > 1e-8) continue;
      out.states.push_back(std::move(rho));
      ++made;
    }
    if (made < opt.count)
      out.note += " constrained separable sampling saturated at " + std::to_string(made);
    return out;
  }

  // structured battery: basis states, the maximally entangled state
  if (opt.include_battery) {
    for (int k = 0; k < D && k < 64; ++k) {
      Mat e(D, D);
      e(k, k) = 1.0;
      try_push(std::move(e));
    }
    if (d1 == d2) {
      Mat phi(D, 1);
      for (int i = 0; i < d1; ++i) phi(i * d2 + i, 0) = 1.0 / std::sqrt(double(d1));
      try_push(phi * phi.dagger());
    }
  }
  for (int idx = 0; int(out.states.size()) < opt.count && idx < opt.count * 20; ++idx) {
    auto rng = seeded_rng(opt.seed, idx);
    Mat rho;
    if (opt.pure_only || idx % 3 != 2) {
      rho = haar_pure(D, rng);
    } else {
      rho = random_density_matrix(D, rng);
    }
    try_push(std::move(rho));
  }
  if (!aff.ops.empty()) out.approximate = false;  // projection is exact to 1e-8
  return out;
}

namespace {

struct MarginEval {
  bool coupling_exists = true;
  double margin = 0.0;
  std::string note;
};

MarginEval eval_margin(const SemanticFn& f1, const SemanticFn& f2, const Mat& pre,
                       const Mat& post, const Mat& rho, int d1, int d2) {
  MarginEval ev;
  Mat in1 = left_marginal(rho, d1, d2);
  Mat in2 = right_marginal(rho, d1, d2);
  Mat o1 = f1.apply(in1);
  Mat o2 = f2.apply(in2);
  double t1 = o1.trace().real(), t2 = o2.trace().real();
  if (std::abs(t1 - t2) > 1e-8) {
    ev.coupling_exists = false;
    ev.margin = -1.0;
    ev.note = "output traces differ; no coupling exists";
    return ev;
  }
  CouplingProblem p;
  p.rho1 = psd_clip(o1);
  p.rho2 = psd_clip(o2);
  // re-align traces after clipping roundoff
  double tt1 = p.rho1.trace().real(), tt2 = p.rho2.trace().real();
  if (tt1 > 1e-14 && tt2 > 1e-14) p.rho2 *= cplx(tt1 / tt2, 0.0);
  p.objective = post;
  auto sol = max_coupling_value(p);
  if (sol.status == CouplingStatus::NumericalFailure) {
    ev.note = "coupling solver failed";
    ev.margin = 0.0;
    return ev;
  }
  double lhs = (pre * rho).trace().real();
  ev.margin = sol.value + rho.trace().real() - t1 - lhs;
  return ev;
}

}  // namespace

double judgment_margin(const Judgment& j, const Mat& rho) {
  const int d1 = dim_of(j.p1.registers), d2 = dim_of(j.p2.registers);
  SemanticFn f1 = denote(j.p1), f2 = denote(j.p2);
  auto ev = eval_margin(f1, f2, j.pre, j.post, rho, d1, d2);
  return ev.margin;
}

Verdict check_judgment(const Judgment& j, const SamplerOptions& opt) {
  Verdict v;
  const int d1 = dim_of(j.p1.registers), d2 = dim_of(j.p2.registers);
  if (j.pre.rows() != d1 * d2 || j.post.rows() == 0)
    throw std::invalid_argument("check_judgment: predicate dims");
  SemanticFn f1 = denote(j.p1), f2 = denote(j.p2);
  if (j.post.rows() != f1.dim_out() * f2.dim_out())
    throw std::invalid_argument("check_judgment: postcondition dim mismatch");

  SampleSet samples;
  try {
    samples = sample_constrained_inputs(j.gamma, j.p1.registers, j.p2.registers, opt);
  } catch (const std::exception& e) {
    v.status = VerdictStatus::Inconclusive;
    v.note = std::string("sampling failed: ") + e.what();
    return v;
  }
  if (samples.states.empty()) {
    v.status = VerdictStatus::Inconclusive;
    v.note = "no admissible inputs sampled; " + samples.note;
    return v;
  }
  double worst = 1e300;
  try {
    for (const Mat& rho : samples.states) {
      ++v.samples_used;
      auto ev = eval_margin(f1, f2, j.pre, j.post, rho, d1, d2);
      if (!ev.coupling_exists) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.worst_margin = ev.margin;
        v.note = ev.note;
        return v;
      }
      worst = std::min(worst, ev.margin);
      if (ev.margin < -opt.violation_tol) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.worst_margin = ev.margin;
        return v;
      }
    }
  } catch (const LoopDivergence& e) {
    v.status = VerdictStatus::Inconclusive;
    v.note = e.what();
    return v;
  }
  v.status = VerdictStatus::Passed;
  v.worst_margin = worst;
  v.note = "sampled check; passing is evidence, not proof";
  if (samples.approximate) v.note += " (approximate constrained sampling)";
  return v;
}

Verdict check_projective_judgment(const SourceProgram& p1, const SourceProgram& p2,
                                  const Mat& a, const Mat& b, const SamplerOptions& opt) {
  Verdict v;
  const int d1 = dim_of(p1.registers), d2 = dim_of(p2.registers);
  const int D = d1 * d2;
  if ((a * a - a).max_norm() > 1e-8 || (b * b - b).max_norm() > 1e-8)
    throw std::invalid_argument("projective judgment needs projector predicates");
  if (a.max_norm() < 1e-12) {
    v.status = VerdictStatus::Passed;
    v.note = "vacuous: precondition subspace is zero";
    return v;
  }
  SemanticFn f1 = denote(p1), f2 = denote(p2);
  int used = 0;
  double worst = 1e300;
  try {
    for (int idx = 0; used < opt.count && idx < opt.count * 10; ++idx) {
      auto rng = seeded_rng(opt.seed, 0xA110 + idx);
      Mat w = opt.pure_only || idx % 2 == 0 ? haar_pure(D, rng) : random_density_matrix(D, rng);
      Mat rho = a * w * a;
      double tr = rho.trace().real();
      if (tr < 1e-10) continue;
      rho *= cplx(1.0 / tr, 0.0);
      ++used;
      ++v.samples_used;
      Mat o1 = psd_clip(f1.apply(left_marginal(rho, d1, d2)));
      Mat o2 = psd_clip(f2.apply(right_marginal(rho, d1, d2)));
      double t1 = o1.trace().real(), t2 = o2.trace().real();
      if (std::abs(t1 - t2) > 1e-7) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.note = "output traces differ; no lifting exists";
        return v;
      }
      if (t1 > 1e-14) o2 *= cplx(t1 / t2, 0.0);
      auto sol = lifting_exists(o1, o2, b);
      if (sol.status == CouplingStatus::Infeasible) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.worst_margin = sol.value - t1;
        v.note = sol.note;
        return v;
      }
      if (sol.status == CouplingStatus::NumericalFailure) {
        v.status = VerdictStatus::Inconclusive;
        v.note = "lifting solve failed";
        return v;
      }
      worst = std::min(worst, sol.value - t1);
    }
  } catch (const LoopDivergence& e) {
    v.status = VerdictStatus::Inconclusive;
    v.note = e.what();
    return v;
  }
  if (used == 0) {
    v.status = VerdictStatus::Inconclusive;
    v.note = "no witnesses sampled inside the precondition subspace";
    return v;
  }
  v.status = VerdictStatus::Passed;
  v.worst_margin = worst;
  v.note = "sampled projective check; passing is evidence, not proof";
  return v;
}

Verdict check_proj_meas_condition(const Measurement& m1, const Measurement& m2, const Mat& a,
                                  const std::vector<Mat>& bs, int d1, int d2,
                                  const SamplerOptions& opt) {
  Verdict v;
  const int D = d1 * d2;
  if ((a * a - a).max_norm() > 1e-8)
    throw std::invalid_argument("projective measurement condition needs a projector A");
  int used = 0;
  for (int idx = 0; used < opt.count && idx < opt.count * 10; ++idx) {
    auto rng = seeded_rng(opt.seed, 0xB220 + idx);
    Mat w = haar_pure(D, rng);
    Mat rho = a * w * a;
    double tr = rho.trace().real();
    if (tr < 1e-10) continue;
    rho *= cplx(1.0 / tr, 0.0);
    ++used;
    ++v.samples_used;
    Mat r1 = partial_trace(rho, SpaceShape({d1, d2}), {0});
    Mat r2 = partial_trace(rho, SpaceShape({d1, d2}), {1});
    for (std::size_t m = 0; m < m1.ops.size(); ++m) {
      Mat a1 = psd_clip(m1.ops[m] * r1 * m1.ops[m].dagger());
      Mat a2 = psd_clip(m2.ops[m] * r2 * m2.ops[m].dagger());
      double t1 = a1.trace().real(), t2 = a2.trace().real();
      if (t1 < 1e-12 && t2 < 1e-12) continue;
      if (std::abs(t1 - t2) > 1e-7) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.note = "post-measurement traces differ at outcome " + std::to_string(m1.outcomes[m]);
        return v;
      }
      a2 *= cplx(t1 / t2, 0.0);
      auto sol = lifting_exists(a1, a2, bs[m]);
      if (sol.status == CouplingStatus::Infeasible) {
        v.status = VerdictStatus::Falsified;
        v.counterexample = rho;
        v.note = "no B_m lifting at outcome " + std::to_string(m1.outcomes[m]);
        return v;
      }
      if (sol.status == CouplingStatus::NumericalFailure) {
        v.status = VerdictStatus::Inconclusive;
        v.note = "lifting solve failed";
        return v;
      }
    }
  }
  v.status = VerdictStatus::Passed;
  v.note = "sampled projective measurement condition";
  return v;
}

Verdict check_couple_entailment(const std::vector<SideCondition>& gamma,
                                const std::vector<SideCondition>& delta,
                                const SourceProgram& p1, const SourceProgram& p2,
                                const SamplerOptions& opt) {
  Verdict v;
  if (delta.empty()) {
    v.status = VerdictStatus::Passed;
    v.note = "empty consequent set is trivially entailed";
    return v;
  }
  for (const auto& d : delta) {
    if (std::holds_alternative<SeparabilityCond>(d)) {
      v.status = VerdictStatus::Inconclusive;
      v.note = "separability consequents are not marginal-determined; unsupported";
      return v;
    }
  }
  const int d1 = dim_of(p1.registers), d2 = dim_of(p2.registers);
  SemanticFn f1 = denote(p1), f2 = denote(p2);
  const int e1 = f1.dim_out(), e2 = f2.dim_out();
  auto samples = sample_constrained_inputs(gamma, p1.registers, p2.registers, opt);
  if (samples.states.empty()) {
    v.status = VerdictStatus::Inconclusive;
    v.note = "no admissible inputs sampled";
    return v;
  }
  try {
    for (const Mat& rho : samples.states) {
      ++v.samples_used;
      Mat o1 = f1.apply(left_marginal(rho, d1, d2));
      Mat o2 = f2.apply(right_marginal(rho, d1, d2));
      // measurement-condition satisfaction depends only on the marginals of a
      // coupling, which are exactly (o1, o2)
      for (const auto& dcond : delta) {
        if (const auto* m = std::get_if<MeasEqCond>(&dcond)) {
          for (std::size_t k = 0; k < m->m1.ops.size(); ++k) {
            double q1 = (m->m1.ops[k] * o1 * m->m1.ops[k].dagger()).trace().real();
            double q2 = (m->m2.ops[k] * o2 * m->m2.ops[k].dagger()).trace().real();
            if (std::abs(q1 - q2) > 1e-7) {
              v.status = VerdictStatus::Falsified;
              v.counterexample = rho;
              v.worst_margin = -(std::abs(q1 - q2));
              return v;
            }
          }
        } else if (const auto* l = std::get_if<MeasLoopEqCond>(&dcond)) {
          SemanticFn b1 = denote(l->p1), b2 = denote(l->p2);
          Mat x1 = o1, x2 = o2;
          const int bound = e1 * e1 + e2 * e2 - 1;
          for (int n = 0; n <= bound; ++n) {
            double z1 = (l->m1.ops[0] * x1 * l->m1.ops[0].dagger()).trace().real();
            double z2 = (l->m2.ops[0] * x2 * l->m2.ops[0].dagger()).trace().real();
            if (std::abs(z1 - z2) > 1e-7) {
              v.status = VerdictStatus::Falsified;
              v.counterexample = rho;
              v.worst_margin = -(std::abs(z1 - z2));
              return v;
            }
            x1 = b1.apply(l->m1.ops[1] * x1 * l->m1.ops[1].dagger());
            x2 = b2.apply(l->m2.ops[1] * x2 * l->m2.ops[1].dagger());
          }
        }
      }
    }
  } catch (const LoopDivergence& e) {
    v.status = VerdictStatus::Inconclusive;
    v.note = e.what();
    return v;
  }
  v.status = VerdictStatus::Passed;
  v.note = "sampled couple-entailment check";
  if (samples.approximate) v.note += " (approximate constrained sampling)";
  return v;
}

}  // namespace rqpd
