#include "rqpd/comparability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqpd/operator_core.hpp"
#include "rqpd/semantics.hpp"

namespace rqpd {

namespace {

void flatten(const ProgramPtr& p, std::vector<const Program*>& out) {
  if (!p || p->kind == Program::Kind::Skip) return;
  if (p->kind == Program::Kind::Seq) {
    flatten(p->first, out);
    flatten(p->second, out);
    return;
  }
  out.push_back(p.get());
}

Mat embed_full(const Mat& op, const std::vector<Register>& regs,
               const std::vector<std::string>& names) {
  std::vector<int> dims, pos;
  for (const auto& r : regs) dims.push_back(r.dim);
  for (const auto& n : names) {
    int idx = -1;
    for (std::size_t i = 0; i < regs.size(); ++i)
      if (regs[i].name == n) idx = int(i);
    if (idx < 0) throw std::invalid_argument("comparability: unknown register " + n);
    pos.push_back(idx);
  }
  return embed_on(op, SpaceShape(dims), pos);
}

// orthonormalize the joint pairs (A_i, B_i) and drop dependent ones
void dedup(ConstraintSet& c) {
  std::vector<std::pair<Mat, Mat>> kept;
  std::vector<std::pair<Mat, Mat>> basis;
  for (auto& [a, b] : c.pairs) {
    Mat ga = a.hermitize(), gb = b.hermitize();
    Mat ra = ga, rb = gb;
    for (const auto& [ea, eb] : basis) {
      cplx ov = ea.inner(ra) + eb.inner(rb);
      kern::active().zaxpy(ra.size(), -ov, ea.data(), ra.data());
      kern::active().zaxpy(rb.size(), -ov, eb.data(), rb.data());
    }
    double nrm = std::sqrt(ra.frob_norm() * ra.frob_norm() + rb.frob_norm() * rb.frob_norm());
    double scale = std::sqrt(ga.frob_norm() * ga.frob_norm() + gb.frob_norm() * gb.frob_norm());
    if (nrm <= 1e-10 * std::max(scale, 1.0)) continue;
    basis.push_back({ra * cplx(1.0 / nrm, 0.0), rb * cplx(1.0 / nrm, 0.0)});
    kept.push_back({ga, gb});
  }
  c.pairs = std::move(kept);
}

}  // namespace

ConstraintSet collect_constraints(const SourceProgram& p1, const SourceProgram& p2) {
  std::vector<const Program*> s1, s2;
  flatten(p1.prog, s1);
  flatten(p2.prog, s2);
  if (s1.size() != s2.size())
    throw std::invalid_argument(
        "comparability: the programs must decompose into aligned statement lists");
  const int d1 = [&] {
    int d = 1;
    for (const auto& r : p1.registers) d *= r.dim;
    return d;
  }();
  const int d2 = [&] {
    int d = 1;
    for (const auto& r : p2.registers) d *= r.dim;
    return d;
  }();

  ConstraintSet c;
  c.pairs.push_back({Mat::identity(d1), Mat::identity(d2)});
  // walk backward through the aligned statements
  for (int i = int(s1.size()) - 1; i >= 0; --i) {
    const Program* a = s1[i];
    const Program* b = s2[i];
    if (a->kind == Program::Kind::IfMeas && b->kind == Program::Kind::IfMeas) {
      if (a->meas.outcomes != b->meas.outcomes)
        throw std::invalid_argument("comparability: if statements with different outcomes");
      ConstraintSet next;
      for (std::size_t m = 0; m < a->meas.ops.size(); ++m) {
        Mat ma = embed_full(a->meas.ops[m], p1.registers, a->regs);
        Mat mb = embed_full(b->meas.ops[m], p2.registers, b->regs);
        next.pairs.push_back({ma.dagger() * ma, mb.dagger() * mb});
        SourceProgram br1{p1.registers, a->branches[m]};
        SourceProgram br2{p2.registers, b->branches[m]};
        for (const auto& [ak, bk] : c.pairs) {
          next.pairs.push_back({ma.dagger() * dual_apply(br1, ak) * ma,
                                mb.dagger() * dual_apply(br2, bk) * mb});
        }
      }
      c = std::move(next);
    } else if (a->kind == Program::Kind::WhileMeas && b->kind == Program::Kind::WhileMeas) {
      Mat m0a = embed_full(a->meas.ops[0], p1.registers, a->regs);
      Mat m1a = embed_full(a->meas.ops[1], p1.registers, a->regs);
      Mat m0b = embed_full(b->meas.ops[0], p2.registers, b->regs);
      Mat m1b = embed_full(b->meas.ops[1], p2.registers, b->regs);
      SourceProgram body1{p1.registers, a->body};
      SourceProgram body2{p2.registers, b->body};
      auto ea = [&](const Mat& x) { return m1a.dagger() * dual_apply(body1, x) * m1a; };
      auto fb = [&](const Mat& x) { return m1b.dagger() * dual_apply(body2, x) * m1b; };
      const int bound = d1 * d1 + d2 * d2 + 1;  // the appendix loop bound, verbatim
      ConstraintSet next;
      Mat xa = m0a.dagger() * m0a;
      Mat xb = m0b.dagger() * m0b;
      std::vector<std::pair<Mat, Mat>> seeded;
      for (const auto& [ak, bk] : c.pairs)
        seeded.push_back({m0a.dagger() * ak * m0a, m0b.dagger() * bk * m0b});
      for (int jj = 0; jj <= bound; ++jj) {
        next.pairs.push_back({xa, xb});
        for (auto& [ak, bk] : seeded) {
          next.pairs.push_back({ak, bk});
          ak = ea(ak);
          bk = fb(bk);
        }
        xa = ea(xa);
        xb = fb(xb);
      }
      c = std::move(next);
    } else {
      throw std::invalid_argument(
          "comparability: unsupported statement alignment (need both-if or both-while)");
    }
    dedup(c);
  }
  dedup(c);
  return c;
}

bool check_comparability(const ConstraintSet& c, const Mat& rho1, const Mat& rho2,
                         double tol) {
  for (const auto& [a, b] : c.pairs) {
    double lhs = (a * rho1).trace().real();
    double rhs = (b * rho2).trace().real();
    if (std::abs(lhs - rhs) > tol) return false;
  }
  return true;
}

bool solve_partner(const ConstraintSet& c, const Mat& rho1, Mat& rho2_inout, double tol) {
  // orthonormalize the right-hand operators and carry the targets along
  std::vector<Mat> ops;
  std::vector<double> rhs;
  for (const auto& [a, b] : c.pairs) {
    Mat g = b.hermitize();
    double v = (a * rho1).trace().real();
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
  Mat x = rho2_inout.hermitize();
  for (int it = 0; it < 800; ++it) {
    for (std::size_t l = 0; l < ops.size(); ++l) {
      double defect = rhs[l] - ops[l].inner(x).real();
      x += ops[l] * cplx(defect, 0.0);
    }
    auto eg = eig_hermitian(x.hermitize());
    Mat clip(x.rows(), x.cols());
    for (int k = 0; k < x.rows(); ++k) {
      if (eg.values[k] <= 0.0) continue;
      for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j)
          clip(i, j) += eg.values[k] * eg.vectors(i, k) * std::conj(eg.vectors(j, k));
    }
    x = clip;
    double worst = 0.0;
    for (std::size_t l = 0; l < ops.size(); ++l)
      worst = std::max(worst, std::abs(rhs[l] - ops[l].inner(x).real()));
    if (worst < tol) {
      rho2_inout = x;
      return true;
    }
  }
  return false;
}

}  // namespace rqpd
