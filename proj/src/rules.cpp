#include "rqpd/rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqpd/eigen.hpp"
#include "rqpd/operator_core.hpp"
#include "rqpd/semantics.hpp"

namespace rqpd {

namespace {

const std::map<RuleName, std::string>& rule_names() {
  static const std::map<RuleName, std::string> m = {
      {RuleName::Skip, "Skip"},       {RuleName::Init, "Init"},
      {RuleName::UT, "UT"},           {RuleName::SO, "SO"},
      {RuleName::IF, "IF"},           {RuleName::IFw, "IF-w"},
      {RuleName::IF1, "IF1"},         {RuleName::LP, "LP"},
      {RuleName::LP1, "LP1"},         {RuleName::InitL, "Init-L"},
      {RuleName::InitR, "Init-R"},    {RuleName::UTL, "UT-L"},
      {RuleName::UTR, "UT-R"},        {RuleName::SOL, "SO-L"},
      {RuleName::SOR, "SO-R"},        {RuleName::IFL, "IF-L"},
      {RuleName::IFR, "IF-R"},        {RuleName::IF1L, "IF1-L"},
      {RuleName::IF1R, "IF1-R"},      {RuleName::LPL, "LP-L"},
      {RuleName::LPR, "LP-R"},        {RuleName::LP1L, "LP1-L"},
      {RuleName::LP1R, "LP1-R"},      {RuleName::Conseq, "Conseq"},
      {RuleName::Weaken, "Weaken"},   {RuleName::Case, "Case"},
      {RuleName::Frame, "Frame"},     {RuleName::InitP, "Init-P"},
      {RuleName::InitPL, "Init-P-L"}, {RuleName::InitPR, "Init-P-R"},
      {RuleName::UTP, "UT-P"},        {RuleName::SOP, "SO-P"},
      {RuleName::SOPL, "SO-P-L"},     {RuleName::SOPR, "SO-P-R"},
      {RuleName::IFP, "IF-P"},        {RuleName::IFPL, "IF-P-L"},
      {RuleName::IFPR, "IF-P-R"},     {RuleName::LPP, "LP-P"},
      {RuleName::LPPL, "LP-P-L"},     {RuleName::LPPR, "LP-P-R"},
      {RuleName::ConseqP, "Conseq-P"},{RuleName::SkipP, "Skip-P"},
  };
  return m;
}

}  // namespace

std::string rule_name_str(RuleName r) { return rule_names().at(r); }

RuleName rule_name_from_str(const std::string& s) {
  for (const auto& [k, v] : rule_names())
    if (v == s) return k;
  throw std::invalid_argument("unknown rule name: " + s);
}

bool rule_is_projective(RuleName r) {
  switch (r) {
    case RuleName::InitP:
    case RuleName::InitPL:
    case RuleName::InitPR:
    case RuleName::UTP:
    case RuleName::SOP:
    case RuleName::SOPL:
    case RuleName::SOPR:
    case RuleName::IFP:
    case RuleName::IFPL:
    case RuleName::IFPR:
    case RuleName::LPP:
    case RuleName::LPPL:
    case RuleName::LPPR:
    case RuleName::ConseqP:
    case RuleName::SkipP:
      return true;
    default:
      return false;
  }
}

namespace rules_detail {

std::vector<Register> combine_regs(const std::vector<Register>& a,
                                   const std::vector<Register>& b) {
  std::vector<Register> out = a;
  for (const auto& r : b) {
    for (const auto& e : out)
      if (e.name == r.name)
        throw std::invalid_argument("product space: register name collision " + r.name);
    out.push_back(r);
  }
  return out;
}

int dim_of(const std::vector<Register>& regs) {
  int d = 1;
  for (const auto& r : regs) d *= r.dim;
  return d;
}

SourceProgram combined_fragment(const std::optional<SourceProgram>& f1,
                                const std::optional<SourceProgram>& f2,
                                const std::vector<Register>& regs1,
                                const std::vector<Register>& regs2) {
  SourceProgram sp;
  sp.registers = combine_regs(regs1, regs2);
  ProgramPtr p = Program::skip();
  if (f1) p = Program::seq(p, f1->prog);
  if (f2) p = Program::seq(p, f2->prog);
  sp.prog = p;
  return sp;
}

Mat embed_meas_op(const Mat& op, const std::vector<Register>& all,
                  const std::vector<std::string>& target_names) {
  std::vector<int> dims;
  std::vector<int> pos;
  for (const auto& r : all) dims.push_back(r.dim);
  for (const auto& n : target_names) {
    int idx = -1;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (all[i].name == n) idx = int(i);
    if (idx < 0) throw std::invalid_argument("embed_meas_op: unknown register " + n);
    pos.push_back(idx);
  }
  return embed_on(op, SpaceShape(dims), pos);
}

const Program& head_stmt(const SourceProgram& sp) {
  const Program* p = sp.prog.get();
  while (p && p->kind == Program::Kind::Seq) {
    if (p->second && p->second->kind != Program::Kind::Skip &&
        p->first->kind == Program::Kind::Skip) {
      p = p->second.get();
      continue;
    }
    if (p->first && (!p->second || p->second->kind == Program::Kind::Skip)) {
      p = p->first.get();
      continue;
    }
    throw std::invalid_argument("branch rule fragment must be a single statement");
  }
  if (!p) throw std::invalid_argument("empty fragment");
  return *p;
}

}  // namespace rules_detail

using namespace rules_detail;

DischargeResult discharge(const Obligation& ob, const std::vector<Register>& regs1,
                          const std::vector<Register>& regs2, const OutlinePolicy& policy) {
  DischargeResult res;
  switch (ob.kind) {
    case Obligation::Kind::Loewner: {
      res.method = DischargeMethod::Analytic;
      double margin = loewner_margin(ob.lhs, ob.rhs);
      res.residual = std::min(0.0, margin);
      res.ok = margin >= -1e-9;
      if (!res.ok) res.note = "Loewner order fails by " + std::to_string(-margin);
      return res;
    }
    case Obligation::Kind::Losslessness: {
      if (policy.assume_lossless) {
        res.method = DischargeMethod::Assumed;
        res.ok = true;
        res.note = "losslessness assumed (policy)";
        return res;
      }
      res.method = DischargeMethod::Semantics;
      auto rep = is_lossless(*ob.program);
      res.ok = rep.lossless;
      res.residual = rep.trace_defect;
      if (!res.ok) res.note = "program is not lossless: " + rep.note;
      return res;
    }
    case Obligation::Kind::MeasJudgment: {
      res.method = DischargeMethod::JudgmentEngine;
      const int d1 = dim_of(regs1), d2 = dim_of(regs2);
      SamplerOptions so = policy.sampler;
      std::vector<SideCondition> gamma;
      if (!ob.one_sided) gamma.push_back(MeasEqCond{ob.m1, ob.m2});
      auto samples = sample_constrained_inputs(gamma, regs1, regs2, so);
      if (samples.states.empty()) {
        res.ok = false;
        res.note = "no admissible samples";
        return res;
      }
      double worst = 1e300;
      for (const Mat& rho : samples.states) {
        MeasJudgmentReport rep =
            ob.one_sided
                ? check_meas_judgment_one_sided(ob.m1, ob.side, ob.pre, ob.branch_posts, rho,
                                                d1, d2)
                : check_meas_judgment(ob.m1, ob.m2, ob.pre, ob.branch_posts, rho, d1, d2);
        if (!rep.precondition_ok) continue;
        worst = std::min(worst, rep.margin);
        if (!rep.holds) {
          res.ok = false;
          res.residual = rep.margin;
          res.note = "measurement judgment fails on a sampled state (empirical)";
          return res;
        }
      }
      res.ok = true;
      res.residual = worst;
      res.note = "sampled discharge (empirical)";
      return res;
    }
    case Obligation::Kind::ProjMeasCondition: {
      res.method = DischargeMethod::JudgmentEngine;
      const int d1 = dim_of(regs1), d2 = dim_of(regs2);
      auto v = check_proj_meas_condition(ob.m1, ob.m2, ob.pre, ob.branch_posts, d1, d2,
                                         policy.sampler);
      res.ok = v.status == VerdictStatus::Passed;
      res.note = v.note;
      return res;
    }
    case Obligation::Kind::CoupleEntailment: {
      res.method = DischargeMethod::JudgmentEngine;
      auto v = check_couple_entailment(ob.gamma_from, ob.delta_to, *ob.ce_p1, *ob.ce_p2,
                                       policy.sampler);
      res.ok = v.status == VerdictStatus::Passed;
      res.residual = v.worst_margin;
      res.note = v.note;
      return res;
    }
    case Obligation::Kind::Separability: {
      res.method = DischargeMethod::Analytic;
      res.ok = true;
      res.note = "separability condition recorded into Gamma";
      return res;
    }
    case Obligation::Kind::ProbabilitySum: {
      res.method = DischargeMethod::Analytic;
      double s = 0.0;
      for (double p : ob.probs) s += p;
      res.residual = std::abs(s - 1.0);
      res.ok = res.residual <= 1e-10;
      if (!res.ok) res.note = "probabilities sum to " + std::to_string(s);
      return res;
    }
  }
  return res;
}

namespace {

// The combined program evaluates on cat(ctx1, ctx2); register-reshaping
// fragments can leave its output ordering different from the canonical
// (side-1 out, side-2 out) ordering that predicates are written in. This
// frame translates between the two orderings.
struct ProductFrame {
  SourceProgram combined;
  std::vector<Register> combined_out;
  std::vector<Register> canonical_out;

  ProductFrame(const OutlineStep& step, const std::vector<Register>& regs1,
               const std::vector<Register>& regs2) {
    combined = combined_fragment(step.frag1, step.frag2, regs1, regs2);
    combined_out = validate_program(combined);
    auto out1 = step.frag1 ? validate_program(SourceProgram{regs1, step.frag1->prog}) : regs1;
    auto out2 = step.frag2 ? validate_program(SourceProgram{regs2, step.frag2->prog}) : regs2;
    canonical_out = combine_regs(out1, out2);
  }

  bool aligned() const { return combined_out == canonical_out; }

  Mat to_combined(const Mat& canonical_op) const {
    if (aligned()) return canonical_op;
    std::vector<int> dims, perm;
    for (const auto& r : canonical_out) dims.push_back(r.dim);
    for (const auto& r : combined_out) {
      int idx = -1;
      for (std::size_t i = 0; i < canonical_out.size(); ++i)
        if (canonical_out[i].name == r.name) idx = int(i);
      perm.push_back(idx);
    }
    return permute_factors(canonical_op, SpaceShape(dims), perm);
  }

  Mat to_canonical(const Mat& combined_op) const {
    if (aligned()) return combined_op;
    std::vector<int> dims, perm;
    for (const auto& r : combined_out) dims.push_back(r.dim);
    for (const auto& r : canonical_out) {
      int idx = -1;
      for (std::size_t i = 0; i < combined_out.size(); ++i)
        if (combined_out[i].name == r.name) idx = int(i);
      perm.push_back(idx);
    }
    return permute_factors(combined_op, SpaceShape(dims), perm);
  }
};

Mat backward_channel(const OutlineStep& step, const std::vector<Register>& regs1,
                     const std::vector<Register>& regs2, const Mat& post) {
  ProductFrame frame(step, regs1, regs2);
  return dual_apply(frame.combined, frame.to_combined(post));
}

Mat forward_support(const OutlineStep& step, const std::vector<Register>& regs1,
                    const std::vector<Register>& regs2, const Mat& pre) {
  ProductFrame frame(step, regs1, regs2);
  SemanticFn fn = denote(frame.combined);
  Mat pushed = frame.to_canonical(fn.apply(pre));
  return support_projector(pushed.hermitize());
}

}  // namespace

Mat step_precondition(const OutlineStep& step, const std::vector<Register>& regs1,
                      const std::vector<Register>& regs2, std::vector<Obligation>& obligations) {
  const auto all = combine_regs(regs1, regs2);
  switch (step.rule) {
    case RuleName::Skip:
    case RuleName::SkipP:
    case RuleName::Weaken:
      return step.post;

    case RuleName::Conseq:
    case RuleName::ConseqP: {
      Obligation ob;
      ob.kind = Obligation::Kind::Loewner;
      ob.lhs = step.pre;
      ob.rhs = step.post;
      ob.describe = "Conseq: claimed pre below claimed post";
      obligations.push_back(std::move(ob));
      return step.pre;
    }

    case RuleName::Init:
    case RuleName::InitL:
    case RuleName::InitR:
    case RuleName::UT:
    case RuleName::UTL:
    case RuleName::UTR:
    case RuleName::UTP:
    case RuleName::SO:
    case RuleName::SOL:
    case RuleName::SOR:
      return backward_channel(step, regs1, regs2, step.post);

    case RuleName::InitP:
    case RuleName::InitPL:
    case RuleName::InitPR:
    case RuleName::SOP:
    case RuleName::SOPL:
    case RuleName::SOPR: {
      // forward rules: the determined side is the postcondition
      Mat derived_post = forward_support(step, regs1, regs2, step.pre);
      if ((derived_post - step.post).max_norm() > 1e-8) {
        Obligation ob;
        ob.kind = Obligation::Kind::Loewner;
        ob.lhs = step.post;
        ob.rhs = derived_post;
        ob.describe = "projective rule: claimed post must equal proj(E(pre))";
        obligations.push_back(ob);
        Obligation ob2;
        ob2.kind = Obligation::Kind::Loewner;
        ob2.lhs = derived_post;
        ob2.rhs = step.post;
        ob2.describe = "projective rule: proj(E(pre)) must equal the claimed post";
        obligations.push_back(ob2);
      }
      return step.pre;
    }

    case RuleName::IF:
    case RuleName::IFw: {
      if (!step.frag1 || !step.frag2)
        throw std::invalid_argument("IF needs statements on both sides");
      const Program& s1 = head_stmt(*step.frag1);
      const Program& s2 = head_stmt(*step.frag2);
      if (s1.kind != Program::Kind::IfMeas || s2.kind != Program::Kind::IfMeas)
        throw std::invalid_argument("IF applies to a pair of if statements");
      Mat pre(dim_of(all), dim_of(all));
      auto add_term = [&](int m, int n, const Mat& bmn) {
        Mat m1 = embed_meas_op(s1.meas.ops[m], all, s1.regs);
        Mat m2 = embed_meas_op(s2.meas.ops[n], all, s2.regs);
        Mat mm = m1 * m2;  // disjoint registers commute
        pre += mm.dagger() * bmn * mm;
      };
      if (step.rule == RuleName::IFw) {
        if (step.branch_posts.size() != s1.meas.ops.size())
          throw std::invalid_argument("IF-w: branch predicate count mismatch");
        for (std::size_t m = 0; m < s1.meas.ops.size(); ++m)
          add_term(int(m), int(m), step.branch_posts[m]);
      } else {
        for (const auto& [mn, bmn] : step.pair_posts) add_term(mn.first, mn.second, bmn);
      }
      for (const auto& br : s1.branches) {
        Obligation ob;
        ob.kind = Obligation::Kind::Losslessness;
        ob.program = SourceProgram{regs1, br};
        ob.describe = "IF: left branch lossless";
        obligations.push_back(std::move(ob));
      }
      for (const auto& br : s2.branches) {
        Obligation ob;
        ob.kind = Obligation::Kind::Losslessness;
        ob.program = SourceProgram{regs2, br};
        ob.describe = "IF: right branch lossless";
        obligations.push_back(std::move(ob));
      }
      return pre;
    }

    case RuleName::IFL:
    case RuleName::IFR: {
      bool left = step.rule == RuleName::IFL;
      const auto& frag = left ? step.frag1 : step.frag2;
      if (!frag) throw std::invalid_argument("one-sided IF: missing statement");
      const Program& s = head_stmt(*frag);
      if (s.kind != Program::Kind::IfMeas)
        throw std::invalid_argument("one-sided IF applies to an if statement");
      if (step.branch_posts.size() != s.meas.ops.size())
        throw std::invalid_argument("one-sided IF: branch predicate count mismatch");
      Mat pre(dim_of(all), dim_of(all));
      for (std::size_t m = 0; m < s.meas.ops.size(); ++m) {
        Mat mm = embed_meas_op(s.meas.ops[m], all, s.regs);
        pre += mm.dagger() * step.branch_posts[m] * mm;
      }
      return pre;
    }

    case RuleName::IF1:
    case RuleName::IFP: {
      if (!step.frag1 || !step.frag2)
        throw std::invalid_argument("IF1 needs statements on both sides");
      const Program& s1 = head_stmt(*step.frag1);
      const Program& s2 = head_stmt(*step.frag2);
      if (s1.kind != Program::Kind::IfMeas || s2.kind != Program::Kind::IfMeas)
        throw std::invalid_argument("IF1 applies to a pair of if statements");
      Obligation ob;
      ob.kind = step.rule == RuleName::IF1 ? Obligation::Kind::MeasJudgment
                                           : Obligation::Kind::ProjMeasCondition;
      ob.m1 = s1.meas;
      ob.m2 = s2.meas;
      for (auto& op : ob.m1.ops) op = embed_meas_op(op, regs1, s1.regs);
      for (auto& op : ob.m2.ops) op = embed_meas_op(op, regs2, s2.regs);
      ob.pre = step.pre;
      ob.branch_posts = step.branch_posts;
      ob.describe = "measurement condition: M1 ~ M2 |= A => {B_m}";
      obligations.push_back(std::move(ob));
      return step.pre;
    }

    case RuleName::IF1L:
    case RuleName::IF1R:
    case RuleName::IFPL:
    case RuleName::IFPR: {
      bool left = step.rule == RuleName::IF1L || step.rule == RuleName::IFPL;
      const auto& frag = left ? step.frag1 : step.frag2;
      if (!frag) throw std::invalid_argument("one-sided IF1: missing statement");
      const Program& s = head_stmt(*frag);
      if (s.kind != Program::Kind::IfMeas)
        throw std::invalid_argument("one-sided IF1 applies to an if statement");
      Obligation ob;
      ob.kind = (step.rule == RuleName::IF1L || step.rule == RuleName::IF1R)
                    ? Obligation::Kind::MeasJudgment
                    : Obligation::Kind::ProjMeasCondition;
      ob.one_sided = true;
      ob.side = left ? OneSide::Left : OneSide::Right;
      ob.m1 = s.meas;
      for (auto& op : ob.m1.ops) op = embed_meas_op(op, left ? regs1 : regs2, s.regs);
      ob.pre = step.pre;
      ob.branch_posts = step.branch_posts;
      ob.describe = "one-sided measurement condition";
      obligations.push_back(std::move(ob));
      return step.pre;
    }

    case RuleName::LP: {
      if (!step.frag1 || !step.frag2)
        throw std::invalid_argument("LP needs loops on both sides");
      const Program& s1 = head_stmt(*step.frag1);
      const Program& s2 = head_stmt(*step.frag2);
      if (s1.kind != Program::Kind::WhileMeas || s2.kind != Program::Kind::WhileMeas)
        throw std::invalid_argument("LP applies to a pair of while loops");
      Mat m0 = embed_meas_op(s1.meas.ops[0], all, s1.regs) *
               embed_meas_op(s2.meas.ops[0], all, s2.regs);
      Mat m1 = embed_meas_op(s1.meas.ops[1], all, s1.regs) *
               embed_meas_op(s2.meas.ops[1], all, s2.regs);
      Mat pre = m0.dagger() * step.loop_invariant_a * m0 +
                m1.dagger() * step.loop_invariant_b * m1;
      for (const auto& frag : {step.frag1, step.frag2}) {
        Obligation ob;
        ob.kind = Obligation::Kind::Losslessness;
        ob.program = *frag;
        ob.describe = "LP: loop lossless";
        obligations.push_back(std::move(ob));
      }
      return pre;
    }

    case RuleName::LPL:
    case RuleName::LPR: {
      bool left = step.rule == RuleName::LPL;
      const auto& frag = left ? step.frag1 : step.frag2;
      if (!frag) throw std::invalid_argument("one-sided LP: missing loop");
      const Program& s = head_stmt(*frag);
      if (s.kind != Program::Kind::WhileMeas)
        throw std::invalid_argument("one-sided LP applies to a while loop");
      Mat m0 = embed_meas_op(s.meas.ops[0], all, s.regs);
      Mat m1 = embed_meas_op(s.meas.ops[1], all, s.regs);
      Mat pre = m0.dagger() * step.loop_invariant_a * m0 +
                m1.dagger() * step.loop_invariant_b * m1;
      Obligation ob;
      ob.kind = Obligation::Kind::Losslessness;
      ob.program = *frag;
      ob.describe = "LP one-sided: loop lossless";
      obligations.push_back(std::move(ob));
      return pre;
    }

    case RuleName::LP1:
    case RuleName::LPP: {
      if (!step.frag1 || !step.frag2)
        throw std::invalid_argument("LP1 needs loops on both sides");
      const Program& s1 = head_stmt(*step.frag1);
      const Program& s2 = head_stmt(*step.frag2);
      if (s1.kind != Program::Kind::WhileMeas || s2.kind != Program::Kind::WhileMeas)
        throw std::invalid_argument("LP1 applies to a pair of while loops");
      Obligation ob;
      ob.kind = step.rule == RuleName::LP1 ? Obligation::Kind::MeasJudgment
                                           : Obligation::Kind::ProjMeasCondition;
      ob.m1 = s1.meas;
      ob.m2 = s2.meas;
      for (auto& op : ob.m1.ops) op = embed_meas_op(op, regs1, s1.regs);
      for (auto& op : ob.m2.ops) op = embed_meas_op(op, regs2, s2.regs);
      ob.pre = step.pre;
      ob.branch_posts = step.branch_posts;
      ob.describe = "loop measurement condition: M1 ~ M2 |= A => {B_0, B_1}";
      obligations.push_back(std::move(ob));
      return step.pre;
    }

    case RuleName::LP1L:
    case RuleName::LP1R:
    case RuleName::LPPL:
    case RuleName::LPPR: {
      bool left = step.rule == RuleName::LP1L || step.rule == RuleName::LPPL;
      const auto& frag = left ? step.frag1 : step.frag2;
      if (!frag) throw std::invalid_argument("one-sided LP1: missing loop");
      const Program& s = head_stmt(*frag);
      if (s.kind != Program::Kind::WhileMeas)
        throw std::invalid_argument("one-sided LP1 applies to a while loop");
      Obligation lossless;
      lossless.kind = Obligation::Kind::Losslessness;
      lossless.program = *frag;
      lossless.describe = "LP1 one-sided: loop lossless";
      obligations.push_back(std::move(lossless));
      Obligation ob;
      ob.kind = (step.rule == RuleName::LP1L || step.rule == RuleName::LP1R)
                    ? Obligation::Kind::MeasJudgment
                    : Obligation::Kind::ProjMeasCondition;
      ob.one_sided = true;
      ob.side = left ? OneSide::Left : OneSide::Right;
      ob.m1 = s.meas;
      for (auto& op : ob.m1.ops) op = embed_meas_op(op, left ? regs1 : regs2, s.regs);
      ob.pre = step.pre;
      ob.branch_posts = step.branch_posts;
      ob.describe = "one-sided loop measurement condition";
      obligations.push_back(std::move(ob));
      return step.pre;
    }

    case RuleName::Case: {
      Obligation ob;
      ob.kind = Obligation::Kind::ProbabilitySum;
      ob.probs = step.case_probs;
      ob.describe = "Case: weights form a probability distribution";
      obligations.push_back(std::move(ob));
      Mat pre(dim_of(all), dim_of(all));
      for (std::size_t i = 0; i < step.case_pres.size(); ++i)
        pre += step.case_pres[i] * cplx(step.case_probs[i], 0.0);
      return pre;
    }

    case RuleName::Frame: {
      // the Frame checker computes pre/post from the inner derivation
      return step.pre;
    }
  }
  throw std::logic_error("step_precondition: unreachable");
}

}  // namespace rqpd
