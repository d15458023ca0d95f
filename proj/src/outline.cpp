#include <algorithm>
#include <functional>
#include <sstream>

#include "rqpd/json_io.hpp"
#include "rqpd/operator_core.hpp"
#include "rqpd/rules.hpp"
#include "rqpd/semantics.hpp"

namespace rqpd {

namespace rules_detail {
std::vector<Register> combine_regs(const std::vector<Register>& a,
                                   const std::vector<Register>& b);
int dim_of(const std::vector<Register>& regs);
Mat embed_meas_op(const Mat& op, const std::vector<Register>& all,
                  const std::vector<std::string>& target_names);
const Program& head_stmt(const SourceProgram& sp);
}  // namespace rules_detail

using rules_detail::combine_regs;
using rules_detail::dim_of;
using rules_detail::embed_meas_op;
using rules_detail::head_stmt;

namespace {

bool meas_equal(const Measurement& a, const Measurement& b) {
  if (a.outcomes != b.outcomes || a.ops.size() != b.ops.size()) return false;
  for (std::size_t i = 0; i < a.ops.size(); ++i)
    if (!a.ops[i].approx_equal(b.ops[i], 1e-10)) return false;
  return true;
}

bool cond_equal(const SideCondition& x, const SideCondition& y) {
  if (const auto* a = std::get_if<MeasEqCond>(&x)) {
    const auto* b = std::get_if<MeasEqCond>(&y);
    return b && meas_equal(a->m1, b->m1) && meas_equal(a->m2, b->m2);
  }
  if (const auto* a = std::get_if<MeasLoopEqCond>(&x)) {
    const auto* b = std::get_if<MeasLoopEqCond>(&y);
    return b && meas_equal(a->m1, b->m1) && meas_equal(a->m2, b->m2) &&
           programs_equal(a->p1, b->p1) && programs_equal(a->p2, b->p2);
  }
  if (const auto* a = std::get_if<SeparabilityCond>(&x)) {
    const auto* b = std::get_if<SeparabilityCond>(&y);
    return b && a->partition == b->partition;
  }
  return false;
}

bool cond_subset(const std::vector<SideCondition>& sub, const std::vector<SideCondition>& sup) {
  for (const auto& c : sub) {
    bool found = false;
    for (const auto& d : sup) found = found || cond_equal(c, d);
    if (!found) return false;
  }
  return true;
}

SourceProgram skip_program(const std::vector<Register>& regs) {
  return SourceProgram{regs, Program::skip()};
}

// condition the rule demands at its input interface
std::vector<SideCondition> required_conditions(const OutlineStep& step,
                                               const std::vector<Register>& regs1,
                                               const std::vector<Register>& regs2) {
  std::vector<SideCondition> out;
  if (step.rule == RuleName::IF1) {
    const Program& s1 = head_stmt(*step.frag1);
    const Program& s2 = head_stmt(*step.frag2);
    Measurement m1 = s1.meas, m2 = s2.meas;
    for (auto& op : m1.ops) op = embed_meas_op(op, regs1, s1.regs);
    for (auto& op : m2.ops) op = embed_meas_op(op, regs2, s2.regs);
    out.push_back(MeasEqCond{m1, m2});
  } else if (step.rule == RuleName::LP1) {
    const Program& s1 = head_stmt(*step.frag1);
    const Program& s2 = head_stmt(*step.frag2);
    Measurement m1 = s1.meas, m2 = s2.meas;
    for (auto& op : m1.ops) op = embed_meas_op(op, regs1, s1.regs);
    for (auto& op : m2.ops) op = embed_meas_op(op, regs2, s2.regs);
    out.push_back(MeasLoopEqCond{m1, SourceProgram{regs1, s1.body}, m2,
                                 SourceProgram{regs2, s2.body}});
  }
  return out;
}

struct ChainChecker {
  const OutlinePolicy& policy;
  OutlineReport& report;
  bool projective;

  bool check_chain(const std::vector<OutlineStep>& steps, std::vector<Register> ctx1,
                   std::vector<Register> ctx2, const Mat& expect_pre, const Mat& expect_post,
                   std::vector<SideCondition> conditions, int depth);

  bool fail(StepReport& sr, const std::string& why) {
    sr.ok = false;
    sr.note = why;
    report.steps.push_back(sr);
    return false;
  }
};

bool ChainChecker::check_chain(const std::vector<OutlineStep>& steps,
                               std::vector<Register> ctx1, std::vector<Register> ctx2,
                               const Mat& expect_pre, const Mat& expect_post,
                               std::vector<SideCondition> conditions, int depth) {
  if (steps.empty()) return false;
  Mat current = expect_pre;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const OutlineStep& step = steps[k];
    StepReport sr;
    sr.rule = std::string(depth, '.') + rule_name_str(step.rule);
    if (projective != rule_is_projective(step.rule) &&
        step.rule != RuleName::Conseq && step.rule != RuleName::Weaken)
      return fail(sr, "rule from the wrong system (projective vs general)");

    // claimed pre must continue the chain
    if (current.rows() != step.pre.rows() || (current - step.pre).max_norm() > 1e-8)
      return fail(sr, "claimed precondition does not match the chain");
    if (projective) {
      if ((step.pre * step.pre - step.pre).max_norm() > 1e-7 ||
          (step.post * step.post - step.post).max_norm() > 1e-7)
        return fail(sr, "projective outline predicates must be projectors");
    }

    // rule-required interface conditions
    auto needed = required_conditions(step, ctx1, ctx2);
    if (!cond_subset(needed, conditions))
      return fail(sr, "required side condition missing at this point of the outline");

    // recompute the transformed predicate and gather obligations
    std::vector<Obligation> obs;
    Mat derived;
    try {
      derived = step_precondition(step, ctx1, ctx2, obs);
    } catch (const std::exception& e) {
      return fail(sr, std::string("transformer failed: ") + e.what());
    }
    sr.predicate_residual = (derived - step.pre).max_norm();
    sr.predicate_ok = sr.predicate_residual <= 1e-8;
    if (!sr.predicate_ok) {
      sr.ok = false;
      sr.note = "recomputed precondition differs from the claim";
      report.steps.push_back(sr);
      return false;
    }

    // quantum predicate preservation note (transformers should keep [0, I])
    {
      auto pw = eigenvalues_hermitian(step.pre.hermitize());
      if (pw.front() < -1e-8 || pw.back() > 1.0 + 1e-8)
        sr.note += "[warning: precondition is not a quantum predicate] ";
    }

    // nested derivations
    auto check_branch_chains =
        [&](const std::vector<Mat>& pres, const Mat& post_c,
            const std::vector<std::vector<OutlineStep>>& chains) -> bool {
      if (chains.size() != pres.size()) return false;
      for (std::size_t b = 0; b < chains.size(); ++b) {
        if (chains[b].empty()) {
          // an empty nested chain claims B_b => C by identity (skip)
          if ((pres[b] - post_c).max_norm() > 1e-8) return false;
          continue;
        }
        if (!check_chain(chains[b], ctx1, ctx2, pres[b], post_c, {}, depth + 1)) return false;
      }
      return true;
    };

    switch (step.rule) {
      case RuleName::IF:
        // pair_posts order defines the nested chain order
        {
          std::vector<Mat> pres;
          for (const auto& [mn, bmn] : step.pair_posts) pres.push_back(bmn);
          if (!check_branch_chains(pres, step.post, step.branch_steps))
            return fail(sr, "a branch derivation failed");
        }
        break;
      case RuleName::IFw:
      case RuleName::IFL:
      case RuleName::IFR:
      case RuleName::IF1:
      case RuleName::IF1L:
      case RuleName::IF1R:
      case RuleName::IFP:
      case RuleName::IFPL:
      case RuleName::IFPR:
        if (!check_branch_chains(step.branch_posts, step.post, step.branch_steps))
          return fail(sr, "a branch derivation failed");
        break;
      case RuleName::LP: {
        // body judgment: B => M0t A M0 + M1t B M1 (the step's recomputed pre)
        if (!check_chain(step.body_steps, ctx1, ctx2, step.loop_invariant_b, derived, {},
                         depth + 1))
          return fail(sr, "loop body derivation failed");
        if ((step.post - step.loop_invariant_a).max_norm() > 1e-8)
          return fail(sr, "LP: postcondition must be the loop invariant A");
        break;
      }
      case RuleName::LPL:
      case RuleName::LPR: {
        if (!check_chain(step.body_steps, ctx1, ctx2, step.loop_invariant_b, derived, {},
                         depth + 1))
          return fail(sr, "loop body derivation failed");
        if ((step.post - step.loop_invariant_a).max_norm() > 1e-8)
          return fail(sr, "LP one-sided: postcondition must be the loop invariant A");
        break;
      }
      case RuleName::LP1:
      case RuleName::LPP: {
        // body judgment: B1 => A with A the claimed pre; post must be B0
        if (step.branch_posts.size() != 2)
          return fail(sr, "LP1 needs branch predicates {B0, B1}");
        if (!check_chain(step.body_steps, ctx1, ctx2, step.branch_posts[1], step.pre, {},
                         depth + 1))
          return fail(sr, "loop body derivation failed");
        if ((step.post - step.branch_posts[0]).max_norm() > 1e-8)
          return fail(sr, "LP1: postcondition must be B0");
        break;
      }
      case RuleName::LP1L:
      case RuleName::LP1R:
      case RuleName::LPPL:
      case RuleName::LPPR: {
        if (step.branch_posts.size() != 2)
          return fail(sr, "LP1 one-sided needs branch predicates {B0, B1}");
        if (!check_chain(step.body_steps, ctx1, ctx2, step.branch_posts[1], step.pre, {},
                         depth + 1))
          return fail(sr, "loop body derivation failed");
        if ((step.post - step.branch_posts[0]).max_norm() > 1e-8)
          return fail(sr, "LP1 one-sided: postcondition must be B0");
        break;
      }
      case RuleName::Case: {
        if (step.case_pres.size() != step.case_probs.size() ||
            step.case_steps.size() != step.case_pres.size())
          return fail(sr, "Case payload sizes disagree");
        if (!check_branch_chains(step.case_pres, step.post, step.case_steps))
          return fail(sr, "a Case branch derivation failed");
        break;
      }
      case RuleName::Frame: {
        // inner derivation on the registers outside V
        std::vector<Register> in1, in2, v1, v2;
        auto in_v = [&](const Register& r) {
          for (const auto& v : step.frame_registers)
            if (v.name == r.name) return true;
          return false;
        };
        for (const auto& r : ctx1) (in_v(r) ? v1 : in1).push_back(r);
        for (const auto& r : ctx2) (in_v(r) ? v2 : in2).push_back(r);
        // fragments must not touch V
        for (const auto& frag : {step.frag1, step.frag2})
          if (frag)
            for (const auto& n : used_registers(frag->prog))
              for (const auto& v : step.frame_registers)
                if (v.name == n) return fail(sr, "Frame: programs touch a framed register");
        if (step.inner_steps.empty()) return fail(sr, "Frame needs an inner derivation");
        Mat inner_pre = step.inner_steps.front().pre;
        Mat inner_post = step.inner_steps.back().post;
        if (!check_chain(step.inner_steps, in1, in2, inner_pre, inner_post, {}, depth + 1))
          return fail(sr, "Frame inner derivation failed");
        // claimed pre/post must be inner (x) C aligned to the register order
        auto all = combine_regs(ctx1, ctx2);
        auto inner_all = combine_regs(in1, in2);
        std::vector<std::string> inner_names, v_names;
        for (const auto& r : inner_all) inner_names.push_back(r.name);
        for (const auto& r : step.frame_registers) v_names.push_back(r.name);
        Mat pre_full = embed_meas_op(inner_pre, all, inner_names) *
                       embed_meas_op(step.frame_predicate, all, v_names);
        Mat post_full = embed_meas_op(inner_post, all, inner_names) *
                        embed_meas_op(step.frame_predicate, all, v_names);
        if ((pre_full - step.pre).max_norm() > 1e-8 ||
            (post_full - step.post).max_norm() > 1e-8)
          return fail(sr, "Frame: claimed predicates are not inner (x) C");
        // record the separability condition into the interface conditions
        Obligation ob;
        ob.kind = Obligation::Kind::Separability;
        ob.describe = "Frame separability condition [V, var(P1, P2)]";
        obs.push_back(std::move(ob));
        break;
      }
      default:
        break;
    }

    // discharge obligations
    bool all_ok = true;
    for (const auto& ob : obs) {
      DischargeResult dr = discharge(ob, ctx1, ctx2, policy);
      all_ok = all_ok && dr.ok;
      sr.obligations.push_back({ob, dr});
    }
    if (!all_ok) {
      sr.ok = false;
      sr.note += "an obligation failed to discharge";
      report.steps.push_back(sr);
      return false;
    }

    // advance register contexts through the fragments
    try {
      if (step.frag1) ctx1 = validate_program(SourceProgram{ctx1, step.frag1->prog});
      if (step.frag2) ctx2 = validate_program(SourceProgram{ctx2, step.frag2->prog});
    } catch (const std::exception& e) {
      return fail(sr, std::string("fragment validation failed: ") + e.what());
    }

    // interface conditions: couple-entailment from the current set through
    // this step's fragments into the claimed next set
    if (!step.conditions_after.empty() || !conditions.empty()) {
      bool same = step.conditions_after.size() == conditions.size() &&
                  cond_subset(step.conditions_after, conditions) &&
                  cond_subset(conditions, step.conditions_after);
      bool dropping = cond_subset(step.conditions_after, conditions) && !step.frag1 &&
                      !step.frag2;
      if (!same && !dropping) {
        Obligation ob;
        ob.kind = Obligation::Kind::CoupleEntailment;
        ob.gamma_from = conditions;
        ob.delta_to = step.conditions_after;
        ob.ce_p1 = step.frag1 ? *step.frag1 : skip_program(ctx1);
        ob.ce_p2 = step.frag2 ? *step.frag2 : skip_program(ctx2);
        ob.describe = "interface conditions couple-entailed through the fragments";
        DischargeResult dr = discharge(ob, ctx1, ctx2, policy);
        sr.obligations.push_back({ob, dr});
        if (!dr.ok) {
          sr.ok = false;
          sr.note += "interface condition entailment failed";
          report.steps.push_back(sr);
          return false;
        }
      }
    }
    conditions = step.conditions_after;

    sr.ok = true;
    report.steps.push_back(sr);
    current = step.post;
  }
  if ((current - expect_post).max_norm() > 1e-8) {
    StepReport sr;
    sr.rule = std::string(depth, '.') + "(conclusion)";
    sr.ok = false;
    sr.note = "chain postcondition does not match";
    report.steps.push_back(sr);
    return false;
  }
  return true;
}

}  // namespace

OutlineReport check_outline(const ProofOutline& outline, const OutlinePolicy& policy) {
  OutlineReport rep;
  if (outline.steps.empty()) {
    rep.note = "empty outline";
    return rep;
  }
  ChainChecker ck{policy, rep, outline.projective};
  Mat pre = outline.steps.front().pre;
  Mat post = outline.steps.back().post;
  rep.ok = ck.check_chain(outline.steps, outline.regs1, outline.regs2, pre, post, {}, 0);
  if (rep.ok) {
    Judgment j;
    ProgramPtr p1 = Program::skip(), p2 = Program::skip();
    for (const auto& s : outline.steps) {
      if (s.frag1) p1 = Program::seq(p1, s.frag1->prog);
      if (s.frag2) p2 = Program::seq(p2, s.frag2->prog);
    }
    j.p1 = SourceProgram{outline.regs1, p1};
    j.p2 = SourceProgram{outline.regs2, p2};
    j.pre = pre;
    j.post = post;
    rep.conclusion = std::move(j);
  }
  return rep;
}

QpdReport qpd_wp(const std::vector<QpdStep>& steps, const std::vector<Register>& regs,
                 const Mat& post, const OutlinePolicy& policy) {
  QpdReport rep;
  std::function<bool(const std::vector<QpdStep>&, std::vector<Register>, const Mat&,
                     const Mat&)>
      chain = [&](const std::vector<QpdStep>& ss, std::vector<Register> ctx,
                  const Mat& expect_pre, const Mat& expect_post) -> bool {
    Mat current = expect_pre;
    for (const auto& s : ss) {
      if ((current - s.pre).max_norm() > 1e-8) {
        rep.notes.push_back("claimed precondition breaks the chain");
        return false;
      }
      Mat derived;
      switch (s.rule) {
        case QpdRule::AxSk:
          derived = s.post;
          break;
        case QpdRule::AxInit:
        case QpdRule::AxUT:
        case QpdRule::RSO:
          derived = dual_apply(SourceProgram{ctx, s.frag->prog}, s.post);
          break;
        case QpdRule::ROr: {
          Obligation ob;
          ob.kind = Obligation::Kind::Loewner;
          ob.lhs = s.pre;
          ob.rhs = s.post;
          ob.describe = "Order rule: pre below post";
          auto dr = discharge(ob, ctx, {}, policy);
          rep.obligations.push_back({ob, dr});
          if (!dr.ok) {
            rep.notes.push_back("order rule fails the Loewner check");
            return false;
          }
          derived = s.pre;
          break;
        }
        case QpdRule::RIF: {
          const Program& st = head_stmt(*s.frag);
          if (st.kind != Program::Kind::IfMeas) {
            rep.notes.push_back("R.IF applies to an if statement");
            return false;
          }
          if (s.branch_pres.size() != st.meas.ops.size()) {
            rep.notes.push_back("R.IF: branch predicate count mismatch");
            return false;
          }
          derived = Mat(dim_of(ctx), dim_of(ctx));
          for (std::size_t m = 0; m < st.meas.ops.size(); ++m) {
            Mat mm = embed_meas_op(st.meas.ops[m], ctx, st.regs);
            derived += mm.dagger() * s.branch_pres[m] * mm;
            if (m < s.branch_steps.size() && !s.branch_steps[m].empty()) {
              if (!chain(s.branch_steps[m], ctx, s.branch_pres[m], s.post)) return false;
            } else if ((s.branch_pres[m] - s.post).max_norm() > 1e-8) {
              rep.notes.push_back("R.IF: missing branch derivation");
              return false;
            }
          }
          break;
        }
        case QpdRule::RLP: {
          const Program& st = head_stmt(*s.frag);
          if (st.kind != Program::Kind::WhileMeas) {
            rep.notes.push_back("R.LP applies to a while loop");
            return false;
          }
          Mat m0 = embed_meas_op(st.meas.ops[0], ctx, st.regs);
          Mat m1 = embed_meas_op(st.meas.ops[1], ctx, st.regs);
          derived = m0.dagger() * s.loop_invariant_a * m0 +
                    m1.dagger() * s.loop_invariant_b * m1;
          if ((s.post - s.loop_invariant_a).max_norm() > 1e-8) {
            rep.notes.push_back("R.LP: postcondition must be the invariant A");
            return false;
          }
          if (!chain(s.body_steps, ctx, s.loop_invariant_b, derived)) return false;
          break;
        }
      }
      if ((derived - s.pre).max_norm() > 1e-8) {
        rep.notes.push_back("recomputed precondition differs from the claim");
        return false;
      }
      if (s.frag) ctx = validate_program(SourceProgram{ctx, s.frag->prog});
      current = s.post;
    }
    if ((current - expect_post).max_norm() > 1e-8) {
      rep.notes.push_back("chain postcondition does not match");
      return false;
    }
    return true;
  };
  if (steps.empty()) {
    rep.ok = false;
    return rep;
  }
  rep.precondition = steps.front().pre;
  rep.ok = chain(steps, regs, rep.precondition, post);
  return rep;
}

// ---- JSON ----
//
// Outline wire format: fragments are self-contained .qw programs whose
// register declarations match the context at their step.

namespace {

std::vector<Register> regs_from_json(const json& j) {
  std::vector<Register> out;
  for (const auto& e : j) out.push_back({e["name"].get<std::string>(), e["dim"].get<int>()});
  return out;
}

json regs_to_json(const std::vector<Register>& regs) {
  json out = json::array();
  for (const auto& r : regs) out.push_back({{"name", r.name}, {"dim", r.dim}});
  return out;
}

Measurement meas_from_json(const json& j) {
  Measurement m;
  for (const auto& o : j["outcomes"]) m.outcomes.push_back(o.get<int>());
  for (const auto& o : j["ops"]) m.ops.push_back(matrix_from_json(o));
  if (j.contains("name")) m.name = j["name"].get<std::string>();
  return m;
}

json meas_to_json(const Measurement& m) {
  json ops = json::array();
  for (const auto& o : m.ops) ops.push_back(matrix_to_json(o));
  return json{{"name", m.name}, {"outcomes", m.outcomes}, {"ops", ops}};
}

SideCondition cond_from_json(const json& j) {
  std::string t = j["type"].get<std::string>();
  if (t == "meas_eq") return MeasEqCond{meas_from_json(j["m1"]), meas_from_json(j["m2"])};
  if (t == "meas_loop_eq") {
    MeasLoopEqCond c{meas_from_json(j["m1"]), {}, meas_from_json(j["m2"]), {}};
    c.p1 = parse_program(j["body1"].get<std::string>());
    c.p2 = parse_program(j["body2"].get<std::string>());
    return c;
  }
  if (t == "separability") {
    SeparabilityCond c;
    for (const auto& part : j["partition"]) {
      std::vector<std::string> p;
      for (const auto& n : part) p.push_back(n.get<std::string>());
      c.partition.push_back(p);
    }
    return c;
  }
  throw std::invalid_argument("unknown condition type " + t);
}

json cond_to_json(const SideCondition& c) {
  if (const auto* m = std::get_if<MeasEqCond>(&c))
    return json{{"type", "meas_eq"}, {"m1", meas_to_json(m->m1)}, {"m2", meas_to_json(m->m2)}};
  if (const auto* l = std::get_if<MeasLoopEqCond>(&c))
    return json{{"type", "meas_loop_eq"},
                {"m1", meas_to_json(l->m1)},
                {"body1", pretty(l->p1)},
                {"m2", meas_to_json(l->m2)},
                {"body2", pretty(l->p2)}};
  const auto& s = std::get<SeparabilityCond>(c);
  return json{{"type", "separability"}, {"partition", s.partition}};
}

OutlineStep step_from_json(const json& j, std::vector<Register>& ctx1,
                           std::vector<Register>& ctx2);

std::vector<OutlineStep> steps_from_json(const json& j, std::vector<Register> ctx1,
                                         std::vector<Register> ctx2) {
  std::vector<OutlineStep> out;
  for (const auto& e : j) out.push_back(step_from_json(e, ctx1, ctx2));
  return out;
}

OutlineStep step_from_json(const json& j, std::vector<Register>& ctx1,
                           std::vector<Register>& ctx2) {
  OutlineStep s;
  s.rule = rule_name_from_str(j["rule"].get<std::string>());
  if (j.contains("frag1") && !j["frag1"].is_null())
    s.frag1 = parse_program(j["frag1"].get<std::string>());
  if (j.contains("frag2") && !j["frag2"].is_null())
    s.frag2 = parse_program(j["frag2"].get<std::string>());
  s.pre = matrix_from_json(j["pre"]);
  s.post = matrix_from_json(j["post"]);
  if (j.contains("conditions"))
    for (const auto& c : j["conditions"]) s.conditions_after.push_back(cond_from_json(c));
  if (j.contains("branch_posts"))
    for (const auto& b : j["branch_posts"]) s.branch_posts.push_back(matrix_from_json(b));
  if (j.contains("pair_posts"))
    for (const auto& p : j["pair_posts"])
      s.pair_posts[{p["m"].get<int>(), p["n"].get<int>()}] = matrix_from_json(p["post"]);
  if (j.contains("invariant_a")) s.loop_invariant_a = matrix_from_json(j["invariant_a"]);
  if (j.contains("invariant_b")) s.loop_invariant_b = matrix_from_json(j["invariant_b"]);
  if (j.contains("branches"))
    for (const auto& b : j["branches"]) s.branch_steps.push_back(steps_from_json(b, ctx1, ctx2));
  if (j.contains("body")) s.body_steps = steps_from_json(j["body"], ctx1, ctx2);
  if (s.frag1) ctx1 = validate_program(SourceProgram{ctx1, s.frag1->prog});
  if (s.frag2) ctx2 = validate_program(SourceProgram{ctx2, s.frag2->prog});
  return s;
}

json step_to_json(const OutlineStep& s, std::vector<Register>& ctx1,
                  std::vector<Register>& ctx2);

json steps_to_json(const std::vector<OutlineStep>& steps, std::vector<Register> ctx1,
                   std::vector<Register> ctx2) {
  json out = json::array();
  for (const auto& s : steps) out.push_back(step_to_json(s, ctx1, ctx2));
  return out;
}

json step_to_json(const OutlineStep& s, std::vector<Register>& ctx1,
                  std::vector<Register>& ctx2) {
  json j{{"rule", rule_name_str(s.rule)},
         {"pre", matrix_to_json(s.pre)},
         {"post", matrix_to_json(s.post)}};
  if (s.frag1) j["frag1"] = pretty(SourceProgram{ctx1, s.frag1->prog});
  if (s.frag2) j["frag2"] = pretty(SourceProgram{ctx2, s.frag2->prog});
  if (!s.conditions_after.empty()) {
    json cs = json::array();
    for (const auto& c : s.conditions_after) cs.push_back(cond_to_json(c));
    j["conditions"] = cs;
  }
  if (!s.branch_posts.empty()) {
    json bs = json::array();
    for (const auto& b : s.branch_posts) bs.push_back(matrix_to_json(b));
    j["branch_posts"] = bs;
  }
  if (!s.pair_posts.empty()) {
    json ps = json::array();
    for (const auto& [mn, b] : s.pair_posts)
      ps.push_back({{"m", mn.first}, {"n", mn.second}, {"post", matrix_to_json(b)}});
    j["pair_posts"] = ps;
  }
  if (s.loop_invariant_a.rows()) j["invariant_a"] = matrix_to_json(s.loop_invariant_a);
  if (s.loop_invariant_b.rows()) j["invariant_b"] = matrix_to_json(s.loop_invariant_b);
  if (!s.branch_steps.empty()) {
    json bs = json::array();
    for (const auto& chain : s.branch_steps) bs.push_back(steps_to_json(chain, ctx1, ctx2));
    j["branches"] = bs;
  }
  if (!s.body_steps.empty()) j["body"] = steps_to_json(s.body_steps, ctx1, ctx2);
  if (s.frag1) ctx1 = validate_program(SourceProgram{ctx1, s.frag1->prog});
  if (s.frag2) ctx2 = validate_program(SourceProgram{ctx2, s.frag2->prog});
  return j;
}

}  // namespace

ProofOutline outline_from_json(const json& j) {
  ProofOutline o;
  o.regs1 = regs_from_json(j["registers1"]);
  o.regs2 = regs_from_json(j["registers2"]);
  if (j.contains("projective")) o.projective = j["projective"].get<bool>();
  o.steps = steps_from_json(j["steps"], o.regs1, o.regs2);
  return o;
}

json outline_to_json(const ProofOutline& o) {
  return json{{"registers1", regs_to_json(o.regs1)},
              {"registers2", regs_to_json(o.regs2)},
              {"projective", o.projective},
              {"steps", steps_to_json(o.steps, o.regs1, o.regs2)}};
}

}  // namespace rqpd
