#ifndef RQPD_RULES_HPP
#define RQPD_RULES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqpd/judgment.hpp"
#include "rqpd/matrix.hpp"
#include "rqpd/qwhile.hpp"

namespace rqpd {

enum class RuleName {
  // two-sided construct rules
  Skip, Init, UT, SO, IF, IFw, IF1, LP, LP1,
  // one-sided variants (left / right)
  InitL, InitR, UTL, UTR, SOL, SOR, IFL, IFR, IF1L, IF1R, LPL, LPR, LP1L, LP1R,
  // structural
  Conseq, Weaken, Case, Frame,
  // projective counterparts
  InitP, InitPL, InitPR, UTP, SOP, SOPL, SOPR, IFP, IFPL, IFPR, LPP, LPPL, LPPR,
  ConseqP, SkipP,
};

std::string rule_name_str(RuleName r);
RuleName rule_name_from_str(const std::string& s);
bool rule_is_projective(RuleName r);

// Discharge obligations a rule instance generates alongside its transformed
// predicate.
struct Obligation {
  enum class Kind {
    Loewner,           // payload: lhs <= rhs
    Losslessness,      // payload: program
    MeasJudgment,      // M1 ~ M2 |= A => {B_m} (or one-sided)
    ProjMeasCondition, // |=_P M1 ~ M2 : A => {B_m}
    CoupleEntailment,  // Gamma |=^{(P1,P2)} Delta
    Separability,      // recorded condition (Frame)
    ProbabilitySum,    // Case: weights form a distribution
  };
  Kind kind;
  std::string describe;

  // payloads (used per kind)
  Mat lhs, rhs;                      // Loewner
  std::optional<SourceProgram> program;  // Losslessness
  Measurement m1, m2;
  bool one_sided = false;
  OneSide side = OneSide::Left;
  Mat pre;
  std::vector<Mat> branch_posts;
  std::vector<SideCondition> gamma_from, delta_to;  // CoupleEntailment
  std::optional<SourceProgram> ce_p1, ce_p2;
  std::vector<double> probs;  // ProbabilitySum
};

enum class DischargeMethod { Analytic, JudgmentEngine, Semantics, Assumed };

struct DischargeResult {
  bool ok = false;
  DischargeMethod method = DischargeMethod::Analytic;
  double residual = 0.0;
  std::string note;
};

struct OutlinePolicy {
  bool assume_lossless = false;  // record losslessness premises as assumptions
  SamplerOptions sampler;        // for empirical obligations
};

DischargeResult discharge(const Obligation& ob, const std::vector<Register>& regs1,
                          const std::vector<Register>& regs2, const OutlinePolicy& policy);

// --- proof outlines ----------------------------------------------------------

// One step of a linear outline: a rule applied to a pair of statements (each
// side possibly empty for one-sided/structural rules), with the claimed
// pre/post and the side conditions claimed to hold at the step's OUTPUT
// interface. Branch rules carry nested outlines per branch.
struct OutlineStep {
  RuleName rule;
  std::optional<SourceProgram> frag1, frag2;  // absent = no program consumed
  Mat pre, post;
  std::vector<SideCondition> conditions_after;

  // payloads
  std::vector<Mat> branch_posts;            // IF1/IFw/IF-L/...: B_m per outcome
  std::map<std::pair<int, int>, Mat> pair_posts;  // IF: B_{mn} for (m,n) in S
  Mat loop_invariant_a, loop_invariant_b;   // LP family: (A, B)
  std::vector<std::vector<OutlineStep>> branch_steps;  // nested derivations
  std::vector<OutlineStep> body_steps;      // loop bodies
  std::vector<double> case_probs;           // Case
  std::vector<Mat> case_pres;
  std::vector<std::vector<OutlineStep>> case_steps;
  Mat frame_predicate;                      // Frame: C
  std::vector<Register> frame_registers;    // V (tagged)
  std::vector<OutlineStep> inner_steps;     // Frame: inner derivation
};

struct ProofOutline {
  std::vector<Register> regs1, regs2;  // input spaces of the two programs
  std::vector<OutlineStep> steps;
  bool projective = false;
};

struct StepReport {
  std::string rule;
  bool predicate_ok = false;
  double predicate_residual = 0.0;
  std::vector<std::pair<Obligation, DischargeResult>> obligations;
  bool ok = false;
  std::string note;
};

struct OutlineReport {
  bool ok = false;
  std::vector<StepReport> steps;
  // the concluded judgment when ok
  std::optional<Judgment> conclusion;
  std::string note;
};

OutlineReport check_outline(const ProofOutline& outline, const OutlinePolicy& policy);

// Recompute one step's precondition from its postcondition (forward for the
// projective creation/SO rules). Returns the derived predicate and emits the
// step's obligations.
Mat step_precondition(const OutlineStep& step, const std::vector<Register>& regs1,
                      const std::vector<Register>& regs2, std::vector<Obligation>& obligations);

// --- qPD (single program, partial correctness) -------------------------------

enum class QpdRule { AxSk, AxInit, AxUT, RIF, RLP, ROr, RSO };

struct QpdStep {
  QpdRule rule;
  std::optional<SourceProgram> frag;
  Mat pre, post;
  std::vector<Mat> branch_pres;              // R.IF: A_m
  std::vector<std::vector<QpdStep>> branch_steps;
  Mat loop_invariant_a, loop_invariant_b;    // R.LP
  std::vector<QpdStep> body_steps;
};

struct QpdReport {
  bool ok = false;
  Mat precondition;
  std::vector<std::string> notes;
  std::vector<std::pair<Obligation, DischargeResult>> obligations;
};

// Check a backward qPD derivation for a single program; post is the final
// postcondition, steps run in program order.
QpdReport qpd_wp(const std::vector<QpdStep>& steps, const std::vector<Register>& regs,
                 const Mat& post, const OutlinePolicy& policy);

// JSON (de)serialization of outlines for the CLI `prove` verb.
ProofOutline outline_from_json(const nlohmann::json& j);
nlohmann::json outline_to_json(const ProofOutline& outline);

}  // namespace rqpd

#endif
