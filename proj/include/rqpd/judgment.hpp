#ifndef RQPD_JUDGMENT_HPP
#define RQPD_JUDGMENT_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rqpd/matrix.hpp"
#include "rqpd/qwhile.hpp"
#include "rqpd/semantics.hpp"

namespace rqpd {

// --- side conditions -------------------------------------------------------

// M1 ~ M2: equal outcome distributions on the two marginals.
struct MeasEqCond {
  Measurement m1, m2;
};

// (M1,P1) ~ (M2,P2): equal guard distributions through loop iterations;
// checked for n <= d1^2 + d2^2 - 1 which is exhaustive by Cayley-Hamilton.
struct MeasLoopEqCond {
  Measurement m1;
  SourceProgram p1;  // loop body on the left program's space
  Measurement m2;
  SourceProgram p2;
};

// separability across a partition of the tagged registers
struct SeparabilityCond {
  std::vector<std::vector<std::string>> partition;
};

using SideCondition = std::variant<MeasEqCond, MeasLoopEqCond, SeparabilityCond>;

// --- judgments -------------------------------------------------------------

// Gamma |- P1 ~ P2 : pre => post, with pre/post on the product of the two
// programs' input spaces (P1's registers first). Register names of the two
// programs must be disjoint; use tag_copy.
struct Judgment {
  std::vector<SideCondition> gamma;
  SourceProgram p1, p2;
  Mat pre, post;
};

struct SamplerOptions {
  int count = 200;
  std::uint64_t seed = 0;
  bool pure_only = false;
  bool include_battery = true;
  double violation_tol = 1e-5;
};

enum class VerdictStatus { Falsified, Passed, Inconclusive };

struct Verdict {
  VerdictStatus status = VerdictStatus::Inconclusive;
  std::optional<Mat> counterexample;
  int samples_used = 0;
  double worst_margin = 0.0;
  std::string note;
};

// --- direct condition checks ------------------------------------------------

bool check_meas_eq(const MeasEqCond& c, const Mat& rho, int d1, int d2, double tol = 1e-8);
bool check_meas_loop_eq(const MeasLoopEqCond& c, const Mat& rho, double tol = 1e-8);

struct MeasJudgmentReport {
  bool precondition_ok = false;  // rho |= M1 ~ M2 (two-sided case)
  bool holds = false;
  double margin = 0.0;  // sum of coupling maxima - tr(A rho)
  std::string note;
};

// Two-sided: M1 ~ M2 |= A => {B_m}. Bs aligned with m1.outcomes.
MeasJudgmentReport check_meas_judgment(const Measurement& m1, const Measurement& m2,
                                       const Mat& a, const std::vector<Mat>& bs,
                                       const Mat& rho, int d1, int d2);

enum class OneSide { Left, Right };
// One-sided: M1 ~ I2 |= A => {B_m} (or I1 ~ M2 with side = Right).
MeasJudgmentReport check_meas_judgment_one_sided(const Measurement& m, OneSide side,
                                                 const Mat& a, const std::vector<Mat>& bs,
                                                 const Mat& rho, int d1, int d2);

enum class TriState { Yes, No, RelaxationPassed };
TriState check_separability(const SeparabilityCond& c, const Mat& rho,
                            const std::vector<Register>& product_regs);

// --- sampled verdicts -------------------------------------------------------

// Def. 5.1 falsification harness: sound on Falsified, sampled on Passed.
Verdict check_judgment(const Judgment& j, const SamplerOptions& opt);

// Eq.-(5) margin at one input: best coupling value + tr(rho) - tr(sigma) -
// tr(pre rho); negative beyond tolerance falsifies the judgment at rho.
double judgment_margin(const Judgment& j, const Mat& rho);

// Projective validity (Def. 7.1): pre/post must be projectors.
Verdict check_projective_judgment(const SourceProgram& p1, const SourceProgram& p2,
                                  const Mat& a, const Mat& b, const SamplerOptions& opt);

// Projective measurement condition |=_P M1 ~ M2 : A => {B_m}.
Verdict check_proj_meas_condition(const Measurement& m1, const Measurement& m2, const Mat& a,
                                  const std::vector<Mat>& bs, int d1, int d2,
                                  const SamplerOptions& opt);

// Couple-entailment Gamma |=^{(P1,P2)} Delta for measurement-condition
// consequents (their satisfaction depends only on a coupling's marginals).
Verdict check_couple_entailment(const std::vector<SideCondition>& gamma,
                                const std::vector<SideCondition>& delta,
                                const SourceProgram& p1, const SourceProgram& p2,
                                const SamplerOptions& opt);

// --- constrained input sampling ---------------------------------------------

// Draw states on the product input space satisfying Gamma. Deterministic in
// (opt.seed, index). Returns fewer than opt.count states if constrained
// sampling kept failing; `approximate` reports when rejection/projection
// heuristics were involved (mixed measurement + separability conditions).
struct SampleSet {
  std::vector<Mat> states;
  bool approximate = false;
  std::string note;
};
SampleSet sample_constrained_inputs(const std::vector<SideCondition>& gamma,
                                    const std::vector<Register>& regs1,
                                    const std::vector<Register>& regs2,
                                    const SamplerOptions& opt);

}  // namespace rqpd

#endif
