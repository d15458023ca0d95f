#ifndef RQPD_CASEBOOK_HPP
#define RQPD_CASEBOOK_HPP

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqpd/judgment.hpp"
#include "rqpd/matrix.hpp"
#include "rqpd/qwhile.hpp"
#include "rqpd/rules.hpp"

namespace rqpd {

struct ScenarioOptions {
  std::uint64_t seed = 0;
  int samples = 60;      // sampled-check budget per judgment
  double tol = 1e-6;
  bool serial = false;
};

struct CheckResult {
  std::string name;
  std::string status;  // "pass" | "fail" | "inconclusive"
  double residual = 0.0;
  std::string note;
  std::string provenance;  // where the expected value comes from
};

struct Report {
  std::string scenario;
  std::vector<CheckResult> checks;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  bool ok() const {
    for (const auto& c : checks)
      if (c.status == "fail") return false;
    return true;
  }
  bool inconclusive() const {
    for (const auto& c : checks)
      if (c.status == "inconclusive") return true;
    return false;
  }
};

nlohmann::json report_to_json(const Report& r);

struct Scenario {
  std::string id;
  std::string description;
  std::function<Report(const ScenarioOptions&)> run;
  // writes a self-contained .qw/.json fixture tree under dir
  std::function<void(const std::string& dir)> export_fixture;
};

const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& id);
Report run_scenario(const std::string& id, const ScenarioOptions& opt);

// Paper fixtures shared with the tests.
namespace fixtures {

Mat gate_X();
Mat gate_Y();
Mat gate_Z();
Mat gate_H();
Mat gate_CNOT();
Mat balanced_coin_Y();  // (1/sqrt2) [[1, i],[i, 1]]

Measurement comp_basis_meas(int d = 2);   // {|i><i|}
Measurement pm_basis_meas();              // {|+><+|, |-><-|}

// working example (Example 1.1), untagged single-qubit programs
SourceProgram we_p1();
SourceProgram we_p2();
SourceProgram we_q1();
SourceProgram we_q2();
Judgment we_judgment();               // |- P1 ~ P2 : =_B => =_sym (tagged)
ProofOutline we_outline();            // the full proof-outline figure
ProofOutline we_outline_weak_if();    // the (IF)-based variant; Conseq must fail

// quantum Bernoulli factory
SourceProgram qbf(const Mat& u, bool with_trace_out);
Judgment qbf_uniform_judgment(const Mat& u, const Mat& psi_ket);

// teleportation
SourceProgram qtel();
enum class Noise { BitFlip, PhaseFlip, BitPhaseFlip };
SourceProgram qtel_noisy(Noise kind, double p);
ProofOutline qtel_outline_eqB(double theta);  // =_B for the rotated basis
ProofOutline qtel_outline_sym();
// noise outline concluding E_PF(p')(psi)(x)psi => psi(x)psi
ProofOutline qtel_noise_outline(Noise kind, double p, const Mat& psi_ket);

// quantum one-time pad
SourceProgram qotp(int n, bool with_dec, bool discard_key);
ProofOutline qotp_correct_outline();  // n = 1
ProofOutline qotp_secure_outline(const Mat& psi_ket);

// quantum walks (position space 0..n)
SourceProgram qwalk(const Mat& coin, int n);
Mat qwalk_relator(int n);     // U with |d,i> -> (-i)^{i+d+3}|d,i>
Mat qwalk_sym_boundary(int n);  // =_sym^p on the position pair space
ProofOutline qwalk_outline(int n);

// uniformity (Prop. 6.2 clauses)
SourceProgram uniform_channel_program(int d);  // q := E[q], E(rho) = tr(rho) I/d

}  // namespace fixtures

}  // namespace rqpd

#endif
