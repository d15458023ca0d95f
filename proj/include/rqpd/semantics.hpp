#ifndef RQPD_SEMANTICS_HPP
#define RQPD_SEMANTICS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rqpd/matrix.hpp"
#include "rqpd/qwhile.hpp"

namespace rqpd {

// <P, rho> with its register context; remaining == nullptr means terminated.
struct Configuration {
  ProgramPtr remaining;
  std::vector<Register> regs;
  Mat state;
};

// One small-step transition per Fig.-3.1-style rules; states stay
// unnormalized (Selinger convention), labels carry measurement outcomes.
std::vector<std::pair<std::string, Configuration>> step(const Configuration& c);

struct BranchNode {
  std::string label;
  double weight = 0.0;  // trace of the unnormalized state
  Configuration config;
  std::vector<BranchNode> children;
};

// Probabilistic branching tree to the given depth; subtrees below the prune
// weight are dropped.
BranchNode branch_tree(Configuration root, int depth, double prune = 1e-12);

// Sum of states at terminated leaves (the operational semantics, truncated).
Mat sum_terminated_leaves(const BranchNode& t);
// Weight profile of terminated leaves keyed by their outcome traces.
void collect_leaf_weights(const BranchNode& t, const std::string& prefix,
                          std::vector<std::pair<std::string, double>>& out);

struct LoopDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The semantic function of a program: completely positive and
// trace-nonincreasing from the input register space to the output one.
// Evaluation is operational (statement by statement, loops by closed-form
// resolvent or truncated series); the vectorized matrix and a canonical
// Kraus set are materialized lazily.
class SemanticFn {
 public:
  explicit SemanticFn(SourceProgram p);
  // wrap an explicit Kraus map (used for duals and tests)
  SemanticFn(std::vector<Register> regs_in, std::vector<Register> regs_out,
             std::vector<Mat> kraus, bool skip_validation = false);

  const std::vector<Register>& regs_in() const;
  const std::vector<Register>& regs_out() const;
  int dim_in() const;
  int dim_out() const;

  Mat apply(const Mat& rho) const;
  const Mat& matrix() const;               // dim_out^2 x dim_in^2
  const std::vector<Mat>& kraus() const;   // canonical, from the Choi matrix
  Mat choi() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

SemanticFn denote(const SourceProgram& p);

// Dual map on observables: tr(A E(rho)) = tr(E*(A) rho) for all A, rho.
SemanticFn dual(const SemanticFn& e);

// Backward observable transformer E*(A) computed structurally (no matrix
// materialization); A lives on the program's output space.
Mat dual_apply(const SourceProgram& p, const Mat& post);

struct LoopCertificate {
  double eigenvalue_modulus = 0.0;  // peripheral eigenvalue |lambda| >= 1-1e-8
  double eigenvector_trace = 0.0;   // |tr X| of its eigenvector, vs tracelessness
  bool traceless = true;
};

struct LosslessReport {
  bool lossless = false;
  double trace_defect = 0.0;  // max-norm of E*(I) - I
  std::vector<LoopCertificate> loop_certificates;
  std::string note;
};

LosslessReport is_lossless(const SourceProgram& p);

}  // namespace rqpd

#endif
