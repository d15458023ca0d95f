#ifndef RQPD_QWHILE_HPP
#define RQPD_QWHILE_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rqpd/matrix.hpp"

namespace rqpd {

struct Register {
  std::string name;
  int dim = 2;
  bool operator==(const Register&) const = default;
};

// Outcome-labeled measurement; completeness sum M_m^dag M_m = I is checked
// when a program is validated.
struct Measurement {
  std::string name;  // optional display name
  std::vector<int> outcomes;
  std::vector<Mat> ops;
};

struct Program;
using ProgramPtr = std::shared_ptr<const Program>;

struct Program {
  enum class Kind { Skip, Seq, Init, Unitary, IfMeas, WhileMeas, ApplySuper, TraceOut };
  Kind kind = Kind::Skip;

  ProgramPtr first, second;  // Seq

  std::string reg;  // Init / TraceOut

  std::vector<std::string> regs;  // Unitary targets (tensor order = list order)
  Mat unitary;
  std::string gate_name;  // display only

  Measurement meas;                 // IfMeas / WhileMeas
  std::vector<ProgramPtr> branches; // IfMeas, aligned with meas.outcomes
  ProgramPtr body;                  // WhileMeas

  std::vector<std::string> regs_in, regs_out;  // ApplySuper
  std::vector<Mat> kraus;
  std::string super_name;  // display only

  static ProgramPtr skip();
  static ProgramPtr seq(ProgramPtr a, ProgramPtr b);
  static ProgramPtr init(std::string reg);
  static ProgramPtr unit(std::vector<std::string> regs, Mat u, std::string name = "");
  static ProgramPtr if_meas(Measurement m, std::vector<ProgramPtr> branches);
  static ProgramPtr while_meas(Measurement m, ProgramPtr body);
  static ProgramPtr apply_super(std::vector<std::string> in, std::vector<std::string> out,
                                std::vector<Mat> kraus, std::string name = "");
  static ProgramPtr trace_out(std::string reg);
  // register creation: |0> of the given dim enters the space
  static ProgramPtr alloc(const Register& r);
};

// A program together with its input register declaration. Registers created
// by `new` statements are not part of the input space.
struct SourceProgram {
  std::vector<Register> registers;
  ProgramPtr prog;

  int input_dim() const {
    int d = 1;
    for (const auto& r : registers) d *= r.dim;
    return d;
  }
};

// Positioned parse error.
struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

// Parse the concrete syntax. Validates all AST invariants (unitarity,
// measurement completeness, register discipline) as it goes; failures are
// positioned ParseErrors.
SourceProgram parse_program(const std::string& text);

// Canonical text form; parse(pretty(p)) is structurally identical to p.
std::string pretty(const SourceProgram& p);

// Structural equality (exact on matrix entries).
bool programs_equal(const ProgramPtr& a, const ProgramPtr& b);
bool programs_equal(const SourceProgram& a, const SourceProgram& b);

// Suffix every register name with @tag (tag is 1 or 2).
SourceProgram tag_copy(const SourceProgram& p, int tag);

// Registers appearing in a program (vars + created ones), in first-use order.
std::vector<std::string> used_registers(const ProgramPtr& p);

// Validate AST invariants against a register context; throws ParseError-free
// std::invalid_argument on violations. Returns the output register list
// (ApplySuper/TraceOut/alloc change it).
std::vector<Register> validate_program(const SourceProgram& p);

}  // namespace rqpd

#endif
