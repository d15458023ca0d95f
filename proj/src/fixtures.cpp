#include <cmath>
#include <functional>

#include "rqpd/casebook.hpp"
#include "rqpd/operator_core.hpp"
#include "rqpd/semantics.hpp"

namespace rqpd::fixtures {

namespace {

ProgramPtr make_if(Measurement m, std::vector<std::string> regs,
                   std::vector<ProgramPtr> branches) {
  auto p = Program::if_meas(std::move(m), std::move(branches));
  std::const_pointer_cast<Program>(p)->regs = std::move(regs);
  return p;
}

ProgramPtr make_while(Measurement m, std::vector<std::string> regs, ProgramPtr body) {
  auto p = Program::while_meas(std::move(m), std::move(body));
  std::const_pointer_cast<Program>(p)->regs = std::move(regs);
  return p;
}

Mat embed(const Mat& op, const std::vector<Register>& regs,
          const std::vector<std::string>& names) {
  std::vector<int> dims, pos;
  for (const auto& r : regs) dims.push_back(r.dim);
  for (const auto& n : names) {
    int idx = -1;
    for (std::size_t i = 0; i < regs.size(); ++i)
      if (regs[i].name == n) idx = int(i);
    pos.push_back(idx);
  }
  return embed_on(op, SpaceShape(dims), pos);
}

std::vector<Register> cat(const std::vector<Register>& a, const std::vector<Register>& b) {
  auto out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Mat gate_X() {
  Mat m(2, 2);
  m(0, 1) = m(1, 0) = 1;
  return m;
}
Mat gate_Y() {
  Mat m(2, 2);
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}
Mat gate_Z() {
  Mat m(2, 2);
  m(0, 0) = 1;
  m(1, 1) = -1;
  return m;
}
Mat gate_H() {
  Mat m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m(0, 0) = m(0, 1) = m(1, 0) = s;
  m(1, 1) = -s;
  return m;
}
Mat gate_CNOT() {
  Mat m = Mat::identity(4);
  m(2, 2) = m(3, 3) = 0;
  m(2, 3) = m(3, 2) = 1;
  return m;
}
Mat balanced_coin_Y() {
  Mat m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m(0, 0) = m(1, 1) = s;
  m(0, 1) = m(1, 0) = cplx(0, s);
  return m;
}

Measurement comp_basis_meas(int d) {
  Measurement m;
  m.name = "M";
  for (int i = 0; i < d; ++i) {
    m.outcomes.push_back(i);
    m.ops.push_back(Mat::ketbra(d, i, i));
  }
  return m;
}

Measurement pm_basis_meas() {
  Measurement m;
  m.name = "Mp";
  m.outcomes = {0, 1};
  Mat plus(2, 2), minus(2, 2);
  plus(0, 0) = plus(0, 1) = plus(1, 0) = plus(1, 1) = 0.5;
  minus(0, 0) = minus(1, 1) = 0.5;
  minus(0, 1) = minus(1, 0) = -0.5;
  m.ops = {plus, minus};
  return m;
}

// ---------- working example ----------

namespace {
SourceProgram we_program(bool p1, bool only_q) {
  std::vector<Register> regs{{"q", 2}};
  auto M = comp_basis_meas();
  auto Mp = pm_basis_meas();
  ProgramPtr ifpart;
  if (p1) {
    ifpart = make_if(M, {"q"},
                     {Program::unit({"q"}, gate_X(), "X"), Program::unit({"q"}, gate_H(), "H")});
  } else {
    ifpart = make_if(Mp, {"q"},
                     {Program::unit({"q"}, gate_Z(), "Z"), Program::unit({"q"}, gate_H(), "H")});
  }
  ProgramPtr prog;
  if (only_q) {
    prog = ifpart;
  } else if (p1) {
    prog = Program::seq(Program::seq(Program::init("q"), Program::unit({"q"}, gate_H(), "H")),
                        ifpart);
  } else {
    prog = Program::seq(Program::seq(Program::init("q"), ifpart),
                        Program::unit({"q"}, gate_H(), "H"));
  }
  return SourceProgram{regs, prog};
}
}  // namespace

SourceProgram we_p1() { return we_program(true, false); }
SourceProgram we_p2() { return we_program(false, false); }
SourceProgram we_q1() { return we_program(true, true); }
SourceProgram we_q2() { return we_program(false, true); }

Judgment we_judgment() {
  Judgment j;
  j.p1 = tag_copy(we_p1(), 1);
  j.p2 = tag_copy(we_p2(), 2);
  Mat eqB(4, 4);
  eqB(0, 0) = eqB(3, 3) = 1;
  j.pre = eqB;
  j.post = sym_projector(2);
  return j;
}

namespace {

struct WePieces {
  std::vector<Register> regs1{{"q@1", 2}}, regs2{{"q@2", 2}};
  Mat I4 = Mat::identity(4);
  Mat eqB = [] {
    Mat m(4, 4);
    m(0, 0) = m(3, 3) = 1;
    return m;
  }();
  Mat S = swap_operator(2);
  Mat sym = sym_projector(2);
  Mat B, A00, A01, A10, A11;
  Measurement m_comp = comp_basis_meas();
  Measurement m_pm = pm_basis_meas();

  WePieces() {
    Mat IH = tensor(Mat::identity(2), gate_H());
    B = (I4 + IH * S * IH) * cplx(0.5, 0.0);
    auto conj = [&](const Mat& u1, const Mat& u2) {
      Mat u = tensor(u1, u2);
      return (u.dagger() * B * u).hermitize();
    };
    A00 = conj(gate_X(), gate_Z());
    A01 = conj(gate_X(), gate_H());
    A10 = conj(gate_H(), gate_Z());
    A11 = conj(gate_H(), gate_H());
  }

  SourceProgram frag_init1() { return {regs1, Program::init("q@1")}; }
  SourceProgram frag_init2() { return {regs2, Program::init("q@2")}; }
  SourceProgram frag_h1() { return {regs1, Program::unit({"q@1"}, gate_H(), "H")}; }
  SourceProgram frag_h2() { return {regs2, Program::unit({"q@2"}, gate_H(), "H")}; }
  SourceProgram frag_if1() {
    return {regs1, make_if(m_comp, {"q@1"},
                           {Program::unit({"q@1"}, gate_X(), "X"),
                            Program::unit({"q@1"}, gate_H(), "H")})};
  }
  SourceProgram frag_if2() {
    return {regs2, make_if(m_pm, {"q@2"},
                           {Program::unit({"q@2"}, gate_Z(), "Z"),
                            Program::unit({"q@2"}, gate_H(), "H")})};
  }
  SourceProgram frag_u1(const Mat& u, const std::string& n) {
    return {regs1, Program::unit({"q@1"}, u, n)};
  }
  SourceProgram frag_u2(const Mat& u, const std::string& n) {
    return {regs2, Program::unit({"q@2"}, u, n)};
  }

  OutlineStep ut_pair(const Mat& u1, const Mat& u2, const Mat& pre, const Mat& post) {
    OutlineStep s;
    s.rule = RuleName::UT;
    s.frag1 = frag_u1(u1, "");
    s.frag2 = frag_u2(u2, "");
    s.pre = pre;
    s.post = post;
    return s;
  }
};

}  // namespace

ProofOutline we_outline() {
  WePieces w;
  ProofOutline o;
  o.regs1 = w.regs1;
  o.regs2 = w.regs2;

  OutlineStep conseq;
  conseq.rule = RuleName::Conseq;
  conseq.pre = w.eqB;
  conseq.post = w.I4;

  OutlineStep init;
  init.rule = RuleName::Init;
  init.frag1 = w.frag_init1();
  init.frag2 = w.frag_init2();
  init.pre = w.I4;
  init.post = w.I4;
  init.conditions_after = {MeasEqCond{w.m_pm, w.m_pm}};

  OutlineStep utl;
  utl.rule = RuleName::UTL;
  utl.frag1 = w.frag_h1();
  utl.pre = w.I4;
  utl.post = w.I4;
  utl.conditions_after = {MeasEqCond{w.m_comp, w.m_pm}};

  OutlineStep if1;
  if1.rule = RuleName::IF1;
  if1.frag1 = w.frag_if1();
  if1.frag2 = w.frag_if2();
  if1.pre = w.I4;
  if1.post = w.B;
  if1.branch_posts = {w.A00, w.A11};
  if1.branch_steps = {{w.ut_pair(gate_X(), gate_Z(), w.A00, w.B)},
                      {w.ut_pair(gate_H(), gate_H(), w.A11, w.B)}};

  OutlineStep utr;
  utr.rule = RuleName::UTR;
  utr.frag2 = w.frag_h2();
  utr.pre = w.B;
  utr.post = w.sym;

  o.steps = {conseq, init, utl, if1, utr};
  return o;
}

ProofOutline we_outline_weak_if() {
  WePieces w;
  ProofOutline o;
  o.regs1 = w.regs1;
  o.regs2 = w.regs2;

  // the (IF)-derived precondition: 7/8 on the diagonal with +-1/8 couplings
  Mat a_if(4, 4);
  {
    auto add = [&](int m, int n, const Mat& amn) {
      Mat mm = tensor(w.m_comp.ops[m], w.m_pm.ops[n]);
      a_if += mm.dagger() * amn * mm;
    };
    add(0, 0, w.A00);
    add(0, 1, w.A01);
    add(1, 0, w.A10);
    add(1, 1, w.A11);
  }
  Mat hi = tensor(gate_H(), Mat::identity(2));
  Mat mid = (hi * a_if * hi).hermitize();

  OutlineStep conseq;
  conseq.rule = RuleName::Conseq;
  conseq.pre = w.eqB;  // =_B is not below (7/8) I (x) I: this must fail
  conseq.post = Mat::identity(4) * cplx(7.0 / 8.0, 0.0);

  OutlineStep init;
  init.rule = RuleName::Init;
  init.frag1 = w.frag_init1();
  init.frag2 = w.frag_init2();
  init.pre = Mat::identity(4) * cplx(7.0 / 8.0, 0.0);
  init.post = mid;

  OutlineStep utl;
  utl.rule = RuleName::UTL;
  utl.frag1 = w.frag_h1();
  utl.pre = mid;
  utl.post = a_if;

  OutlineStep ifstep;
  ifstep.rule = RuleName::IF;
  ifstep.frag1 = w.frag_if1();
  ifstep.frag2 = w.frag_if2();
  ifstep.pre = a_if;
  ifstep.post = w.B;
  ifstep.pair_posts[{0, 0}] = w.A00;
  ifstep.pair_posts[{0, 1}] = w.A01;
  ifstep.pair_posts[{1, 0}] = w.A10;
  ifstep.pair_posts[{1, 1}] = w.A11;
  ifstep.branch_steps = {{w.ut_pair(gate_X(), gate_Z(), w.A00, w.B)},
                         {w.ut_pair(gate_X(), gate_H(), w.A01, w.B)},
                         {w.ut_pair(gate_H(), gate_Z(), w.A10, w.B)},
                         {w.ut_pair(gate_H(), gate_H(), w.A11, w.B)}};

  OutlineStep utr;
  utr.rule = RuleName::UTR;
  utr.frag2 = w.frag_h2();
  utr.pre = w.B;
  utr.post = w.sym;

  o.steps = {conseq, init, utl, ifstep, utr};
  return o;
}

// ---------- quantum Bernoulli factory ----------

SourceProgram qbf(const Mat& u, bool with_trace_out) {
  std::vector<Register> regs{{"qx", 2}, {"qy", 2}};
  Measurement m;
  m.name = "M";
  m.outcomes = {0, 1};
  Mat m0(4, 4), m1(4, 4);
  m0(1, 1) = m0(2, 2) = 1;  // values differ: stop
  m1(0, 0) = m1(3, 3) = 1;  // values equal: continue
  m.ops = {m0, m1};
  ProgramPtr body = Program::seq(Program::unit({"qx"}, u, "U"), Program::unit({"qy"}, u, "U"));
  ProgramPtr prog = Program::seq(
      Program::seq(Program::init("qx"), Program::init("qy")),
      make_while(m, {"qx", "qy"}, body));
  if (with_trace_out) prog = Program::seq(prog, Program::trace_out("qy"));
  return SourceProgram{regs, prog};
}

Judgment qbf_uniform_judgment(const Mat& u, const Mat& psi_ket) {
  Judgment j;
  j.p1 = tag_copy(qbf(u, true), 1);
  j.p2 = tag_copy(qbf(u, true), 2);
  j.pre = Mat::identity(16) * cplx(0.5, 0.0);
  j.post = tensor(psi_ket * psi_ket.dagger(), Mat::identity(2));
  return j;
}

// ---------- teleportation ----------

namespace {
std::vector<Register> tel_regs1() { return {{"p@1", 2}, {"q@1", 2}, {"r@1", 2}}; }
std::vector<Register> tel_regs2() { return {{"s@2", 2}}; }

ProgramPtr tel_core(const std::string& p, const std::string& q, const std::string& r,
                    std::vector<ProgramPtr> noise_after_hq, std::vector<ProgramPtr> noise_after_hp) {
  auto M = comp_basis_meas();
  ProgramPtr prog = Program::seq(Program::init(q), Program::init(r));
  prog = Program::seq(prog, Program::unit({q}, gate_H(), "H"));
  for (auto& n : noise_after_hq) prog = Program::seq(prog, n);
  prog = Program::seq(prog, Program::unit({q, r}, gate_CNOT(), "CNOT"));
  prog = Program::seq(prog, Program::unit({p, q}, gate_CNOT(), "CNOT"));
  prog = Program::seq(prog, Program::unit({p}, gate_H(), "H"));
  for (auto& n : noise_after_hp) prog = Program::seq(prog, n);
  prog = Program::seq(prog, make_if(M, {q}, {Program::skip(), Program::unit({r}, gate_X(), "X")}));
  prog = Program::seq(prog, make_if(M, {p}, {Program::skip(), Program::unit({r}, gate_Z(), "Z")}));
  return prog;
}

std::vector<Mat> noise_kraus(Noise kind, double p) {
  Mat e1;
  switch (kind) {
    case Noise::BitFlip: e1 = gate_X(); break;
    case Noise::PhaseFlip: e1 = gate_Z(); break;
    case Noise::BitPhaseFlip: e1 = gate_Y(); break;
  }
  return {Mat::identity(2) * cplx(std::sqrt(p), 0.0), e1 * cplx(std::sqrt(1 - p), 0.0)};
}
}  // namespace

SourceProgram qtel() {
  return SourceProgram{{{"p", 2}, {"q", 2}, {"r", 2}}, tel_core("p", "q", "r", {}, {})};
}

SourceProgram qtel_noisy(Noise kind, double p) {
  auto ks = noise_kraus(kind, p);
  auto nq = Program::apply_super({"q"}, {"q"}, ks, "E");
  auto np = Program::apply_super({"p"}, {"p"}, ks, "E");
  return SourceProgram{{{"p", 2}, {"q", 2}, {"r", 2}}, tel_core("p", "q", "r", {nq}, {np})};
}

namespace {

// shared teleport outline machinery: backward chain computed with dual_apply
struct TelOutlineBuilder {
  std::vector<Register> regs1 = tel_regs1();
  std::vector<Register> regs2 = tel_regs2();
  std::vector<Register> all = cat(tel_regs1(), tel_regs2());
  std::vector<OutlineStep> steps;  // built backward, reversed at the end

  // prepend a one-sided (left) step given its fragment; post = current pre
  Mat push_back_left(RuleName rule, SourceProgram frag, const Mat& post) {
    OutlineStep s;
    s.rule = rule;
    s.frag1 = std::move(frag);
    s.post = post;
    SourceProgram combined{all, s.frag1->prog};
    s.pre = dual_apply(combined, post).hermitize();
    steps.push_back(s);
    return steps.back().pre;
  }
};

}  // namespace

namespace {
ProofOutline qtel_outline_from(const Mat& equality_rs) {
  TelOutlineBuilder b;
  auto M = comp_basis_meas();
  Mat post = embed(equality_rs, b.all, {"r@1", "s@2"});

  // build backward from the final postcondition
  std::vector<OutlineStep> rev;
  Mat cur = post;
  auto add_ifl = [&](const std::string& mreg, const Mat& correction) {
    OutlineStep s;
    s.rule = RuleName::IFL;
    s.frag1 = SourceProgram{
        b.regs1, make_if(M, {mreg},
                         {Program::skip(), Program::unit({"r@1"}, correction, "")})};
    s.post = cur;
    Mat corr = embed(correction, b.all, {"r@1"});
    s.branch_posts = {cur, (corr.dagger() * cur * corr).hermitize()};
    // nested chains: skip branch is empty; the correction branch is one UT-L
    OutlineStep ut;
    ut.rule = RuleName::UTL;
    ut.frag1 = SourceProgram{b.regs1, Program::unit({"r@1"}, correction, "")};
    ut.pre = s.branch_posts[1];
    ut.post = cur;
    s.branch_steps = {{}, {ut}};
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, b.regs1, b.regs2, obs).hermitize();
    cur = s.pre;
    rev.push_back(s);
  };
  auto add_utl = [&](std::vector<std::string> regs, const Mat& u) {
    OutlineStep s;
    s.rule = RuleName::UTL;
    s.frag1 = SourceProgram{b.regs1, Program::unit(regs, u, "")};
    s.post = cur;
    SourceProgram combined{b.all, s.frag1->prog};
    s.pre = dual_apply(combined, cur).hermitize();
    cur = s.pre;
    rev.push_back(s);
  };
  auto add_initl = [&](const std::string& reg) {
    OutlineStep s;
    s.rule = RuleName::InitL;
    s.frag1 = SourceProgram{b.regs1, Program::init(reg)};
    s.post = cur;
    SourceProgram combined{b.all, s.frag1->prog};
    s.pre = dual_apply(combined, cur).hermitize();
    cur = s.pre;
    rev.push_back(s);
  };

  add_ifl("p@1", gate_Z());
  add_ifl("q@1", gate_X());
  add_utl({"p@1"}, gate_H());
  add_utl({"p@1", "q@1"}, gate_CNOT());
  add_utl({"q@1", "r@1"}, gate_CNOT());
  add_utl({"q@1"}, gate_H());
  add_initl("r@1");
  add_initl("q@1");

  ProofOutline o;
  o.regs1 = b.regs1;
  o.regs2 = b.regs2;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) o.steps.push_back(*it);
  return o;
}
}  // namespace

ProofOutline qtel_outline_eqB(double theta) {
  Mat psi(2, 1), phi(2, 1);
  psi(0, 0) = std::cos(theta);
  psi(1, 0) = std::sin(theta);
  phi(0, 0) = -std::sin(theta);
  phi(1, 0) = std::cos(theta);
  Mat pp = tensor(psi, psi), ff = tensor(phi, phi);
  Mat eqB = pp * pp.dagger() + ff * ff.dagger();
  return qtel_outline_from(eqB);
}

ProofOutline qtel_outline_sym() { return qtel_outline_from(sym_projector(2)); }

ProofOutline qtel_noise_outline(Noise kind, double p, const Mat& psi_ket) {
  // two-sided: side 1 runs the noisy protocol, side 2 the clean one
  std::vector<Register> regs1{{"p@1", 2}, {"q@1", 2}, {"r@1", 2}};
  std::vector<Register> regs2{{"p@2", 2}, {"q@2", 2}, {"r@2", 2}};
  auto all = cat(regs1, regs2);
  auto M = comp_basis_meas();
  auto ks = noise_kraus(kind, p);

  Mat psi = psi_ket * psi_ket.dagger();
  Mat post = embed(psi, all, {"r@1"}) * embed(psi, all, {"r@2"});

  std::vector<OutlineStep> rev;
  Mat cur = post;
  auto backward = [&](OutlineStep s) {
    s.post = cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, regs1, regs2, obs).hermitize();
    cur = s.pre;
    rev.push_back(std::move(s));
  };

  // two-sided IF over all outcome pairs, corrections on r registers
  auto add_if_pair = [&](const std::string& m1reg, const std::string& m2reg,
                         const Mat& correction) {
    OutlineStep s;
    s.rule = RuleName::IF;
    s.frag1 = SourceProgram{
        regs1, make_if(M, {m1reg},
                       {Program::skip(), Program::unit({"r@1"}, correction, "")})};
    s.frag2 = SourceProgram{
        regs2, make_if(M, {m2reg},
                       {Program::skip(), Program::unit({"r@2"}, correction, "")})};
    Mat c1 = embed(correction, all, {"r@1"});
    Mat c2 = embed(correction, all, {"r@2"});
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) {
        Mat g = Mat::identity(cur.rows());
        if (m == 1) g = c1 * g;
        if (n == 1) g = g * c2;
        s.pair_posts[{m, n}] = (g.dagger() * cur * g).hermitize();
      }
    // nested UT chains
    auto mk_ut = [&](int m, int n) {
      std::vector<OutlineStep> chain;
      if (m == 0 && n == 0) return chain;
      OutlineStep ut;
      ut.rule = m == 1 && n == 1 ? RuleName::UT : (m == 1 ? RuleName::UTL : RuleName::UTR);
      if (m == 1) ut.frag1 = SourceProgram{regs1, Program::unit({"r@1"}, correction, "")};
      if (n == 1) ut.frag2 = SourceProgram{regs2, Program::unit({"r@2"}, correction, "")};
      ut.pre = s.pair_posts[{m, n}];
      ut.post = cur;
      chain.push_back(ut);
      return chain;
    };
    s.branch_steps = {mk_ut(0, 0), mk_ut(0, 1), mk_ut(1, 0), mk_ut(1, 1)};
    backward(std::move(s));
  };

  add_if_pair("p@1", "p@2", gate_Z());
  add_if_pair("q@1", "q@2", gate_X());
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{regs1, Program::apply_super({"p@1"}, {"p@1"}, ks, "E")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::UT;
    s.frag1 = SourceProgram{regs1, Program::unit({"p@1"}, gate_H(), "H")};
    s.frag2 = SourceProgram{regs2, Program::unit({"p@2"}, gate_H(), "H")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::UT;
    s.frag1 = SourceProgram{regs1, Program::unit({"p@1", "q@1"}, gate_CNOT(), "CNOT")};
    s.frag2 = SourceProgram{regs2, Program::unit({"p@2", "q@2"}, gate_CNOT(), "CNOT")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::UT;
    s.frag1 = SourceProgram{regs1, Program::unit({"q@1", "r@1"}, gate_CNOT(), "CNOT")};
    s.frag2 = SourceProgram{regs2, Program::unit({"q@2", "r@2"}, gate_CNOT(), "CNOT")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{regs1, Program::apply_super({"q@1"}, {"q@1"}, ks, "E")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::UT;
    s.frag1 = SourceProgram{regs1, Program::unit({"q@1"}, gate_H(), "H")};
    s.frag2 = SourceProgram{regs2, Program::unit({"q@2"}, gate_H(), "H")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::Init;
    s.frag1 = SourceProgram{regs1, Program::init("r@1")};
    s.frag2 = SourceProgram{regs2, Program::init("r@2")};
    backward(std::move(s));
  }
  {
    OutlineStep s;
    s.rule = RuleName::Init;
    s.frag1 = SourceProgram{regs1, Program::init("q@1")};
    s.frag2 = SourceProgram{regs2, Program::init("q@2")};
    backward(std::move(s));
  }

  ProofOutline o;
  o.regs1 = regs1;
  o.regs2 = regs2;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) o.steps.push_back(*it);
  return o;
}

// ---------- quantum one-time pad ----------

SourceProgram qotp(int n, bool with_dec, bool discard_key) {
  std::vector<Register> regs;
  for (int i = 0; i < n; ++i) regs.push_back({"p" + std::to_string(i), 2});
  Measurement mk = comp_basis_meas(4);  // on one (a_i, b_i) pair
  ProgramPtr prog = Program::skip();
  for (int i = 0; i < n; ++i) {
    prog = Program::seq(prog, Program::alloc({"a" + std::to_string(i), 2}));
    prog = Program::seq(prog, Program::alloc({"b" + std::to_string(i), 2}));
  }
  for (int i = 0; i < n; ++i) {
    prog = Program::seq(prog, Program::unit({"a" + std::to_string(i)}, gate_H(), "H"));
    prog = Program::seq(prog, Program::unit({"b" + std::to_string(i)}, gate_H(), "H"));
  }
  auto keygen_if = [&](int i) {
    return make_if(mk, {"a" + std::to_string(i), "b" + std::to_string(i)},
                   {Program::skip(), Program::skip(), Program::skip(), Program::skip()});
  };
  auto enc_if = [&](int i) {
    std::string pi = "p" + std::to_string(i);
    // outcomes xz: 00 -> skip, 01 -> Z, 10 -> X, 11 -> Z then X
    return make_if(mk, {"a" + std::to_string(i), "b" + std::to_string(i)},
                   {Program::skip(), Program::unit({pi}, gate_Z(), "Z"),
                    Program::unit({pi}, gate_X(), "X"),
                    Program::seq(Program::unit({pi}, gate_Z(), "Z"),
                                 Program::unit({pi}, gate_X(), "X"))});
  };
  for (int i = 0; i < n; ++i) prog = Program::seq(prog, keygen_if(i));
  for (int i = 0; i < n; ++i) prog = Program::seq(prog, enc_if(i));
  if (with_dec)
    for (int i = 0; i < n; ++i) prog = Program::seq(prog, enc_if(i));
  if (discard_key)
    for (int i = 0; i < n; ++i) {
      prog = Program::seq(prog, Program::trace_out("a" + std::to_string(i)));
      prog = Program::seq(prog, Program::trace_out("b" + std::to_string(i)));
    }
  return SourceProgram{regs, prog};
}

namespace {

// generic backward builder over a fixed register pair
struct BackBuilder {
  std::vector<Register> regs1, regs2;
  std::vector<OutlineStep> rev;
  Mat cur;

  // register contexts are tracked forward; steps are built backward, so the
  // caller supplies the context valid at each step's input
  void backward(OutlineStep s, const std::vector<Register>& ctx1,
                const std::vector<Register>& ctx2) {
    s.post = cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, ctx1, ctx2, obs).hermitize();
    cur = s.pre;
    rev.push_back(std::move(s));
  }

  ProofOutline finish(bool projective = false) {
    ProofOutline o;
    o.regs1 = regs1;
    o.regs2 = regs2;
    o.projective = projective;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) o.steps.push_back(*it);
    return o;
  }
};

}  // namespace

ProofOutline qotp_correct_outline() {
  // KeyGen; Enc; Dec; DisKey on side 1 against skip, =_sym(p, s) both ends
  std::vector<Register> regs1{{"p@1", 2}};
  std::vector<Register> regs2{{"s@2", 2}};
  // forward context snapshots
  std::vector<Register> with_keys{{"p@1", 2}, {"a@1", 2}, {"b@1", 2}};
  Measurement mk = comp_basis_meas(4);

  BackBuilder b;
  b.regs1 = regs1;
  b.regs2 = regs2;
  b.cur = sym_projector(2);

  auto enc_if = [&]() {
    return make_if(mk, {"a@1", "b@1"},
                   {Program::skip(), Program::unit({"p@1"}, gate_Z(), "Z"),
                    Program::unit({"p@1"}, gate_X(), "X"),
                    Program::seq(Program::unit({"p@1"}, gate_Z(), "Z"),
                                 Program::unit({"p@1"}, gate_X(), "X"))});
  };
  auto all_keys = cat(with_keys, regs2);

  // backward: trout b, trout a, Dec, Enc, KeyGen-if, H_b, H_a, new b, new a
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{{{"p@1", 2}, {"b@1", 2}}, Program::trace_out("b@1")};
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, {{"p@1", 2}, {"b@1", 2}}, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{with_keys, Program::trace_out("a@1")};
    // context after this trout is (p, b)
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, with_keys, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  auto add_branch_if = [&](bool is_keygen) {
    OutlineStep s;
    s.rule = RuleName::IFL;
    s.frag1 = SourceProgram{with_keys, is_keygen
                                           ? make_if(mk, {"a@1", "b@1"},
                                                     {Program::skip(), Program::skip(),
                                                      Program::skip(), Program::skip()})
                                           : enc_if()};
    s.post = b.cur;
    // branch predicates: transformed by each branch's gates
    Mat zf = embed(gate_Z(), all_keys, {"p@1"});
    Mat xf = embed(gate_X(), all_keys, {"p@1"});
    if (is_keygen) {
      s.branch_posts = {b.cur, b.cur, b.cur, b.cur};
      s.branch_steps = {{}, {}, {}, {}};
    } else {
      Mat b01 = (zf.dagger() * b.cur * zf).hermitize();
      Mat b10 = (xf.dagger() * b.cur * xf).hermitize();
      Mat mid11 = (xf.dagger() * b.cur * xf).hermitize();
      Mat b11 = (zf.dagger() * mid11 * zf).hermitize();
      s.branch_posts = {b.cur, b01, b10, b11};
      OutlineStep utz;
      utz.rule = RuleName::UTL;
      utz.frag1 = SourceProgram{with_keys, Program::unit({"p@1"}, gate_Z(), "Z")};
      utz.pre = b01;
      utz.post = b.cur;
      OutlineStep utx;
      utx.rule = RuleName::UTL;
      utx.frag1 = SourceProgram{with_keys, Program::unit({"p@1"}, gate_X(), "X")};
      utx.pre = b10;
      utx.post = b.cur;
      OutlineStep utz2 = utz;
      utz2.pre = b11;
      utz2.post = mid11;
      OutlineStep utx2 = utx;
      utx2.pre = mid11;
      utx2.post = b.cur;
      s.branch_steps = {{}, {utz}, {utx}, {utz2, utx2}};
    }
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, with_keys, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  };
  add_branch_if(false);  // Dec
  add_branch_if(false);  // Enc
  add_branch_if(true);   // KeyGen measurement
  {
    OutlineStep s;
    s.rule = RuleName::UTL;
    s.frag1 = SourceProgram{with_keys, Program::unit({"b@1"}, gate_H(), "H")};
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, with_keys, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  {
    OutlineStep s;
    s.rule = RuleName::UTL;
    s.frag1 = SourceProgram{with_keys, Program::unit({"a@1"}, gate_H(), "H")};
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, with_keys, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{{{"p@1", 2}, {"a@1", 2}}, Program::alloc({"b@1", 2})};
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, {{"p@1", 2}, {"a@1", 2}}, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{regs1, Program::alloc({"a@1", 2})};
    s.post = b.cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, regs1, regs2, obs).hermitize();
    b.cur = s.pre;
    b.rev.push_back(s);
  }
  return b.finish();
}

ProofOutline qotp_secure_outline(const Mat& psi_ket) {
  // KeyGen; Enc; DisKey on both sides; I/2 => |psi><psi| (x) I
  std::vector<Register> regs1{{"p@1", 2}};
  std::vector<Register> regs2{{"p@2", 2}};
  std::vector<Register> keys1{{"p@1", 2}, {"a@1", 2}, {"b@1", 2}};
  std::vector<Register> keys2{{"p@2", 2}, {"a@2", 2}, {"b@2", 2}};
  Measurement mk = comp_basis_meas(4);

  Mat psi = psi_ket * psi_ket.dagger();
  std::vector<OutlineStep> rev;
  Mat cur = tensor(psi, Mat::identity(2));  // on (p@1, p@2)

  auto backward = [&](OutlineStep s, const std::vector<Register>& c1,
                      const std::vector<Register>& c2) {
    s.post = cur;
    std::vector<Obligation> obs;
    s.pre = step_precondition(s, c1, c2, obs).hermitize();
    cur = s.pre;
    rev.push_back(std::move(s));
  };

  // DisKey trouts, built backward
  {
    OutlineStep s;
    s.rule = RuleName::SOR;
    s.frag2 = SourceProgram{{{"p@2", 2}, {"b@2", 2}}, Program::trace_out("b@2")};
    backward(std::move(s), regs1, {{"p@2", 2}, {"b@2", 2}});
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOR;
    s.frag2 = SourceProgram{keys2, Program::trace_out("a@2")};
    backward(std::move(s), regs1, keys2);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{{{"p@1", 2}, {"b@1", 2}}, Program::trace_out("b@1")};
    backward(std::move(s), {{"p@1", 2}, {"b@1", 2}}, keys2);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{keys1, Program::trace_out("a@1")};
    backward(std::move(s), keys1, keys2);
  }
  auto all_keys = cat(keys1, keys2);
  auto enc_if = [&](int side) {
    std::string a = side == 1 ? "a@1" : "a@2";
    std::string bb = side == 1 ? "b@1" : "b@2";
    std::string pp = side == 1 ? "p@1" : "p@2";
    return make_if(mk, {a, bb},
                   {Program::skip(), Program::unit({pp}, gate_Z(), "Z"),
                    Program::unit({pp}, gate_X(), "X"),
                    Program::seq(Program::unit({pp}, gate_Z(), "Z"),
                                 Program::unit({pp}, gate_X(), "X"))});
  };
  {
    // Enc on both sides via IF-w
    OutlineStep s;
    s.rule = RuleName::IFw;
    s.frag1 = SourceProgram{keys1, enc_if(1)};
    s.frag2 = SourceProgram{keys2, enc_if(2)};
    Mat z1 = embed(gate_Z(), all_keys, {"p@1"}), x1 = embed(gate_X(), all_keys, {"p@1"});
    Mat z2 = embed(gate_Z(), all_keys, {"p@2"}), x2 = embed(gate_X(), all_keys, {"p@2"});
    std::vector<Mat> g1 = {Mat::identity(64), z1, x1, x1 * z1};
    std::vector<Mat> g2 = {Mat::identity(64), z2, x2, x2 * z2};
    s.branch_posts.clear();
    s.branch_steps.clear();
    for (int m = 0; m < 4; ++m) {
      Mat g = g1[m] * g2[m];
      s.branch_posts.push_back((g.dagger() * cur * g).hermitize());
      // nested chains: one or two paired UT steps
      std::vector<OutlineStep> chain;
      if (m == 0) {
        s.branch_steps.push_back(chain);
        continue;
      }
      auto mk_ut = [&](const Mat& u, const std::string& nm, const Mat& pre, const Mat& post) {
        OutlineStep ut;
        ut.rule = RuleName::UT;
        ut.frag1 = SourceProgram{keys1, Program::unit({"p@1"}, u, nm)};
        ut.frag2 = SourceProgram{keys2, Program::unit({"p@2"}, u, nm)};
        ut.pre = pre;
        ut.post = post;
        return ut;
      };
      if (m == 1) {
        chain.push_back(mk_ut(gate_Z(), "Z", s.branch_posts[m], cur));
      } else if (m == 2) {
        chain.push_back(mk_ut(gate_X(), "X", s.branch_posts[m], cur));
      } else {
        Mat mid = ((x1 * x2).dagger() * cur * (x1 * x2)).hermitize();
        chain.push_back(mk_ut(gate_Z(), "Z", s.branch_posts[m], mid));
        chain.push_back(mk_ut(gate_X(), "X", mid, cur));
      }
      s.branch_steps.push_back(chain);
    }
    backward(std::move(s), keys1, keys2);
  }
  {
    // KeyGen measurement on both sides, all branches skip
    OutlineStep s;
    s.rule = RuleName::IFw;
    s.frag1 = SourceProgram{
        keys1, make_if(mk, {"a@1", "b@1"},
                       {Program::skip(), Program::skip(), Program::skip(), Program::skip()})};
    s.frag2 = SourceProgram{
        keys2, make_if(mk, {"a@2", "b@2"},
                       {Program::skip(), Program::skip(), Program::skip(), Program::skip()})};
    s.branch_posts = {cur, cur, cur, cur};
    s.branch_steps = {{}, {}, {}, {}};
    backward(std::move(s), keys1, keys2);
  }
  for (const char* reg : {"b@2", "a@2", "b@1", "a@1"}) {
    OutlineStep s;
    bool left = reg[2] == '1';
    s.rule = left ? RuleName::UTL : RuleName::UTR;
    auto& frag = left ? s.frag1 : s.frag2;
    frag = SourceProgram{left ? keys1 : keys2, Program::unit({reg}, gate_H(), "H")};
    backward(std::move(s), keys1, keys2);
  }
  // allocations backward: b@2, a@2, b@1, a@1
  {
    OutlineStep s;
    s.rule = RuleName::SOR;
    s.frag2 = SourceProgram{{{"p@2", 2}, {"a@2", 2}}, Program::alloc({"b@2", 2})};
    backward(std::move(s), keys1, {{"p@2", 2}, {"a@2", 2}});
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOR;
    s.frag2 = SourceProgram{regs2, Program::alloc({"a@2", 2})};
    backward(std::move(s), keys1, regs2);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{{{"p@1", 2}, {"a@1", 2}}, Program::alloc({"b@1", 2})};
    backward(std::move(s), {{"p@1", 2}, {"a@1", 2}}, regs2);
  }
  {
    OutlineStep s;
    s.rule = RuleName::SOL;
    s.frag1 = SourceProgram{regs1, Program::alloc({"a@1", 2})};
    backward(std::move(s), regs1, regs2);
  }

  ProofOutline o;
  o.regs1 = regs1;
  o.regs2 = regs2;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) o.steps.push_back(*it);
  return o;
}

// ---------- quantum walks ----------

SourceProgram qwalk(const Mat& coin, int n) {
  const int dp = n + 1;
  std::vector<Register> regs{{"c", 2}, {"p", dp}};
  Measurement guard;
  guard.name = "M";
  guard.outcomes = {0, 1};
  Mat myes(dp, dp), mno(dp, dp);
  myes(0, 0) = 1;
  myes(n, n) = 1;
  for (int i = 1; i < n; ++i) mno(i, i) = 1;
  guard.ops = {myes, mno};

  // shift with an arbitrary unitary completion on the boundary columns the
  // loop body never feeds
  Mat shift(2 * dp, 2 * dp);
  for (int i = 1; i < n; ++i) {
    shift(0 * dp + (i - 1), 0 * dp + i) = 1;
    shift(1 * dp + (i + 1), 1 * dp + i) = 1;
  }
  shift(0 * dp + (n - 1), 0 * dp + 0) = 1;
  shift(0 * dp + n, 0 * dp + n) = 1;
  shift(1 * dp + 0, 1 * dp + 0) = 1;
  shift(1 * dp + 1, 1 * dp + n) = 1;

  ProgramPtr body = Program::seq(Program::unit({"c"}, coin, "C"),
                                 Program::unit({"c", "p"}, shift, "S"));
  Measurement pos = comp_basis_meas(dp);
  std::vector<ProgramPtr> skips(dp, Program::skip());
  ProgramPtr prog = make_while(guard, {"p"}, body);
  prog = Program::seq(prog, make_if(pos, {"p"}, skips));
  prog = Program::seq(prog, Program::trace_out("c"));
  return SourceProgram{regs, prog};
}

Mat qwalk_relator(int n) {
  const int dp = n + 1;
  Mat u(2 * dp, 2 * dp);
  for (int d = 0; d < 2; ++d)
    for (int i = 0; i < dp; ++i) {
      int e = (i + d + 3) % 4;
      cplx v(1, 0);
      // (-i)^e
      for (int k = 0; k < e; ++k) v *= cplx(0, -1);
      u(d * dp + i, d * dp + i) = v;
    }
  return u;
}

Mat qwalk_sym_boundary(int n) {
  const int dp = n + 1;
  Mat pb(dp, dp);
  pb(0, 0) = 1;
  pb(n, n) = 1;
  Mat pp = tensor(pb, pb);
  Mat s = swap_operator(dp);
  return ((pp + s * pp) * cplx(0.5, 0.0)).hermitize();
}

ProofOutline qwalk_outline(int n) {
  const int dp = n + 1;
  const int d = 2 * dp;
  std::vector<Register> regs1{{"c@1", 2}, {"p@1", dp}};
  std::vector<Register> regs2{{"c@2", 2}, {"p@2", dp}};
  auto all = cat(regs1, regs2);
  auto w1 = tag_copy(qwalk(gate_H(), n), 1);
  auto w2 = tag_copy(qwalk(balanced_coin_Y(), n), 2);

  // pull out the three statements of each program
  std::vector<ProgramPtr> s1, s2;
  std::function<void(const ProgramPtr&, std::vector<ProgramPtr>&)> flat =
      [&](const ProgramPtr& p, std::vector<ProgramPtr>& out) {
        if (!p || p->kind == Program::Kind::Skip) return;
        if (p->kind == Program::Kind::Seq) {
          flat(p->first, out);
          flat(p->second, out);
          return;
        }
        out.push_back(p);
      };
  flat(w1.prog, s1);
  flat(w2.prog, s2);

  Mat uu = embed(qwalk_relator(n), all, {"c@2", "p@2"});
  Mat sym_full = sym_projector(d);
  Mat interior(dp, dp), boundary(dp, dp);
  boundary(0, 0) = boundary(n, n) = 1;
  for (int i = 1; i < n; ++i) interior(i, i) = 1;
  auto conj_u = [&](const Mat& x) { return (uu * x * uu.dagger()).hermitize(); };
  Mat pb_full = embed(tensor(Mat::identity(2), boundary), all, {"c@1", "p@1"}) *
                embed(tensor(Mat::identity(2), boundary), all, {"c@2", "p@2"});
  Mat pi_full = embed(tensor(Mat::identity(2), interior), all, {"c@1", "p@1"}) *
                embed(tensor(Mat::identity(2), interior), all, {"c@2", "p@2"});
  Mat swap_full = swap_operator(d);  // product order is (c p | c' p')
  Mat sym_b = ((pb_full + swap_full * pb_full) * cplx(0.5, 0.0)).hermitize();
  Mat sym_i = ((pi_full + swap_full * pi_full) * cplx(0.5, 0.0)).hermitize();

  Mat A = conj_u(sym_full);
  Mat B0 = conj_u(sym_b);
  Mat B1 = conj_u(sym_i);

  ProofOutline o;
  o.regs1 = regs1;
  o.regs2 = regs2;
  o.projective = true;

  // the loop
  OutlineStep lp;
  lp.rule = RuleName::LPP;
  lp.frag1 = SourceProgram{regs1, s1[0]};
  lp.frag2 = SourceProgram{regs2, s2[0]};
  lp.pre = A;
  lp.post = B0;
  lp.branch_posts = {B0, B1};
  {
    // body chain: UT-P coin, UT-P shift, Conseq-P down to A
    const Program& body1 = *s1[0]->body;
    const Program& body2 = *s2[0]->body;
    // body = Seq(coin, shift)
    OutlineStep utc;
    utc.rule = RuleName::UTP;
    utc.frag1 = SourceProgram{regs1, body1.first};
    utc.frag2 = SourceProgram{regs2, body2.first};
    Mat coin1 = embed(body1.first->unitary, all, body1.first->regs);
    Mat coin2 = embed(body2.first->unitary, all, body2.first->regs);
    Mat mid = ((coin1 * coin2) * B1 * (coin1 * coin2).dagger()).hermitize();
    utc.pre = B1;
    utc.post = mid;
    OutlineStep uts;
    uts.rule = RuleName::UTP;
    uts.frag1 = SourceProgram{regs1, body1.second};
    uts.frag2 = SourceProgram{regs2, body2.second};
    Mat sh1 = embed(body1.second->unitary, all, body1.second->regs);
    Mat sh2 = embed(body2.second->unitary, all, body2.second->regs);
    Mat cpost = ((sh1 * sh2) * mid * (sh1 * sh2).dagger()).hermitize();
    uts.pre = mid;
    uts.post = cpost;
    OutlineStep cq;
    cq.rule = RuleName::ConseqP;
    cq.pre = cpost;
    cq.post = A;
    lp.body_steps = {utc, uts, cq};
  }

  // the position measurement: branch predicates F_i
  OutlineStep ifp;
  ifp.rule = RuleName::IFP;
  ifp.frag1 = SourceProgram{regs1, s1[1]};
  ifp.frag2 = SourceProgram{regs2, s2[1]};
  ifp.pre = B0;
  Mat d_pred = embed(qwalk_sym_boundary(n), all, {"p@1", "p@2"});
  ifp.post = d_pred;
  for (int i = 0; i <= n; ++i) {
    Mat f(d * d, d * d);
    if (i == 0 || i == n) {
      Mat pi(dp, dp);
      pi(i, i) = 1;
      f = embed(pi, all, {"p@1"}) * embed(pi, all, {"p@2"});
    }
    ifp.branch_posts.push_back(f);
    OutlineStep cq;
    cq.rule = RuleName::ConseqP;
    cq.pre = f;
    cq.post = d_pred;
    ifp.branch_steps.push_back({cq});
  }

  // trace out the coins
  OutlineStep so;
  so.rule = RuleName::SOP;
  so.frag1 = SourceProgram{regs1, s1[2]};
  so.frag2 = SourceProgram{regs2, s2[2]};
  so.pre = d_pred;
  so.post = qwalk_sym_boundary(n);

  o.steps = {lp, ifp, so};
  return o;
}

// ---------- uniformity ----------

SourceProgram uniform_channel_program(int d) {
  std::vector<Register> regs{{"q", d}};
  std::vector<Mat> ks;
  const double s = 1.0 / std::sqrt(double(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat k(d, d);
      k(i, j) = s;
      ks.push_back(std::move(k));
    }
  return SourceProgram{regs, Program::apply_super({"q"}, {"q"}, std::move(ks), "Unif")};
}

}  // namespace rqpd::fixtures
