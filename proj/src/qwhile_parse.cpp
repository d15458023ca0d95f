#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <variant>

#include "rqpd/operator_core.hpp"
#include "rqpd/qwhile.hpp"
#include "rqpd/qwhile_lex.hpp"

namespace rqpd {

ProgramPtr Program::skip() {
  auto p = std::make_shared<Program>();
  p->kind = Kind::Skip;
  return p;
}
ProgramPtr Program::seq(ProgramPtr a, ProgramPtr b) {
  if (!a || a->kind == Kind::Skip) return b ? b : skip();
  if (!b || b->kind == Kind::Skip) return a;
  auto p = std::make_shared<Program>();
  p->kind = Kind::Seq;
  p->first = std::move(a);
  p->second = std::move(b);
  return p;
}
ProgramPtr Program::init(std::string reg) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::Init;
  p->reg = std::move(reg);
  return p;
}
ProgramPtr Program::unit(std::vector<std::string> regs, Mat u, std::string name) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::Unitary;
  p->regs = std::move(regs);
  p->unitary = std::move(u);
  p->gate_name = std::move(name);
  return p;
}
ProgramPtr Program::if_meas(Measurement m, std::vector<ProgramPtr> branches) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::IfMeas;
  p->meas = std::move(m);
  p->branches = std::move(branches);
  return p;
}
ProgramPtr Program::while_meas(Measurement m, ProgramPtr body) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::WhileMeas;
  p->meas = std::move(m);
  p->body = std::move(body);
  return p;
}
ProgramPtr Program::apply_super(std::vector<std::string> in, std::vector<std::string> out,
                                std::vector<Mat> kraus, std::string name) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::ApplySuper;
  p->regs_in = std::move(in);
  p->regs_out = std::move(out);
  p->kraus = std::move(kraus);
  p->super_name = std::move(name);
  return p;
}
ProgramPtr Program::trace_out(std::string reg) {
  auto p = std::make_shared<Program>();
  p->kind = Kind::TraceOut;
  p->reg = std::move(reg);
  return p;
}
ProgramPtr Program::alloc(const Register& r) {
  Mat k(r.dim, 1);
  k(0, 0) = 1.0;
  auto p = apply_super({}, {r.name}, {k}, "new");
  auto q = std::const_pointer_cast<Program>(p);
  q->regs.push_back(std::to_string(r.dim));  // stash dim for validation/printing
  return p;
}

namespace detail {

using LetValue = std::variant<Mat, Measurement, std::vector<Mat>>;

struct RegCtx {
  std::vector<Register> live;

  int find(const std::string& n) const {
    for (std::size_t i = 0; i < live.size(); ++i)
      if (live[i].name == n) return int(i);
    return -1;
  }
  int dim_of(const std::string& n) const { return live[find(n)].dim; }
};

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  std::map<std::string, LetValue> lets;
  std::vector<std::string> let_order;

  const Token& cur() const { return toks[pos]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col);
  }
  bool is_ident(const char* kw) const {
    return cur().kind == TokKind::Ident && cur().text == kw;
  }
  Token expect(TokKind k, const std::string& what) {
    if (cur().kind != k) fail("expected " + what);
    return toks[pos++];
  }
  bool accept(TokKind k) {
    if (cur().kind == k) {
      ++pos;
      return true;
    }
    return false;
  }
  int expect_int(const std::string& what) {
    Token t = expect(TokKind::Number, what);
    if (t.im != 0.0 || t.re != std::floor(t.re) || t.re < 0)
      throw ParseError(what + " must be a non-negative integer", t.line, t.col);
    return int(t.re);
  }

  Mat parse_matrix() {
    expect(TokKind::LBracket, "'['");
    std::vector<std::vector<cplx>> rows;
    while (true) {
      expect(TokKind::LBracket, "'[' starting a row");
      std::vector<cplx> row;
      while (true) {
        Token t = expect(TokKind::Number, "complex number");
        row.push_back(cplx(t.re, t.im));
        if (!accept(TokKind::Comma)) break;
      }
      expect(TokKind::RBracket, "']' ending a row");
      rows.push_back(std::move(row));
      if (!accept(TokKind::Comma)) break;
    }
    expect(TokKind::RBracket, "']' ending the matrix");
    std::size_t cols = rows[0].size();
    for (const auto& r : rows)
      if (r.size() != cols) fail("ragged matrix literal");
    Mat m(int(rows.size()), int(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) m(int(i), int(j)) = rows[i][j];
    return m;
  }

  Mat builtin_gate(const std::string& n) const {
    auto mk = [](std::initializer_list<cplx> vals, int d) {
      Mat m(d, d);
      int i = 0;
      for (cplx v : vals) {
        m(i / d, i % d) = v;
        ++i;
      }
      return m;
    };
    const double s = 1.0 / std::sqrt(2.0);
    if (n == "I") return Mat::identity(2);
    if (n == "X") return mk({0, 1, 1, 0}, 2);
    if (n == "Y") return mk({0, cplx(0, -1), cplx(0, 1), 0}, 2);
    if (n == "Z") return mk({1, 0, 0, -1}, 2);
    if (n == "H") return mk({s, s, s, -s}, 2);
    if (n == "CNOT") {
      Mat m = Mat::identity(4);
      m(2, 2) = m(3, 3) = 0;
      m(2, 3) = m(3, 2) = 1;
      return m;
    }
    return Mat();
  }

  Mat resolve_matrix(const std::string& name) {
    auto it = lets.find(name);
    if (it != lets.end()) {
      if (auto* m = std::get_if<Mat>(&it->second)) return *m;
      fail("'" + name + "' is not a matrix binding");
    }
    Mat b = builtin_gate(name);
    if (b.rows() == 0) fail("unknown gate or matrix '" + name + "'");
    return b;
  }

  Mat parse_mexpr() {
    if (cur().kind == TokKind::LBracket) return parse_matrix();
    Token t = expect(TokKind::Ident, "matrix or bound name");
    return resolve_matrix(t.text);
  }

  void parse_let() {
    Token name = expect(TokKind::Ident, "name");
    expect(TokKind::Eq, "'='");
    if (is_ident("meas")) {
      ++pos;
      expect(TokKind::LBrace, "'{'");
      Measurement m;
      m.name = name.text;
      std::set<int> seen;
      while (true) {
        int outcome = expect_int("outcome label");
        if (!seen.insert(outcome).second) fail("duplicate outcome label");
        expect(TokKind::Colon, "':'");
        Mat op = parse_mexpr();
        m.outcomes.push_back(outcome);
        m.ops.push_back(std::move(op));
        if (!accept(TokKind::Comma)) break;
      }
      expect(TokKind::RBrace, "'}'");
      // completeness: sum M^dag M = I
      Mat s(m.ops[0].cols(), m.ops[0].cols());
      for (const Mat& op : m.ops) {
        if (op.cols() != s.rows() || !op.square())
          fail("measurement operators must share a square shape");
        s += op.dagger() * op;
      }
      if ((s - Mat::identity(s.rows())).max_norm() > 1e-9)
        fail("incomplete measurement '" + name.text + "': sum M^dag M != I");
      lets[name.text] = std::move(m);
    } else if (is_ident("kraus")) {
      ++pos;
      expect(TokKind::LBrace, "'{'");
      std::vector<Mat> ks;
      while (true) {
        ks.push_back(parse_mexpr());
        if (!accept(TokKind::Comma)) break;
      }
      expect(TokKind::RBrace, "'}'");
      for (const Mat& k : ks)
        if (k.rows() != ks[0].rows() || k.cols() != ks[0].cols())
          fail("Kraus operators must share one shape");
      Mat s(ks[0].cols(), ks[0].cols());
      for (const Mat& k : ks) s += k.dagger() * k;
      if ((s - Mat::identity(s.rows())).max_norm() > 1e-9)
        fail("Kraus set '" + name.text + "' is not trace preserving");
      lets[name.text] = std::move(ks);
    } else {
      lets[name.text] = parse_matrix();
    }
    let_order.push_back(name.text);
  }

  std::vector<std::string> parse_reglist() {
    std::vector<std::string> out;
    out.push_back(expect(TokKind::Ident, "register name").text);
    while (accept(TokKind::Comma)) out.push_back(expect(TokKind::Ident, "register name").text);
    return out;
  }

  // register list whose entries may carry an inline :dim (assignment LHS)
  std::vector<std::pair<std::string, int>> parse_reglist_dims() {
    std::vector<std::pair<std::string, int>> out;
    while (true) {
      std::string n = expect(TokKind::Ident, "register name").text;
      int d = -1;
      if (accept(TokKind::Colon)) d = expect_int("dimension");
      out.push_back({n, d});
      if (!accept(TokKind::Comma)) break;
    }
    return out;
  }

  void check_regs_exist(const std::vector<std::string>& rs, const RegCtx& ctx) {
    std::set<std::string> seen;
    for (const auto& r : rs) {
      if (ctx.find(r) < 0) fail("unknown register '" + r + "'");
      if (!seen.insert(r).second) fail("register '" + r + "' repeated");
    }
  }

  int dims_product(const std::vector<std::string>& rs, const RegCtx& ctx) {
    int d = 1;
    for (const auto& r : rs) d *= ctx.dim_of(r);
    return d;
  }

  ProgramPtr parse_stmt(RegCtx& ctx) {
    if (is_ident("skip")) {
      ++pos;
      return Program::skip();
    }
    if (is_ident("new")) {
      ++pos;
      Token name = expect(TokKind::Ident, "register name");
      if (ctx.find(name.text) >= 0)
        throw ParseError("register '" + name.text + "' already live", name.line, name.col);
      expect(TokKind::Colon, "':' before the new register's dimension");
      int d = expect_int("dimension");
      if (d < 1) fail("dimension must be >= 1");
      ctx.live.push_back({name.text, d});
      return Program::alloc({name.text, d});
    }
    if (is_ident("trout")) {
      ++pos;
      Token name = expect(TokKind::Ident, "register name");
      int idx = ctx.find(name.text);
      if (idx < 0)
        throw ParseError("unknown register '" + name.text + "'", name.line, name.col);
      ctx.live.erase(ctx.live.begin() + idx);
      return Program::trace_out(name.text);
    }
    if (is_ident("if")) {
      ++pos;
      Token mname = expect(TokKind::Ident, "measurement name");
      auto it = lets.find(mname.text);
      if (it == lets.end() || !std::holds_alternative<Measurement>(it->second))
        throw ParseError("'" + mname.text + "' is not a measurement", mname.line, mname.col);
      Measurement m = std::get<Measurement>(it->second);
      expect(TokKind::LBracket, "'['");
      auto regs = parse_reglist();
      expect(TokKind::RBracket, "']'");
      check_regs_exist(regs, ctx);
      if (m.ops[0].rows() != dims_product(regs, ctx))
        fail("measurement '" + mname.text + "' dimension does not match registers");
      m.name = mname.text;
      // record measured registers on the measurement for the semantics
      expect(TokKind::Eq, "'='");
      std::map<int, ProgramPtr> by_outcome;
      std::optional<std::vector<Register>> after;
      while (true) {
        int outcome = expect_int("outcome label");
        if (std::find(m.outcomes.begin(), m.outcomes.end(), outcome) == m.outcomes.end())
          fail("branch outcome not in measurement '" + mname.text + "'");
        if (by_outcome.count(outcome)) fail("duplicate branch for one outcome");
        expect(TokKind::Arrow, "'->'");
        RegCtx bctx = ctx;
        by_outcome[outcome] = parse_stmt_seq(bctx, /*stop_fi=*/true);
        if (after && !(bctx.live == *after)) fail("branches end with different registers");
        after = bctx.live;
        if (accept(TokKind::Box)) continue;
        break;
      }
      if (!is_ident("fi")) fail("expected 'fi'");
      ++pos;
      if (by_outcome.size() != m.outcomes.size())
        fail("if statement must cover every outcome of '" + mname.text + "'");
      ctx.live = *after;
      // order branches by the measurement's outcome order
      std::vector<ProgramPtr> branches;
      for (int oc : m.outcomes) branches.push_back(by_outcome[oc]);
      // sort outcomes ascending with ops for a canonical form
      std::vector<int> order(m.outcomes.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return m.outcomes[a] < m.outcomes[b]; });
      Measurement ms;
      ms.name = m.name;
      std::vector<ProgramPtr> bs;
      for (int k : order) {
        ms.outcomes.push_back(m.outcomes[k]);
        ms.ops.push_back(m.ops[k]);
        bs.push_back(branches[k]);
      }
      auto p = Program::if_meas(std::move(ms), std::move(bs));
      std::const_pointer_cast<Program>(p)->regs = regs;
      return p;
    }
    if (is_ident("while")) {
      ++pos;
      Token mname = expect(TokKind::Ident, "measurement name");
      auto it = lets.find(mname.text);
      if (it == lets.end() || !std::holds_alternative<Measurement>(it->second))
        throw ParseError("'" + mname.text + "' is not a measurement", mname.line, mname.col);
      Measurement m = std::get<Measurement>(it->second);
      std::vector<int> sorted = m.outcomes;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != std::vector<int>{0, 1})
        fail("while measurement must have outcomes 0 and 1");
      expect(TokKind::LBracket, "'['");
      auto regs = parse_reglist();
      expect(TokKind::RBracket, "']'");
      check_regs_exist(regs, ctx);
      if (m.ops[0].rows() != dims_product(regs, ctx))
        fail("measurement '" + mname.text + "' dimension does not match registers");
      expect(TokKind::Eq, "'='");
      int guard = expect_int("guard outcome");
      if (guard != 1) fail("loops run while the outcome is 1");
      if (!is_ident("do")) fail("expected 'do'");
      ++pos;
      RegCtx bctx = ctx;
      ProgramPtr body = parse_stmt_seq(bctx, /*stop_fi=*/false);
      if (!(bctx.live == ctx.live)) fail("loop body must preserve the register context");
      if (!is_ident("od")) fail("expected 'od'");
      ++pos;
      // canonical outcome order 0,1
      Measurement ms;
      ms.name = m.name;
      for (int want : {0, 1})
        for (std::size_t k = 0; k < m.outcomes.size(); ++k)
          if (m.outcomes[k] == want) {
            ms.outcomes.push_back(want);
            ms.ops.push_back(m.ops[k]);
          }
      auto p = Program::while_meas(std::move(ms), std::move(body));
      std::const_pointer_cast<Program>(p)->regs = regs;
      return p;
    }
    // assignment forms: reglist := |0>  |  reglist := NAME [ reglist ]
    auto lhs_dims = parse_reglist_dims();
    std::vector<std::string> lhs;
    for (const auto& [n, d] : lhs_dims) lhs.push_back(n);
    Token as = expect(TokKind::Assign, "':='");
    if (cur().kind == TokKind::KetZero) {
      ++pos;
      if (lhs.size() != 1 || lhs_dims[0].second >= 0)
        throw ParseError("initialization takes a single register", as.line, as.col);
      if (ctx.find(lhs[0]) < 0) fail("unknown register '" + lhs[0] + "'");
      return Program::init(lhs[0]);
    }
    Token gname = expect(TokKind::Ident, "gate or channel name");
    expect(TokKind::LBracket, "'['");
    std::vector<std::string> rhs;
    if (cur().kind != TokKind::RBracket) rhs = parse_reglist();
    expect(TokKind::RBracket, "']'");

    auto it = lets.find(gname.text);
    if (it != lets.end() && std::holds_alternative<std::vector<Mat>>(it->second)) {
      // superoperator application; register context may change
      const auto& ks = std::get<std::vector<Mat>>(it->second);
      check_regs_exist(rhs, ctx);
      if (ks[0].cols() != dims_product(rhs, ctx))
        fail("channel '" + gname.text + "' input dimension does not match registers");
      // output registers: inputs keep their dims, fresh names need inline :dim
      std::vector<Register> outs;
      int dout = ks[0].rows();
      int prod = 1;
      for (const auto& [nm, inline_dim] : lhs_dims) {
        int idx = ctx.find(nm);
        bool was_input = std::find(rhs.begin(), rhs.end(), nm) != rhs.end();
        if (idx >= 0 && !was_input)
          fail("output register '" + nm + "' collides with a live register");
        int d;
        if (was_input) {
          d = ctx.dim_of(nm);
        } else if (inline_dim >= 1) {
          d = inline_dim;
        } else {
          fail("fresh output register '" + nm + "' needs an explicit :dim");
          d = 0;
        }
        outs.push_back({nm, d});
        prod *= d;
      }
      if (prod != dout)
        fail("channel '" + gname.text + "' output dimension does not match registers");
      // update context: remove inputs, append outputs
      std::vector<Register> next;
      for (const auto& r : ctx.live)
        if (std::find(rhs.begin(), rhs.end(), r.name) == rhs.end()) next.push_back(r);
      for (const auto& r : outs) next.push_back(r);
      ctx.live = next;
      auto p = Program::apply_super(rhs, lhs, ks, gname.text);
      // stash output dims for validation and printing
      auto q = std::const_pointer_cast<Program>(p);
      for (const auto& r : outs) q->regs.push_back(std::to_string(r.dim));
      return p;
    }
    // unitary
    Mat u = resolve_matrix(gname.text);
    if (lhs != rhs)
      throw ParseError("unitary target list must match the bracketed list", as.line, as.col);
    check_regs_exist(rhs, ctx);
    int d = dims_product(rhs, ctx);
    if (u.rows() != d || u.cols() != d)
      fail("gate '" + gname.text + "' dimension does not match registers");
    if ((u.dagger() * u - Mat::identity(d)).max_norm() > 1e-9)
      fail("non-unitary gate '" + gname.text + "'");
    return Program::unit(rhs, u, gname.text);
  }

  bool at_stmt_terminator(bool in_branch) const {
    if (cur().kind == TokKind::End) return true;
    if (cur().kind == TokKind::Box) return true;
    if (cur().kind == TokKind::Ident) {
      const std::string& t = cur().text;
      if (t == "fi" || t == "od") return true;
      if (in_branch) return false;
    }
    return false;
  }

  ProgramPtr parse_stmt_seq(RegCtx& ctx, bool stop_fi) {
    (void)stop_fi;
    ProgramPtr acc = Program::skip();
    bool first = true;
    while (true) {
      if (at_stmt_terminator(true)) break;
      if (!first) {
        if (!accept(TokKind::Semi)) break;
        if (at_stmt_terminator(true)) break;  // trailing separator
      }
      first = false;
      acc = Program::seq(acc, parse_stmt(ctx));
    }
    return acc;
  }
};

}  // namespace detail

SourceProgram parse_program(const std::string& text) {
  detail::Parser ps;
  ps.toks = detail::lex(text);
  SourceProgram sp;
  detail::RegCtx ctx;
  ProgramPtr acc = Program::skip();
  bool saw_stmt = false;
  while (ps.cur().kind != detail::TokKind::End) {
    if (ps.is_ident("reg")) {
      if (saw_stmt) ps.fail("register declarations must precede statements");
      ++ps.pos;
      detail::Token name = ps.expect(detail::TokKind::Ident, "register name");
      if (ctx.find(name.text) >= 0)
        throw ParseError("register '" + name.text + "' redeclared", name.line, name.col);
      ps.expect(detail::TokKind::Colon, "':'");
      int d = ps.expect_int("dimension");
      if (d < 1) ps.fail("dimension must be >= 1");
      ctx.live.push_back({name.text, d});
      sp.registers.push_back({name.text, d});
      ps.expect(detail::TokKind::Semi, "';'");
      continue;
    }
    if (ps.is_ident("let")) {
      if (saw_stmt) ps.fail("let bindings must precede statements");
      ++ps.pos;
      ps.parse_let();
      ps.expect(detail::TokKind::Semi, "';'");
      continue;
    }
    saw_stmt = true;
    acc = Program::seq(acc, ps.parse_stmt(ctx));
    if (!ps.accept(detail::TokKind::Semi)) {
      if (ps.cur().kind != detail::TokKind::End) ps.fail("expected ';' or end of program");
    }
  }
  sp.prog = acc;
  return sp;
}

std::vector<std::string> used_registers(const ProgramPtr& p) {
  std::vector<std::string> out;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  std::function<void(const ProgramPtr&)> walk = [&](const ProgramPtr& q) {
    if (!q) return;
    switch (q->kind) {
      case Program::Kind::Skip:
        break;
      case Program::Kind::Seq:
        walk(q->first);
        walk(q->second);
        break;
      case Program::Kind::Init:
      case Program::Kind::TraceOut:
        add(q->reg);
        break;
      case Program::Kind::Unitary:
        for (const auto& r : q->regs) add(r);
        break;
      case Program::Kind::IfMeas:
        for (const auto& r : q->regs) add(r);
        for (const auto& b : q->branches) walk(b);
        break;
      case Program::Kind::WhileMeas:
        for (const auto& r : q->regs) add(r);
        walk(q->body);
        break;
      case Program::Kind::ApplySuper:
        for (const auto& r : q->regs_in) add(r);
        for (const auto& r : q->regs_out) add(r);
        break;
    }
  };
  walk(p);
  return out;
}

bool programs_equal(const ProgramPtr& a, const ProgramPtr& b) {
  if (!a || !b) return (!a || a->kind == Program::Kind::Skip) && (!b || b->kind == Program::Kind::Skip);
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Program::Kind::Skip:
      return true;
    case Program::Kind::Seq:
      return programs_equal(a->first, b->first) && programs_equal(a->second, b->second);
    case Program::Kind::Init:
    case Program::Kind::TraceOut:
      return a->reg == b->reg;
    case Program::Kind::Unitary:
      return a->regs == b->regs && a->unitary.exact_equal(b->unitary);
    case Program::Kind::IfMeas: {
      if (a->regs != b->regs || a->meas.outcomes != b->meas.outcomes) return false;
      for (std::size_t i = 0; i < a->meas.ops.size(); ++i)
        if (!a->meas.ops[i].exact_equal(b->meas.ops[i])) return false;
      for (std::size_t i = 0; i < a->branches.size(); ++i)
        if (!programs_equal(a->branches[i], b->branches[i])) return false;
      return true;
    }
    case Program::Kind::WhileMeas: {
      if (a->regs != b->regs || a->meas.outcomes != b->meas.outcomes) return false;
      for (std::size_t i = 0; i < a->meas.ops.size(); ++i)
        if (!a->meas.ops[i].exact_equal(b->meas.ops[i])) return false;
      return programs_equal(a->body, b->body);
    }
    case Program::Kind::ApplySuper: {
      if (a->regs_in != b->regs_in || a->regs_out != b->regs_out) return false;
      if (a->kraus.size() != b->kraus.size()) return false;
      for (std::size_t i = 0; i < a->kraus.size(); ++i)
        if (!a->kraus[i].exact_equal(b->kraus[i])) return false;
      return true;
    }
  }
  return false;
}

bool programs_equal(const SourceProgram& a, const SourceProgram& b) {
  return a.registers == b.registers && programs_equal(a.prog, b.prog);
}

namespace {
ProgramPtr tag_walk(const ProgramPtr& p, const std::string& suffix) {
  if (!p) return p;
  auto q = std::make_shared<Program>(*p);
  auto tag = [&](std::string& n) { n += suffix; };
  switch (q->kind) {
    case Program::Kind::Seq:
      q->first = tag_walk(p->first, suffix);
      q->second = tag_walk(p->second, suffix);
      break;
    case Program::Kind::Init:
    case Program::Kind::TraceOut:
      tag(q->reg);
      break;
    case Program::Kind::Unitary:
      for (auto& r : q->regs) tag(r);
      break;
    case Program::Kind::IfMeas:
      for (auto& r : q->regs) tag(r);
      for (auto& b : q->branches) b = tag_walk(b, suffix);
      break;
    case Program::Kind::WhileMeas:
      for (auto& r : q->regs) tag(r);
      q->body = tag_walk(p->body, suffix);
      break;
    case Program::Kind::ApplySuper:
      for (auto& r : q->regs_in) tag(r);
      for (auto& r : q->regs_out) tag(r);
      break;
    default:
      break;
  }
  return q;
}
}  // namespace

SourceProgram tag_copy(const SourceProgram& p, int tag) {
  if (tag != 1 && tag != 2) throw std::invalid_argument("tag_copy: tag must be 1 or 2");
  std::string suffix = "@" + std::to_string(tag);
  SourceProgram out;
  for (const auto& r : p.registers) out.registers.push_back({r.name + suffix, r.dim});
  out.prog = tag_walk(p.prog, suffix);
  return out;
}

namespace {
std::vector<Register> validate_walk(const ProgramPtr& p, std::vector<Register> ctx) {
  auto find = [&](const std::string& n) {
    for (std::size_t i = 0; i < ctx.size(); ++i)
      if (ctx[i].name == n) return int(i);
    return -1;
  };
  auto dims_of = [&](const std::vector<std::string>& rs) {
    int d = 1;
    for (const auto& r : rs) {
      int i = find(r);
      if (i < 0) throw std::invalid_argument("validate: unknown register " + r);
      d *= ctx[i].dim;
    }
    return d;
  };
  if (!p) return ctx;
  switch (p->kind) {
    case Program::Kind::Skip:
      return ctx;
    case Program::Kind::Seq:
      return validate_walk(p->second, validate_walk(p->first, std::move(ctx)));
    case Program::Kind::Init:
      if (find(p->reg) < 0) throw std::invalid_argument("validate: unknown register " + p->reg);
      return ctx;
    case Program::Kind::Unitary: {
      int d = dims_of(p->regs);
      if (p->unitary.rows() != d || p->unitary.cols() != d)
        throw std::invalid_argument("validate: gate dimension mismatch");
      if ((p->unitary.dagger() * p->unitary - Mat::identity(d)).max_norm() > 1e-9)
        throw std::invalid_argument("validate: non-unitary gate");
      return ctx;
    }
    case Program::Kind::IfMeas: {
      int d = dims_of(p->regs);
      Mat s(d, d);
      for (const Mat& op : p->meas.ops) {
        if (op.rows() != d || op.cols() != d)
          throw std::invalid_argument("validate: measurement dimension mismatch");
        s += op.dagger() * op;
      }
      if ((s - Mat::identity(d)).max_norm() > 1e-9)
        throw std::invalid_argument("validate: incomplete measurement");
      if (p->branches.size() != p->meas.outcomes.size())
        throw std::invalid_argument("validate: branch/outcome mismatch");
      std::vector<Register> after;
      bool got = false;
      for (const auto& b : p->branches) {
        auto a = validate_walk(b, ctx);
        if (got && !(a == after)) throw std::invalid_argument("validate: branch contexts differ");
        after = a;
        got = true;
      }
      return after;
    }
    case Program::Kind::WhileMeas: {
      int d = dims_of(p->regs);
      if (p->meas.outcomes != std::vector<int>{0, 1})
        throw std::invalid_argument("validate: while measurement outcomes must be {0,1}");
      Mat s(d, d);
      for (const Mat& op : p->meas.ops) s += op.dagger() * op;
      if ((s - Mat::identity(d)).max_norm() > 1e-9)
        throw std::invalid_argument("validate: incomplete measurement");
      auto after = validate_walk(p->body, ctx);
      if (!(after == ctx))
        throw std::invalid_argument("validate: loop body changes the register context");
      return ctx;
    }
    case Program::Kind::TraceOut: {
      int i = find(p->reg);
      if (i < 0) throw std::invalid_argument("validate: unknown register " + p->reg);
      ctx.erase(ctx.begin() + i);
      return ctx;
    }
    case Program::Kind::ApplySuper: {
      int din = 1;
      for (const auto& r : p->regs_in) {
        int i = find(r);
        if (i < 0) throw std::invalid_argument("validate: unknown register " + r);
        din *= ctx[i].dim;
      }
      if (p->kraus.empty() || p->kraus[0].cols() != din)
        throw std::invalid_argument("validate: channel input dimension mismatch");
      Mat s(din, din);
      for (const Mat& k : p->kraus) s += k.dagger() * k;
      if ((s - Mat::identity(din)).max_norm() > 1e-9)
        throw std::invalid_argument("validate: channel not trace preserving");
      // dims of outputs: from stash (p->regs) or reuse of input registers
      std::vector<Register> outs;
      int prod = 1;
      for (std::size_t k = 0; k < p->regs_out.size(); ++k) {
        const std::string& nm = p->regs_out[k];
        int i = find(nm);
        bool was_input =
            std::find(p->regs_in.begin(), p->regs_in.end(), nm) != p->regs_in.end();
        int d;
        if (was_input) {
          d = ctx[i].dim;
        } else {
          if (i >= 0) throw std::invalid_argument("validate: output register collides: " + nm);
          if (k >= p->regs.size())
            throw std::invalid_argument("validate: missing output dim for " + nm);
          d = std::stoi(p->regs[k]);
        }
        outs.push_back({nm, d});
        prod *= d;
      }
      if (prod != p->kraus[0].rows())
        throw std::invalid_argument("validate: channel output dimension mismatch");
      if (p->regs_in == p->regs_out) return ctx;  // in-place channel
      std::vector<Register> next;
      for (const auto& r : ctx)
        if (std::find(p->regs_in.begin(), p->regs_in.end(), r.name) == p->regs_in.end())
          next.push_back(r);
      for (const auto& r : outs) next.push_back(r);
      return next;
    }
  }
  return ctx;
}
}  // namespace

std::vector<Register> validate_program(const SourceProgram& p) {
  return validate_walk(p.prog, p.registers);
}

}  // namespace rqpd
