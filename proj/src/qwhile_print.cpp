#include <cstdio>
#include <sstream>
#include <vector>

#include "rqpd/qwhile.hpp"

namespace rqpd {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_cplx(cplx v) {
  if (v.imag() == 0.0) return fmt_double(v.real());
  if (v.real() == 0.0) return fmt_double(v.imag()) + "i";
  std::string im = fmt_double(v.imag());
  if (!im.empty() && im[0] == '-') return fmt_double(v.real()) + im + "i";
  return fmt_double(v.real()) + "+" + im + "i";
}

std::string fmt_matrix(const Mat& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i) {
    s += "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) s += ", ";
      s += fmt_cplx(m(i, j));
    }
    s += "]";
    if (i + 1 < m.rows()) s += ", ";
  }
  return s + "]";
}

struct Pools {
  std::vector<Mat> gates;
  std::vector<Measurement> meas;
  std::vector<std::vector<Mat>> kraus;

  int gate_id(const Mat& m) {
    for (std::size_t i = 0; i < gates.size(); ++i)
      if (gates[i].exact_equal(m)) return int(i);
    gates.push_back(m);
    return int(gates.size()) - 1;
  }
  int meas_id(const Measurement& m) {
    for (std::size_t i = 0; i < meas.size(); ++i) {
      if (meas[i].outcomes != m.outcomes) continue;
      bool same = true;
      for (std::size_t k = 0; k < m.ops.size(); ++k)
        if (!meas[i].ops[k].exact_equal(m.ops[k])) {
          same = false;
          break;
        }
      if (same) return int(i);
    }
    meas.push_back(m);
    return int(meas.size()) - 1;
  }
  int kraus_id(const std::vector<Mat>& ks) {
    for (std::size_t i = 0; i < kraus.size(); ++i) {
      if (kraus[i].size() != ks.size()) continue;
      bool same = true;
      for (std::size_t k = 0; k < ks.size(); ++k)
        if (!kraus[i][k].exact_equal(ks[k])) {
          same = false;
          break;
        }
      if (same) return int(i);
    }
    kraus.push_back(ks);
    return int(kraus.size()) - 1;
  }
};

bool is_alloc(const Program& p) {
  return p.kind == Program::Kind::ApplySuper && p.regs_in.empty() && p.regs_out.size() == 1 &&
         p.kraus.size() == 1 && p.kraus[0].cols() == 1 && p.kraus[0](0, 0) == cplx(1.0) &&
         p.kraus[0].frob_norm() == 1.0;
}

void collect(const ProgramPtr& p, Pools& pools) {
  if (!p) return;
  switch (p->kind) {
    case Program::Kind::Seq:
      collect(p->first, pools);
      collect(p->second, pools);
      break;
    case Program::Kind::Unitary:
      pools.gate_id(p->unitary);
      break;
    case Program::Kind::IfMeas:
      pools.meas_id(p->meas);
      for (const auto& b : p->branches) collect(b, pools);
      break;
    case Program::Kind::WhileMeas:
      pools.meas_id(p->meas);
      collect(p->body, pools);
      break;
    case Program::Kind::ApplySuper:
      if (!is_alloc(*p)) pools.kraus_id(p->kraus);
      break;
    default:
      break;
  }
}

std::string reglist(const std::vector<std::string>& rs) {
  std::string s;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) s += ", ";
    s += rs[i];
  }
  return s;
}

void print_stmt(const ProgramPtr& p, Pools& pools, std::string indent, std::string& out);

void print_seq(const ProgramPtr& p, Pools& pools, const std::string& indent, std::string& out,
               bool& first) {
  if (!p) return;
  if (p->kind == Program::Kind::Seq) {
    print_seq(p->first, pools, indent, out, first);
    print_seq(p->second, pools, indent, out, first);
    return;
  }
  if (!first) out += ";\n";
  first = false;
  print_stmt(p, pools, indent, out);
}

void print_stmt(const ProgramPtr& p, Pools& pools, std::string indent, std::string& out) {
  switch (p->kind) {
    case Program::Kind::Skip:
      out += indent + "skip";
      break;
    case Program::Kind::Seq: {
      bool first = true;
      print_seq(p, pools, indent, out, first);
      break;
    }
    case Program::Kind::Init:
      out += indent + p->reg + " := |0>";
      break;
    case Program::Kind::Unitary:
      out += indent + reglist(p->regs) + " := g" + std::to_string(pools.gate_id(p->unitary)) +
             "[" + reglist(p->regs) + "]";
      break;
    case Program::Kind::IfMeas: {
      out += indent + "if m" + std::to_string(pools.meas_id(p->meas)) + "[" + reglist(p->regs) +
             "] = ";
      for (std::size_t k = 0; k < p->branches.size(); ++k) {
        if (k) out += indent + "[] ";
        out += std::to_string(p->meas.outcomes[k]) + " ->\n";
        bool first = true;
        print_seq(p->branches[k], pools, indent + "  ", out, first);
        if (first) out += indent + "  skip";
        out += "\n";
      }
      out += indent + "fi";
      break;
    }
    case Program::Kind::WhileMeas: {
      out += indent + "while m" + std::to_string(pools.meas_id(p->meas)) + "[" +
             reglist(p->regs) + "] = 1 do\n";
      bool first = true;
      print_seq(p->body, pools, indent + "  ", out, first);
      if (first) out += indent + "  skip";
      out += "\n" + indent + "od";
      break;
    }
    case Program::Kind::TraceOut:
      out += indent + "trout " + p->reg;
      break;
    case Program::Kind::ApplySuper: {
      if (is_alloc(*p)) {
        out += indent + "new " + p->regs_out[0] + " : " + std::to_string(p->kraus[0].rows());
        break;
      }
      out += indent;
      for (std::size_t k = 0; k < p->regs_out.size(); ++k) {
        if (k) out += ", ";
        out += p->regs_out[k];
        bool fresh = true;
        for (const auto& r : p->regs_in)
          if (r == p->regs_out[k]) fresh = false;
        if (fresh && k < p->regs.size()) out += " : " + p->regs[k];
      }
      out += " := k" + std::to_string(pools.kraus_id(p->kraus)) + "[" + reglist(p->regs_in) + "]";
      break;
    }
  }
}

}  // namespace

std::string pretty(const SourceProgram& sp) {
  Pools pools;
  collect(sp.prog, pools);
  std::string out;
  for (const auto& r : sp.registers)
    out += "reg " + r.name + " : " + std::to_string(r.dim) + ";\n";
  for (std::size_t i = 0; i < pools.gates.size(); ++i)
    out += "let g" + std::to_string(i) + " = " + fmt_matrix(pools.gates[i]) + ";\n";
  for (std::size_t i = 0; i < pools.meas.size(); ++i) {
    out += "let m" + std::to_string(i) + " = meas { ";
    for (std::size_t k = 0; k < pools.meas[i].outcomes.size(); ++k) {
      if (k) out += ", ";
      out += std::to_string(pools.meas[i].outcomes[k]) + ": " + fmt_matrix(pools.meas[i].ops[k]);
    }
    out += " };\n";
  }
  for (std::size_t i = 0; i < pools.kraus.size(); ++i) {
    out += "let k" + std::to_string(i) + " = kraus { ";
    for (std::size_t k = 0; k < pools.kraus[i].size(); ++k) {
      if (k) out += ", ";
      out += fmt_matrix(pools.kraus[i][k]);
    }
    out += " };\n";
  }
  if (sp.prog && sp.prog->kind != Program::Kind::Skip) {
    bool first = true;
    print_seq(sp.prog, pools, "", out, first);
    if (first) out += "skip";
    out += "\n";
  } else {
    out += "skip\n";
  }
  return out;
}

}  // namespace rqpd
