#include "rqpd/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "rqpd/eigen.hpp"
#include "rqpd/operator_core.hpp"

namespace rqpd {

namespace {

int reg_index(const std::vector<Register>& regs, const std::string& name) {
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (regs[i].name == name) return int(i);
  throw std::invalid_argument("unknown register: " + name);
}

SpaceShape shape_of(const std::vector<Register>& regs) {
  std::vector<int> d;
  for (const auto& r : regs) d.push_back(r.dim);
  return SpaceShape(d);
}

int dim_of(const std::vector<Register>& regs) { return shape_of(regs).total(); }

std::vector<int> positions_of(const std::vector<Register>& regs,
                              const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) out.push_back(reg_index(regs, n));
  return out;
}

// Embed op acting on the named registers into the full space.
Mat embed_named(const Mat& op, const std::vector<Register>& regs,
                const std::vector<std::string>& names) {
  if (names.size() == regs.size()) {
    // possibly a pure reorder; fast path when already aligned
    bool aligned = true;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (regs[i].name != names[i]) aligned = false;
    if (aligned) return op;
  }
  return embed_on(op, shape_of(regs), positions_of(regs, names));
}

// Rectangular embedding of a channel's Kraus operator: K maps the named
// input factors to fresh output factors; all other factors are untouched.
// Output register order: untouched registers (in order), then regs_out.
Mat embed_kraus_rect(const Mat& k, const std::vector<Register>& regs,
                     const std::vector<std::string>& in_names,
                     const std::vector<Register>& out_regs) {
  std::vector<int> in_pos = positions_of(regs, in_names);
  std::vector<bool> is_in(regs.size(), false);
  for (int p : in_pos) is_in[p] = true;
  std::vector<int> rest_pos;
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (!is_in[i]) rest_pos.push_back(int(i));

  std::vector<int> dims_full;
  for (const auto& r : regs) dims_full.push_back(r.dim);
  int din_sel = 1;
  std::vector<int> dims_in_sel;
  for (int p : in_pos) {
    dims_in_sel.push_back(dims_full[p]);
    din_sel *= dims_full[p];
  }
  int drest = 1;
  std::vector<int> dims_rest;
  for (int p : rest_pos) {
    dims_rest.push_back(dims_full[p]);
    drest *= dims_full[p];
  }
  int dout_sel = k.rows();
  std::vector<int> dims_out_sel;
  int Dout = drest;
  for (const auto& r : out_regs) {
    dims_out_sel.push_back(r.dim);
    Dout *= r.dim;
  }
  if (k.cols() != din_sel) throw std::invalid_argument("embed_kraus_rect: input dim mismatch");

  const int Din = dim_of(regs);
  Mat out(Dout, Din);
  // decode helpers
  auto decode = [](int idx, const std::vector<int>& dims, std::vector<int>& dig) {
    for (int t = int(dims.size()) - 1; t >= 0; --t) {
      dig[t] = idx % dims[t];
      idx /= dims[t];
    }
  };
  auto encode = [](const std::vector<int>& dig, const std::vector<int>& dims) {
    int idx = 0;
    for (std::size_t t = 0; t < dims.size(); ++t) idx = idx * dims[t] + dig[t];
    return idx;
  };
  std::vector<int> rdig(rest_pos.size()), adig(in_pos.size()), bdig(dims_out_sel.size());
  std::vector<int> full(regs.size());
  std::vector<int> outdig(rest_pos.size() + dims_out_sel.size());
  std::vector<int> dims_out_all = dims_rest;
  for (int d : dims_out_sel) dims_out_all.push_back(d);
  for (int b = 0; b < dout_sel; ++b) {
    if (!dims_out_sel.empty()) decode(b, dims_out_sel, bdig);
    for (int a = 0; a < din_sel; ++a) {
      const cplx v = k(b, a);
      if (v == cplx(0.0)) continue;
      if (!dims_in_sel.empty()) decode(a, dims_in_sel, adig);
      for (int r = 0; r < drest; ++r) {
        if (!dims_rest.empty()) decode(r, dims_rest, rdig);
        for (std::size_t t = 0; t < rest_pos.size(); ++t) full[rest_pos[t]] = rdig[t];
        for (std::size_t t = 0; t < in_pos.size(); ++t) full[in_pos[t]] = adig[t];
        for (std::size_t t = 0; t < rest_pos.size(); ++t) outdig[t] = rdig[t];
        for (std::size_t t = 0; t < dims_out_sel.size(); ++t)
          outdig[rest_pos.size() + t] = bdig[t];
        out(encode(outdig, dims_out_all), encode(full, dims_full)) = v;
      }
    }
  }
  return out;
}

// register context after a statement (mirrors validate_program)
std::vector<Register> ctx_after(const ProgramPtr& p, const std::vector<Register>& ctx);

std::vector<Register> super_out_regs(const Program& p, const std::vector<Register>& ctx) {
  std::vector<Register> outs;
  for (std::size_t k = 0; k < p.regs_out.size(); ++k) {
    const std::string& nm = p.regs_out[k];
    bool was_input = std::find(p.regs_in.begin(), p.regs_in.end(), nm) != p.regs_in.end();
    if (was_input) {
      outs.push_back({nm, ctx[reg_index(ctx, nm)].dim});
    } else {
      if (k >= p.regs.size())
        throw std::invalid_argument("channel output register missing a dimension: " + nm);
      outs.push_back({nm, std::stoi(p.regs[k])});
    }
  }
  return outs;
}

std::vector<Register> ctx_after(const ProgramPtr& p, const std::vector<Register>& ctx) {
  if (!p) return ctx;
  switch (p->kind) {
    case Program::Kind::Skip:
    case Program::Kind::Init:
    case Program::Kind::Unitary:
      return ctx;
    case Program::Kind::Seq:
      return ctx_after(p->second, ctx_after(p->first, ctx));
    case Program::Kind::IfMeas:
      return ctx_after(p->branches[0], ctx);
    case Program::Kind::WhileMeas:
      return ctx;
    case Program::Kind::TraceOut: {
      auto out = ctx;
      out.erase(out.begin() + reg_index(out, p->reg));
      return out;
    }
    case Program::Kind::ApplySuper: {
      if (p->regs_in == p->regs_out) return ctx;  // in-place channel
      std::vector<Register> next;
      for (const auto& r : ctx)
        if (std::find(p->regs_in.begin(), p->regs_in.end(), r.name) == p->regs_in.end())
          next.push_back(r);
      for (const auto& r : super_out_regs(*p, ctx)) next.push_back(r);
      return next;
    }
  }
  return ctx;
}

struct LoopMatrices {
  Mat loop;        // vectorized semantics of the whole loop
  Mat body;        // vectorized semantics of the body
  Mat m0hat, m1hat;
  double spectral = 0.0;
  bool via_series = false;
};

class Evaluator {
 public:
  Mat eval(const ProgramPtr& p, const std::vector<Register>& ctx, const Mat& rho) {
    if (!p) return rho;
    switch (p->kind) {
      case Program::Kind::Skip:
        return rho;
      case Program::Kind::Seq: {
        Mat mid = eval(p->first, ctx, rho);
        return eval(p->second, ctx_after(p->first, ctx), mid);
      }
      case Program::Kind::Init: {
        int idx = reg_index(ctx, p->reg);
        int d = ctx[idx].dim;
        Mat out(rho.rows(), rho.cols());
        for (int i = 0; i < d; ++i) {
          Mat k = embed_named(Mat::ketbra(d, 0, i), ctx, {p->reg});
          out += k * rho * k.dagger();
        }
        return out;
      }
      case Program::Kind::Unitary: {
        Mat u = embed_named(p->unitary, ctx, p->regs);
        return u * rho * u.dagger();
      }
      case Program::Kind::IfMeas: {
        auto after = ctx_after(p, ctx);
        Mat out(dim_of(after), dim_of(after));
        for (std::size_t m = 0; m < p->branches.size(); ++m) {
          Mat mm = embed_named(p->meas.ops[m], ctx, p->regs);
          out += eval(p->branches[m], ctx, mm * rho * mm.dagger());
        }
        return out;
      }
      case Program::Kind::WhileMeas: {
        const LoopMatrices& lm = loop_matrices(p, ctx);
        return unvec(lm.loop * vec(rho), rho.rows(), rho.cols());
      }
      case Program::Kind::TraceOut: {
        int idx = reg_index(ctx, p->reg);
        std::vector<int> keep;
        for (int i = 0; i < int(ctx.size()); ++i)
          if (i != idx) keep.push_back(i);
        return partial_trace(rho, shape_of(ctx), keep);
      }
      case Program::Kind::ApplySuper: {
        if (p->regs_in == p->regs_out) {
          // in-place channel: square embedding preserves the register order
          Mat out(rho.rows(), rho.cols());
          for (const Mat& k : p->kraus) {
            Mat kf = embed_named(k, ctx, p->regs_in);
            out += kf * rho * kf.dagger();
          }
          return out;
        }
        auto outs = super_out_regs(*p, ctx);
        std::vector<Register> next = ctx_after(p, ctx);
        Mat out(dim_of(next), dim_of(next));
        // output order from embed_kraus_rect is (rest..., outs...) = next
        for (const Mat& k : p->kraus) {
          Mat kf = embed_kraus_rect(k, ctx, p->regs_in, outs);
          out += kf * rho * kf.dagger();
        }
        return out;
      }
    }
    throw std::logic_error("eval: unreachable");
  }

  // E*(A): backward transformer
  Mat dual_eval(const ProgramPtr& p, const std::vector<Register>& ctx, const Mat& post) {
    if (!p) return post;
    switch (p->kind) {
      case Program::Kind::Skip:
        return post;
      case Program::Kind::Seq: {
        Mat mid = dual_eval(p->second, ctx_after(p->first, ctx), post);
        return dual_eval(p->first, ctx, mid);
      }
      case Program::Kind::Init: {
        int idx = reg_index(ctx, p->reg);
        int d = ctx[idx].dim;
        Mat out(post.rows(), post.cols());
        for (int i = 0; i < d; ++i) {
          Mat k = embed_named(Mat::ketbra(d, 0, i), ctx, {p->reg});
          out += k.dagger() * post * k;
        }
        return out;
      }
      case Program::Kind::Unitary: {
        Mat u = embed_named(p->unitary, ctx, p->regs);
        return u.dagger() * post * u;
      }
      case Program::Kind::IfMeas: {
        Mat out(dim_of(ctx), dim_of(ctx));
        for (std::size_t m = 0; m < p->branches.size(); ++m) {
          Mat mm = embed_named(p->meas.ops[m], ctx, p->regs);
          out += mm.dagger() * dual_eval(p->branches[m], ctx, post) * mm;
        }
        return out;
      }
      case Program::Kind::WhileMeas: {
        const LoopMatrices& lm = loop_matrices(p, ctx);
        // matrix of the dual map is the adjoint of the vectorized matrix
        Mat v = lm.loop.dagger() * vec(post);
        return unvec(v, post.rows(), post.cols());
      }
      case Program::Kind::TraceOut: {
        int idx = reg_index(ctx, p->reg);
        // cylinder extension: A -> A (x) I on the traced register, at its slot
        auto after = ctx_after(p, ctx);
        // build by summing embeddings of |i><i| tensored... equivalently use
        // the rectangular Kraus adjoints directly
        int d = ctx[idx].dim;
        Mat out(dim_of(ctx), dim_of(ctx));
        for (int i = 0; i < d; ++i) {
          Mat bra(1, d);
          bra(0, i) = 1.0;
          Mat kf = embed_kraus_rect(bra, ctx, {p->reg}, {});
          out += kf.dagger() * post * kf;
        }
        (void)after;
        return out;
      }
      case Program::Kind::ApplySuper: {
        if (p->regs_in == p->regs_out) {
          Mat out(dim_of(ctx), dim_of(ctx));
          for (const Mat& k : p->kraus) {
            Mat kf = embed_named(k, ctx, p->regs_in);
            out += kf.dagger() * post * kf;
          }
          return out;
        }
        auto outs = super_out_regs(*p, ctx);
        Mat out(dim_of(ctx), dim_of(ctx));
        for (const Mat& k : p->kraus) {
          Mat kf = embed_kraus_rect(k, ctx, p->regs_in, outs);
          out += kf.dagger() * post * kf;
        }
        return out;
      }
    }
    throw std::logic_error("dual_eval: unreachable");
  }

  const LoopMatrices& loop_matrices(const ProgramPtr& p, const std::vector<Register>& ctx) {
    auto it = loops_.find(p.get());
    if (it != loops_.end()) return it->second;
    LoopMatrices lm;
    const int D = dim_of(ctx);
    Mat m0 = embed_named(p->meas.ops[0], ctx, p->regs);
    Mat m1 = embed_named(p->meas.ops[1], ctx, p->regs);
    lm.m0hat = tensor(m0, m0.conj());
    lm.m1hat = tensor(m1, m1.conj());
    // body matrix via basis evaluation
    Mat body(D * D, D * D);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        Mat col = eval(p->body, ctx, Mat::ketbra(D, i, j));
        Mat v = vec(col);
        for (int r = 0; r < D * D; ++r) body(r, i * D + j) = v(r, 0);
      }
    lm.body = body;
    Mat B = body * lm.m1hat;
    lm.spectral = spectral_radius(B);
    if (lm.spectral < 1.0 - 1e-6) {
      Mat ImB = Mat::identity(D * D) - B;
      // loop = m0hat * (I - B)^{-1}
      Mat inv = lu_solve(ImB, Mat::identity(D * D));
      lm.loop = lm.m0hat * inv;
      lm.via_series = false;
    } else {
      // truncated Neumann series; terms eventually vanish whenever the
      // peripheral spectrum is annihilated by the exit measurement
      Mat acc(D * D, D * D);
      Mat term = lm.m0hat;  // m0hat * B^0
      const int cap = 100000;
      bool converged = false;
      for (int n = 0; n < cap; ++n) {
        acc += term;
        term = term * B;
        double tn = term.max_norm();
        if (tn < 1e-10) {
          converged = true;
          break;
        }
        if (!std::isfinite(tn)) break;
      }
      if (!converged)
        throw LoopDivergence(
            "loop semantics did not converge: spectral radius " +
            std::to_string(lm.spectral) + " and truncated series still moving at the cap");
      lm.loop = acc;
      lm.via_series = true;
    }
    return loops_.emplace(p.get(), std::move(lm)).first->second;
  }

 private:
  std::map<const Program*, LoopMatrices> loops_;
};

}  // namespace

std::vector<std::pair<std::string, Configuration>> step(const Configuration& c) {
  if (!c.remaining) throw std::invalid_argument("step: configuration already terminated");
  const ProgramPtr& p = c.remaining;
  std::vector<std::pair<std::string, Configuration>> out;
  Evaluator ev;
  switch (p->kind) {
    case Program::Kind::Seq: {
      Configuration head{p->first, c.regs, c.state};
      for (auto& [label, succ] : step(head)) {
        Configuration next{succ.remaining ? Program::seq(succ.remaining, p->second) : p->second,
                           succ.regs, succ.state};
        out.push_back({label, std::move(next)});
      }
      return out;
    }
    case Program::Kind::IfMeas: {
      for (std::size_t m = 0; m < p->branches.size(); ++m) {
        Mat mm = embed_named(p->meas.ops[m], c.regs, p->regs);
        Configuration next{p->branches[m], c.regs, mm * c.state * mm.dagger()};
        out.push_back({std::to_string(p->meas.outcomes[m]), std::move(next)});
      }
      return out;
    }
    case Program::Kind::WhileMeas: {
      Mat m0 = embed_named(p->meas.ops[0], c.regs, p->regs);
      Mat m1 = embed_named(p->meas.ops[1], c.regs, p->regs);
      out.push_back({"0", Configuration{nullptr, c.regs, m0 * c.state * m0.dagger()}});
      out.push_back({"1", Configuration{Program::seq(p->body, p), c.regs,
                                        m1 * c.state * m1.dagger()}});
      return out;
    }
    default: {
      // deterministic single step
      Mat ns = ev.eval(p, c.regs, c.state);
      out.push_back({"", Configuration{nullptr, ctx_after(p, c.regs), std::move(ns)}});
      return out;
    }
  }
}

BranchNode branch_tree(Configuration root, int depth, double prune) {
  BranchNode node;
  node.weight = root.state.trace().real();
  node.config = std::move(root);
  if (!node.config.remaining || depth <= 0) return node;
  for (auto& [label, succ] : step(node.config)) {
    double w = succ.state.trace().real();
    if (w < prune) continue;
    BranchNode child = branch_tree(std::move(succ), depth - 1, prune);
    child.label = label;
    node.children.push_back(std::move(child));
  }
  return node;
}

Mat sum_terminated_leaves(const BranchNode& t) {
  if (!t.config.remaining && t.children.empty()) return t.config.state;
  Mat acc;
  bool got = false;
  std::function<void(const BranchNode&)> walk = [&](const BranchNode& n) {
    if (!n.config.remaining) {
      if (!got) {
        acc = n.config.state;
        got = true;
      } else {
        acc += n.config.state;
      }
      return;
    }
    for (const auto& c : n.children) walk(c);
  };
  walk(t);
  if (!got) throw std::runtime_error("sum_terminated_leaves: no terminated leaves in tree");
  return acc;
}

void collect_leaf_weights(const BranchNode& t, const std::string& prefix,
                          std::vector<std::pair<std::string, double>>& out) {
  std::string here = prefix.empty() ? t.label : (t.label.empty() ? prefix : prefix + "." + t.label);
  if (!t.config.remaining) {
    out.push_back({here, t.weight});
    return;
  }
  if (t.children.empty()) {
    out.push_back({here + ".?", t.weight});  // truncated
    return;
  }
  for (const auto& c : t.children) collect_leaf_weights(c, here, out);
}

struct SemanticFn::Impl {
  std::vector<Register> in, out;
  std::optional<SourceProgram> program;
  std::optional<std::vector<Mat>> explicit_kraus;

  mutable std::mutex mu;
  mutable std::optional<Mat> matrix_cache;
  mutable std::optional<std::vector<Mat>> kraus_cache;
  mutable Evaluator evaluator;
};

SemanticFn::SemanticFn(SourceProgram p) : impl_(std::make_shared<Impl>()) {
  impl_->in = p.registers;
  impl_->out = validate_program(p);
  impl_->program = std::move(p);
}

SemanticFn::SemanticFn(std::vector<Register> regs_in, std::vector<Register> regs_out,
                       std::vector<Mat> kraus, bool skip_validation)
    : impl_(std::make_shared<Impl>()) {
  impl_->in = std::move(regs_in);
  impl_->out = std::move(regs_out);
  int din = dim_of(impl_->in), dout = dim_of(impl_->out);
  for (const Mat& k : kraus)
    if (k.rows() != dout || k.cols() != din)
      throw std::invalid_argument("SemanticFn: Kraus shape mismatch");
  if (!skip_validation) {
    Mat s(din, din);
    for (const Mat& k : kraus) s += k.dagger() * k;
    if (loewner_margin(s, Mat::identity(din)) < -1e-8)
      throw std::invalid_argument("SemanticFn: map increases trace");
  }
  impl_->explicit_kraus = std::move(kraus);
  impl_->kraus_cache = impl_->explicit_kraus;
}

const std::vector<Register>& SemanticFn::regs_in() const { return impl_->in; }
const std::vector<Register>& SemanticFn::regs_out() const { return impl_->out; }
int SemanticFn::dim_in() const { return dim_of(impl_->in); }
int SemanticFn::dim_out() const { return dim_of(impl_->out); }

Mat SemanticFn::apply(const Mat& rho) const {
  if (rho.rows() != dim_in() || rho.cols() != dim_in())
    throw std::invalid_argument("SemanticFn::apply: state dim mismatch");
  if (impl_->explicit_kraus) return apply_kraus(*impl_->explicit_kraus, rho);
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->evaluator.eval(impl_->program->prog, impl_->in, rho);
}

const Mat& SemanticFn::matrix() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  if (!impl_->matrix_cache) {
    if (impl_->explicit_kraus) {
      impl_->matrix_cache = superop_matrix(*impl_->explicit_kraus);
    } else {
      const int din = dim_in(), dout = dim_out();
      Mat m(dout * dout, din * din);
      for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
          Mat col = impl_->evaluator.eval(impl_->program->prog, impl_->in, Mat::ketbra(din, i, j));
          for (int r = 0; r < dout * dout; ++r)
            m(r, i * din + j) = col(r / dout, r % dout);
        }
      impl_->matrix_cache = std::move(m);
    }
  }
  return *impl_->matrix_cache;
}

Mat SemanticFn::choi() const { return choi_from_superop(matrix(), dim_out(), dim_in()); }

const std::vector<Mat>& SemanticFn::kraus() const {
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (impl_->kraus_cache) return *impl_->kraus_cache;
  }
  Mat j = choi();
  std::lock_guard<std::mutex> lock(impl_->mu);
  if (!impl_->kraus_cache) impl_->kraus_cache = kraus_from_choi(j, dim_out(), dim_in());
  return *impl_->kraus_cache;
}

SemanticFn denote(const SourceProgram& p) { return SemanticFn(p); }

SemanticFn dual(const SemanticFn& e) {
  std::vector<Mat> dk;
  for (const Mat& k : e.kraus()) dk.push_back(k.dagger());
  return SemanticFn(e.regs_out(), e.regs_in(), std::move(dk), /*skip_validation=*/true);
}

Mat dual_apply(const SourceProgram& p, const Mat& post) {
  Evaluator ev;
  auto out = validate_program(p);
  if (post.rows() != dim_of(out))
    throw std::invalid_argument("dual_apply: postcondition dim mismatch");
  return ev.dual_eval(p.prog, p.registers, post);
}

namespace {
void collect_loop_certs(const ProgramPtr& p, const std::vector<Register>& ctx, Evaluator& ev,
                        std::vector<LoopCertificate>& certs) {
  if (!p) return;
  switch (p->kind) {
    case Program::Kind::Seq:
      collect_loop_certs(p->first, ctx, ev, certs);
      collect_loop_certs(p->second, ctx_after(p->first, ctx), ev, certs);
      break;
    case Program::Kind::IfMeas:
      for (const auto& b : p->branches) collect_loop_certs(b, ctx, ev, certs);
      break;
    case Program::Kind::WhileMeas: {
      collect_loop_certs(p->body, ctx, ev, certs);
      const int D = dim_of(ctx);
      Mat m1 = embed_named(p->meas.ops[1], ctx, p->regs);
      // E(X) = sum_i (M1^dag E_i^dag) X (E_i M1) with {E_i} Kraus of the body
      Mat body = ev.loop_matrices(p, ctx).body;
      auto ks = kraus_from_choi(choi_from_superop(body, D, D), D, D);
      std::vector<Mat> as;
      for (const Mat& e : ks) as.push_back(m1.dagger() * e.dagger());
      Mat ehat(D * D, D * D);
      for (const Mat& a : as) ehat += tensor(a, a.conj());
      auto eg = eig_general(ehat, true);
      for (std::size_t k = 0; k < eg.values.size(); ++k) {
        double mod = std::abs(eg.values[k]);
        if (mod < 1.0 - 1e-8) continue;
        Mat v(D * D, 1);
        for (int i = 0; i < D * D; ++i) v(i, 0) = eg.vectors(i, int(k));
        Mat x = unvec(v, D, D);
        LoopCertificate c;
        c.eigenvalue_modulus = mod;
        c.eigenvector_trace = std::abs(x.trace());
        c.traceless = c.eigenvector_trace <= 1e-6 * std::max(1.0, x.frob_norm());
        certs.push_back(c);
      }
      break;
    }
    default:
      break;
  }
}
}  // namespace

LosslessReport is_lossless(const SourceProgram& p) {
  LosslessReport rep;
  auto out_regs = validate_program(p);
  Mat id_out = Mat::identity(dim_of(out_regs));
  try {
    Mat back = dual_apply(p, id_out);
    rep.trace_defect = (back - Mat::identity(back.rows())).max_norm();
    rep.lossless = rep.trace_defect <= 1e-7;
  } catch (const LoopDivergence& e) {
    rep.lossless = false;
    rep.note = e.what();
    rep.trace_defect = 1.0;
  }
  Evaluator ev;
  try {
    collect_loop_certs(p.prog, p.registers, ev, rep.loop_certificates);
    for (const auto& c : rep.loop_certificates)
      if (!c.traceless && rep.note.empty())
        rep.note = "a loop has a peripheral eigenvector with nonzero trace";
  } catch (const LoopDivergence& e) {
    if (rep.note.empty()) rep.note = e.what();
  }
  return rep;
}

}  // namespace rqpd
