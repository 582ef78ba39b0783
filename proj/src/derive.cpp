// SPDX-License-Identifier: Apache-2.0
#include "pbound/derive.hpp"

#include <cassert>

namespace pbound {

namespace {

class Derivation {
 public:
  Derivation(const Module& m, const BaseFnSet& B, const ContextMap& cm,
             const std::vector<RewriteFn>& rewrites, const DeriveOptions& opts,
             DeriveResult& out)
      : m_(m), B_(B), cm_(cm), rewrites_(rewrites), opts_(opts), out_(out) {}

  void run() {
    // Specification context: one (or more) symbolic pre/post pairs per
    // procedure, each validated against the body (ValidCtx).
    for (auto& [name, body] : m_.prog->procs) {
      std::vector<ProcSpec> specs;
      for (int k = 0; k < opts_.specs_per_proc; ++k) {
        ProcSpec s;
        s.pre_ctx = LinCtx::top();
        s.post_ctx = exit_ctx_of(name);
        s.pre = fresh("spec_" + name + "_pre" + std::to_string(k));
        s.post = fresh("spec_" + name + "_post" + std::to_string(k));
        specs.push_back(std::move(s));
      }
      out_.specs.emplace(name, std::move(specs));
    }
    for (auto& [name, body] : m_.prog->procs) {
      for (auto& spec : out_.specs.at(name)) {
        SymAnnotation body_pre = derive(*body, spec.post);
        equal(body_pre, spec.pre);
      }
    }
    SymAnnotation zero_post = fresh("main_post");
    for (int i = 0; i < B_.size(); ++i)
      out_.lp.add_row({{zero_post.v[i], Rat(1)}}, Rat(0), /*is_eq=*/true);
    out_.root = derive(*m_.prog->main_body, zero_post);
  }

 private:
  LinCtx exit_ctx_of(const std::string& name) const {
    for (auto& [n, c] : cm_.proc_exit)
      if (n == name) return c;
    return LinCtx::top();
  }

  SymAnnotation fresh(const std::string& tag) {
    SymAnnotation a;
    a.v.resize(B_.size());
    for (int i = 0; i < B_.size(); ++i)
      a.v[i] = out_.lp.add_var("q_" + tag + "_" + std::to_string(i), /*nonneg=*/true);
    return a;
  }

  void equal(const SymAnnotation& a, const SymAnnotation& b) {
    for (int i = 0; i < B_.size(); ++i)
      if (a.v[i] != b.v[i])
        out_.lp.add_row({{a.v[i], Rat(1)}, {b.v[i], Rat(-1)}}, Rat(0), true);
  }

  // Relax: to = from - F.u - slack, u >= 0, per-coefficient slack >= 0,
  // encoded as the inequalities from_i - (F.u)_i - to_i >= 0 over the
  // rewrites applicable in ctx (slack is exactly the absorption rewrites).
  void weaken(const SymAnnotation& from, const SymAnnotation& to, const LinCtx& ctx) {
    ++out_.weaken_sites;
    std::map<LinExpr, bool> guard_cache;
    auto row_ok = [&](const LinExpr& g) {
      auto it = guard_cache.find(g);
      if (it != guard_cache.end()) return it->second;
      bool ok = entails(ctx, g);
      guard_cache.emplace(g, ok);
      return ok;
    };
    std::vector<std::vector<std::pair<int, Rat>>> per_coeff(B_.size());
    int wsite = out_.weaken_sites;
    int k = 0;
    for (auto& f : rewrites_) {
      ++k;
      // Structural slack subsumes single-function rewrites with empty guard.
      if (f.coeffs.size() == 1 && f.guard.empty() && f.coeffs[0].second > 0) continue;
      bool ok = true;
      for (auto& g : f.guard)
        if (!row_ok(g)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      int u = out_.lp.add_var("u" + std::to_string(wsite) + "_" + std::to_string(k),
                              /*nonneg=*/true);
      for (auto& [i, c] : f.coeffs) per_coeff[i].emplace_back(u, c);
    }
    for (int i = 0; i < B_.size(); ++i) {
      std::vector<std::pair<int, Rat>> terms;
      terms.emplace_back(from.v[i], Rat(1));
      for (auto& [u, c] : per_coeff[i]) terms.emplace_back(u, -c);
      terms.emplace_back(to.v[i], Rat(-1));
      out_.lp.add_row(std::move(terms), Rat(0), /*is_eq=*/false);
    }
  }

  // Q:Assign with Q:Weaken wrapped around both sides; `ctx_pre`/`ctx_post`
  // come from the surrounding node (the sample rule reuses this per value).
  SymAnnotation derive_assign_core(int x, const Expr& e, const SymAnnotation& post,
                                   const LinCtx& ctx_pre, const LinCtx& ctx_post,
                                   int label) {
    SymAnnotation post_inner = fresh("ap" + std::to_string(label));
    weaken(post_inner, post, ctx_post);
    StableSet S = stable_set(x, e, B_, ctx_pre, m_);
    // Unstable base functions must carry no potential in the postcondition.
    std::vector<char> stable(B_.size(), 0);
    for (int j : S.stable) stable[j] = 1;
    SymAnnotation pre_inner = fresh("ad" + std::to_string(label));
    // pre = A post': row i gathers a_{i,j} * post'_j over stable columns j.
    std::vector<std::vector<std::pair<int, Rat>>> rows(B_.size());
    for (int j = 0; j < B_.size(); ++j) {
      if (!stable[j]) {
        out_.lp.add_row({{post_inner.v[j], Rat(1)}}, Rat(0), true);
        continue;
      }
      for (auto& [i, a] : S.columns[j]) rows[i].emplace_back(post_inner.v[j], a);
    }
    for (int i = 0; i < B_.size(); ++i) {
      auto terms = rows[i];
      terms.emplace_back(pre_inner.v[i], Rat(-1));
      out_.lp.add_row(std::move(terms), Rat(0), true);
    }
    SymAnnotation pre_outer = fresh("aw" + std::to_string(label));
    weaken(pre_outer, pre_inner, ctx_pre);
    return pre_outer;
  }

  // Whether the derived precondition of a command already sits behind a
  // weakening step taken under that command's own entry context.
  static bool starts_pre_weakened(const Command& c) {
    switch (c.kind) {
      case Command::Kind::Assign:
      case Command::Kind::Call:
        return true;
      case Command::Kind::Seq:
        return starts_pre_weakened(*c.c1);
      default:
        return false;
    }
  }

  SymAnnotation derive(const Command& c, const SymAnnotation& post) {
    SymAnnotation pre = derive_dispatch(c, post);
    out_.pre_of_label[c.label] = pre;
    out_.post_of_label[c.label] = post;
    return pre;
  }

  SymAnnotation derive_dispatch(const Command& c, const SymAnnotation& post) {
    switch (c.kind) {
      case Command::Kind::Skip:
      case Command::Kind::Assert:
        return post;  // Q:Skip / Q:Assert
      case Command::Kind::Abort: {
        // Q:Abort: {0} abort {Q'}
        SymAnnotation pre = fresh("abort" + std::to_string(c.label));
        for (int i = 0; i < B_.size(); ++i)
          out_.lp.add_row({{pre.v[i], Rat(1)}}, Rat(0), true);
        return pre;
      }
      case Command::Kind::Tick: {
        // Q:Tick: constant entry shifted by the tick amount.
        SymAnnotation pre = fresh("tick" + std::to_string(c.label));
        for (int i = 0; i < B_.size(); ++i) {
          out_.lp.add_row({{pre.v[i], Rat(1)}, {post.v[i], Rat(-1)}},
                          i == 0 ? c.amount : Rat(0), true);
        }
        return pre;
      }
      case Command::Kind::Assign:
        return derive_assign_core(m_.var(c.var), *c.rhs, post, cm_.pre_of(c),
                                  cm_.post_of(c), c.label);
      case Command::Kind::Sample: {
        // Q:Sample: one assignment triple per support value, combined with the
        // distribution weights.
        auto support = dist_support(c.dist);
        SymAnnotation pre = fresh("sam" + std::to_string(c.label));
        std::vector<SymAnnotation> branch;
        for (auto& [value, mass] : support) {
          ExprPtr rhs = Expr::make_bin(c.sample_add ? BinOp::Add : BinOp::Sub,
                                       c.rhs->clone(), Expr::make_num(value));
          branch.push_back(derive_assign_core(m_.var(c.var), *rhs, post, cm_.pre_of(c),
                                              cm_.post_of(c), c.label));
        }
        for (int i = 0; i < B_.size(); ++i) {
          std::vector<std::pair<int, Rat>> terms;
          terms.emplace_back(pre.v[i], Rat(-1));
          for (size_t k = 0; k < support.size(); ++k)
            terms.emplace_back(branch[k].v[i], support[k].second);
          out_.lp.add_row(std::move(terms), Rat(0), true);
        }
        return pre;
      }
      case Command::Kind::ProbIf: {
        // Q:PIf: pre = p.Q1 + (1-p).Q2, shared postcondition.
        SymAnnotation q1 = derive(*c.c1, post);
        SymAnnotation q2 = derive(*c.c2, post);
        SymAnnotation pre = fresh("pif" + std::to_string(c.label));
        for (int i = 0; i < B_.size(); ++i) {
          out_.lp.add_row({{pre.v[i], Rat(-1)},
                           {q1.v[i], c.prob},
                           {q2.v[i], 1 - c.prob}},
                          Rat(0), true);
        }
        return pre;
      }
      case Command::Kind::NonDetIf:
      case Command::Kind::CondIf: {
        // Both branches share the pre and post annotations.
        SymAnnotation q1 = derive(*c.c1, post);
        SymAnnotation q2 = derive(*c.c2, post);
        equal(q1, q2);
        return q1;
      }
      case Command::Kind::Seq: {
        SymAnnotation mid = derive(*c.c2, post);
        return derive(*c.c1, mid);
      }
      case Command::Kind::While: {
        // Q:Loop: a single annotation is the loop pre, the body post and the
        // loop post; weakening is inserted at the body entry (unless the
        // first body command already carries one under the same context) and
        // after the loop.
        SymAnnotation inv = fresh("inv" + std::to_string(c.label));
        SymAnnotation body_pre = derive(*c.c1, inv);
        if (starts_pre_weakened(*c.c1)) {
          equal(inv, body_pre);
        } else {
          LinCtx body_entry = ctx_assume(cm_.pre_of(c), *c.guard, m_);
          weaken(inv, body_pre, body_entry);
        }
        weaken(inv, post, cm_.post_of(c));
        return inv;
      }
      case Command::Kind::Call: {
        // Q:Call: spec plus a nonnegative constant frame, weakened on both
        // sides.
        auto& specs = out_.specs.at(c.callee);
        int idx = call_counter_[c.callee]++ % static_cast<int>(specs.size());
        const ProcSpec& spec = specs[idx];
        int frame = out_.lp.add_var("frame" + std::to_string(c.label), true);
        SymAnnotation post_plus = fresh("cp" + std::to_string(c.label));
        for (int i = 0; i < B_.size(); ++i) {
          std::vector<std::pair<int, Rat>> terms{{post_plus.v[i], Rat(-1)},
                                                 {spec.post.v[i], Rat(1)}};
          if (i == 0) terms.emplace_back(frame, Rat(1));
          out_.lp.add_row(std::move(terms), Rat(0), true);
        }
        weaken(post_plus, post, cm_.post_of(c));
        SymAnnotation pre_plus = fresh("cq" + std::to_string(c.label));
        for (int i = 0; i < B_.size(); ++i) {
          std::vector<std::pair<int, Rat>> terms{{pre_plus.v[i], Rat(-1)},
                                                 {spec.pre.v[i], Rat(1)}};
          if (i == 0) terms.emplace_back(frame, Rat(1));
          out_.lp.add_row(std::move(terms), Rat(0), true);
        }
        SymAnnotation pre = fresh("cw" + std::to_string(c.label));
        weaken(pre, pre_plus, cm_.pre_of(c));
        return pre;
      }
    }
    assert(false && "unreachable");
    return post;
  }

  const Module& m_;
  const BaseFnSet& B_;
  const ContextMap& cm_;
  const std::vector<RewriteFn>& rewrites_;
  const DeriveOptions& opts_;
  DeriveResult& out_;
  std::map<std::string, int> call_counter_;
};

}  // namespace

DeriveResult derive_program(const Module& m, const BaseFnSet& B, const ContextMap& cm,
                            const std::vector<RewriteFn>& rewrites,
                            const DeriveOptions& opts) {
  DeriveResult out;
  Derivation d(m, B, cm, rewrites, opts, out);
  d.run();
  return out;
}

std::vector<std::vector<std::pair<int, Rat>>> objective_passes(
    const SymAnnotation& root, const BaseFnSet& B, int degree) {
  auto atoms = B.atom_list();
  auto contains = [](const IntervalAtom& outer, const IntervalAtom& inner) {
    return outer.lo == inner.lo && outer.hi == inner.hi && outer.shift >= inner.shift;
  };
  auto atom_weight = [&](const IntervalAtom& a) {
    int count = 0;
    for (auto& o : atoms)
      if (contains(o, a)) ++count;
    Rat w(1);
    for (int i = 0; i < count; ++i) w *= 10;
    return w;
  };
  std::vector<std::vector<std::pair<int, Rat>>> passes;
  for (int d = degree; d >= 1; --d) {
    std::vector<std::pair<int, Rat>> pass;
    for (int i = 0; i < B.size(); ++i) {
      if (B.fns[i].degree() != d) continue;
      Rat w(1);
      for (auto& a : B.fns[i].atoms) w *= atom_weight(a);
      pass.emplace_back(root.v[i], w);
    }
    if (!pass.empty()) passes.push_back(std::move(pass));
  }
  passes.push_back({{root.v[0], Rat(1)}});  // the constant entry last
  return passes;
}

}  // namespace pbound
