// SPDX-License-Identifier: Apache-2.0
#include "pbound/contexts.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pbound {

namespace {

constexpr int kWidenThreshold = 3;
constexpr int kProcRounds = 3;

// Variables a procedure may write, transitively through calls.
std::map<std::string, std::set<int>> modified_vars(const Module& m) {
  std::map<std::string, std::set<int>> mod;
  for (auto& [name, body] : m.prog->procs) mod[name] = {};
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [name, body] : m.prog->procs) {
      std::set<int> s = mod[name];
      std::function<void(const Command&)> walk = [&](const Command& c) {
        if (c.kind == Command::Kind::Assign || c.kind == Command::Kind::Sample)
          s.insert(m.var(c.var));
        if (c.kind == Command::Kind::Call)
          for (int v : mod[c.callee]) s.insert(v);
        if (c.c1) walk(*c.c1);
        if (c.c2) walk(*c.c2);
      };
      walk(*body);
      if (s != mod[name]) {
        mod[name] = std::move(s);
        changed = true;
      }
    }
  }
  return mod;
}

class Analyzer {
 public:
  Analyzer(const Module& m, ContextMap& cm) : m_(m), cm_(cm) {
    proc_exit_.clear();
    for (auto& [name, body] : m.prog->procs) proc_exit_[name] = LinCtx::top();
    modified_ = modified_vars(m);
  }

  void run() {
    // Call postconditions start at top (sound) and are refined by re-running
    // the whole analysis with the previous round's procedure exit contexts.
    for (int round = 0; round < kProcRounds; ++round) {
      auto before = proc_exit_;
      for (auto& [name, body] : m_.prog->procs)
        proc_exit_[name] = analyze(*body, LinCtx::top());
      cm_.exit_of_main = analyze(*m_.prog->main_body, LinCtx::top());
      bool stable = true;
      for (auto& [name, ctx] : proc_exit_)
        if (!ctx_equiv(ctx, before[name])) stable = false;
      if (stable) break;
    }
    cm_.proc_exit.assign(proc_exit_.begin(), proc_exit_.end());
  }

 private:
  LinCtx analyze(const Command& c, LinCtx in) {
    cm_.pre[c.label] = in;
    LinCtx out;
    switch (c.kind) {
      case Command::Kind::Skip:
      case Command::Kind::Tick:
        out = in;
        break;
      case Command::Kind::Abort:
        out = LinCtx::bot();
        break;
      case Command::Kind::Assert:
        out = ctx_assume(in, *c.guard, m_);
        break;
      case Command::Kind::Assign:
        out = in.bottom ? in : ctx_assign(in, m_.var(c.var), c.rhs.get(), m_);
        break;
      case Command::Kind::Sample:
        out = in.bottom ? in
                        : ctx_sample(in, m_.var(c.var), *c.rhs, c.sample_add, c.dist, m_);
        break;
      case Command::Kind::ProbIf: {
        LinCtx o1 = analyze(*c.c1, in);
        LinCtx o2 = analyze(*c.c2, in);
        // A branch with probability 0 or 1 never runs the other side.
        if (c.prob == 1)
          out = o1;
        else if (c.prob == 0)
          out = o2;
        else
          out = ctx_join(o1, o2);
        break;
      }
      case Command::Kind::NonDetIf:
        out = ctx_join(analyze(*c.c1, in), analyze(*c.c2, in));
        break;
      case Command::Kind::CondIf: {
        LinCtx o1 = analyze(*c.c1, ctx_assume(in, *c.guard, m_));
        LinCtx o2 = analyze(*c.c2, ctx_assume_not(in, *c.guard, m_));
        out = ctx_join(o1, o2);
        break;
      }
      case Command::Kind::Seq:
        out = analyze(*c.c2, analyze(*c.c1, in));
        break;
      case Command::Kind::While: {
        LinCtx inv = in;
        for (int iter = 0;; ++iter) {
          LinCtx body_out = analyze(*c.c1, ctx_assume(inv, *c.guard, m_));
          LinCtx next;
          if (iter < kWidenThreshold) {
            next = ctx_join(inv, body_out);
          } else {
            // Widen: keep only the rows of inv that the body re-establishes.
            // The row set shrinks monotonically, so this terminates.
            next.bottom = inv.bottom && body_out.bottom;
            if (!next.bottom)
              for (auto& r : inv.rows)
                if (body_out.bottom || entails(body_out, r)) next.add(r);
            next = canonicalize(next);
          }
          if (ctx_equiv(next, inv)) break;
          inv = next;
        }
        // Final pass records per-label contexts under the fixed invariant.
        analyze(*c.c1, ctx_assume(inv, *c.guard, m_));
        cm_.pre[c.label] = inv;
        out = ctx_assume_not(inv, *c.guard, m_);
        break;
      }
      case Command::Kind::Call: {
        if (in.bottom) {
          out = in;
          break;
        }
        // Callee exit facts plus caller facts over unmodified variables.
        out = proc_exit_.at(c.callee);
        const auto& mod = modified_.at(c.callee);
        for (auto& r : in.rows) {
          bool touched = false;
          for (auto& [v, coef] : r.coef)
            if (mod.count(v)) touched = true;
          if (!touched) out.add(r);
        }
        out = canonicalize(out);
        break;
      }
    }
    cm_.post[c.label] = out;
    return out;
  }

  const Module& m_;
  ContextMap& cm_;
  std::map<std::string, LinCtx> proc_exit_;
  std::map<std::string, std::set<int>> modified_;
};

}  // namespace

ContextMap infer_contexts(const Module& m) {
  ContextMap cm;
  cm.pre.assign(m.prog->num_labels, LinCtx::top());
  cm.post.assign(m.prog->num_labels, LinCtx::top());
  Analyzer(m, cm).run();
  return cm;
}

std::string contexts_to_text(const Module& m, const ContextMap& cm) {
  std::ostringstream os;
  for (int l = 0; l < (int)cm.pre.size(); ++l) {
    os << "L" << l << ": pre  " << cm.pre[l].to_string(m) << "\n";
    os << "L" << l << ": post " << cm.post[l].to_string(m) << "\n";
  }
  return os.str();
}

}  // namespace pbound
