// SPDX-License-Identifier: Apache-2.0
#include "pbound/ert.hpp"

#include <pthread.h>

#include <map>
#include <tuple>
#include <unordered_map>

namespace pbound {

namespace {

// Continuations are hash-consed linked work lists; memoization keys are
// (continuation id, state).
struct Kont {
  enum class Kind { Done, Cmd, Loop, Ret };
  Kind kind;
  const Command* cmd = nullptr;
  long long remaining = 0;  // Loop budget
  int next = -1;
  int call_depth = 0;
};

struct StateHash {
  size_t operator()(const std::pair<int, State>& key) const {
    size_t h = std::hash<int>()(key.first);
    for (long long v : key.second)
      h = h * 0x100000001b3ULL + std::hash<long long>()(static_cast<size_t>(v));
    return h;
  }
};

class ErtEval {
 public:
  ErtEval(const Module& m, const ErtOptions& opts) : m_(m), opts_(opts) {
    done_ = intern(Kont{Kont::Kind::Done, nullptr, 0, -1, 0});
  }

  ErtResult eval_program(const State& s0) {
    int k = cmd_kont(m_.prog->main_body.get(), done_);
    auto [cost, residual] = eval(s0, k);
    return ErtResult{cost, residual};
  }

 private:
  using Value = std::pair<Rat, Rat>;  // (expected cost, residual mass)

  int intern(const Kont& k) {
    auto key = std::make_tuple((int)k.kind, k.cmd, k.remaining, k.next);
    auto it = intern_.find(key);
    if (it != intern_.end()) return it->second;
    konts_.push_back(k);
    int id = static_cast<int>(konts_.size()) - 1;
    intern_.emplace(key, id);
    return id;
  }

  int cmd_kont(const Command* c, int next) {
    Kont k{Kont::Kind::Cmd, c, 0, next, konts_[next].call_depth};
    return intern(k);
  }
  int loop_kont(const Command* w, long long remaining, int next) {
    Kont k{Kont::Kind::Loop, w, remaining, next, konts_[next].call_depth};
    return intern(k);
  }
  int ret_kont(int next) {
    Kont k{Kont::Kind::Ret, nullptr, 0, next, konts_[next].call_depth + 1};
    return intern(k);
  }

  long long eval_expr(const Expr& e, const State& s) {
    switch (e.kind) {
      case Expr::Kind::Var: return s[m_.var(e.var)];
      case Expr::Kind::Num: return e.num;
      case Expr::Kind::Bin: {
        long long l = eval_expr(*e.lhs, s), r = eval_expr(*e.rhs, s);
        switch (e.op) {
          case BinOp::Add: return l + r;
          case BinOp::Sub: return l - r;
          case BinOp::Mul: return l * r;
          case BinOp::Div: return r == 0 ? 0 : l / r;
          case BinOp::Mod: return r == 0 ? 0 : l % r;
          case BinOp::Eq: return l == r;
          case BinOp::Ne: return l != r;
          case BinOp::Gt: return l > r;
          case BinOp::Lt: return l < r;
          case BinOp::Le: return l <= r;
          case BinOp::Ge: return l >= r;
          case BinOp::And: return (l != 0 && r != 0) ? 1 : 0;
          case BinOp::Or: return (l != 0 || r != 0) ? 1 : 0;
        }
        return 0;
      }
    }
    return 0;
  }

  Value eval(const State& s, int k) {
    if (k == done_) {
      Rat v(0);
      if (opts_.terminal) v = opts_.terminal->eval(s);
      return {v, Rat(0)};
    }
    auto key = std::make_pair(k, s);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (memo_.size() >= opts_.memo_cap) throw SupportCapExceeded{};
    Value v = compute(s, k);
    memo_.emplace(std::move(key), v);
    return v;
  }

  Value compute(const State& s, int k) {
    const Kont node = konts_[k];
    if (node.kind == Kont::Kind::Ret) return eval(s, node.next);
    if (node.kind == Kont::Kind::Loop) {
      const Command* w = node.cmd;
      if (eval_expr(*w->guard, s) == 0) return eval(s, node.next);
      if (node.remaining == 0) return {Rat(0), Rat(1)};  // while^0 = abort
      int kb = cmd_kont(w->c1.get(), loop_kont(w, node.remaining - 1, node.next));
      return eval(s, kb);
    }
    const Command* c = node.cmd;
    int next = node.next;
    switch (c->kind) {
      case Command::Kind::Skip:
        return eval(s, next);
      case Command::Kind::Abort:
        return {Rat(0), Rat(0)};  // diverges: zero cost, never terminates
      case Command::Kind::Assert:
        if (eval_expr(*c->guard, s) == 0) return {Rat(0), Rat(0)};
        return eval(s, next);
      case Command::Kind::Tick: {
        Value v = eval(s, next);
        v.first += c->amount;
        return v;
      }
      case Command::Kind::Assign: {
        State s2 = s;
        s2[m_.var(c->var)] = eval_expr(*c->rhs, s);
        return eval(s2, next);
      }
      case Command::Kind::Sample: {
        long long base = eval_expr(*c->rhs, s);
        Value acc{Rat(0), Rat(0)};
        for (auto& [value, mass] : dist_table(c)) {
          State s2 = s;
          s2[m_.var(c->var)] = c->sample_add ? base + value : base - value;
          Value v = eval(s2, next);
          acc.first += mass * v.first;
          acc.second += mass * v.second;
        }
        return acc;
      }
      case Command::Kind::ProbIf: {
        Value a = eval(s, cmd_kont(c->c1.get(), next));
        Value b = eval(s, cmd_kont(c->c2.get(), next));
        return {c->prob * a.first + (1 - c->prob) * b.first,
                c->prob * a.second + (1 - c->prob) * b.second};
      }
      case Command::Kind::NonDetIf: {
        // Pointwise max over the two branches (demonic expected cost).
        Value a = eval(s, cmd_kont(c->c1.get(), next));
        Value b = eval(s, cmd_kont(c->c2.get(), next));
        if (a.first > b.first) return a;
        if (b.first > a.first) return b;
        return a.second >= b.second ? a : b;
      }
      case Command::Kind::CondIf:
        return eval(s, cmd_kont(eval_expr(*c->guard, s) != 0 ? c->c1.get() : c->c2.get(),
                                next));
      case Command::Kind::Seq:
        return eval(s, cmd_kont(c->c1.get(), cmd_kont(c->c2.get(), next)));
      case Command::Kind::While:
        return eval(s, loop_kont(c, opts_.unroll, next));
      case Command::Kind::Call: {
        if (konts_[next].call_depth + 1 > opts_.unroll) return {Rat(0), Rat(1)};
        const Command* body = m_.proc_bodies.at(c->callee);
        return eval(s, cmd_kont(body, ret_kont(next)));
      }
    }
    return {Rat(0), Rat(0)};
  }

  const std::vector<std::pair<long long, Rat>>& dist_table(const Command* c) {
    auto it = dists_.find(c);
    if (it == dists_.end()) it = dists_.emplace(c, dist_support(c->dist)).first;
    return it->second;
  }

  const Module& m_;
  const ErtOptions& opts_;
  std::vector<Kont> konts_;
  std::map<std::tuple<int, const Command*, long long, int>, int> intern_;
  std::unordered_map<std::pair<int, State>, Value, StateHash> memo_;
  std::map<const Command*, std::vector<std::pair<long long, Rat>>> dists_;
  int done_ = -1;
};

}  // namespace

// The evaluation recurses along whole program paths; run it on a thread with
// a generous stack so deep truncations do not overflow.
ErtResult ert_truncated(const Module& m, const State& initial, const ErtOptions& opts) {
  ErtResult result;
  std::exception_ptr err;
  auto body = [&] {
    try {
      ErtEval ev(m, opts);
      result = ev.eval_program(initial);
    } catch (...) {
      err = std::current_exception();
    }
  };
  using Fn = decltype(body);
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, 512ull * 1024 * 1024);
  pthread_t tid;
  auto trampoline = [](void* arg) -> void* {
    (*static_cast<Fn*>(arg))();
    return nullptr;
  };
  if (pthread_create(&tid, &attr, trampoline, &body) != 0) {
    pthread_attr_destroy(&attr);
    body();  // fall back to the current stack
  } else {
    pthread_join(tid, nullptr);
    pthread_attr_destroy(&attr);
  }
  if (err) std::rethrow_exception(err);
  return result;
}

}  // namespace pbound
