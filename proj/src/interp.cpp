// SPDX-License-Identifier: Apache-2.0
#include "pbound/interp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace pbound {

namespace {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small deterministic generator (xorshift-style over a splitmix-seeded
// state); std::uniform_int_distribution is not portable across platforms.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(splitmix64(seed)) {}
  uint64_t next() {
    s = splitmix64(s);
    return s;
  }
  // Uniform in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }
  bool bernoulli(const Rat& p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    uint64_t den = mpz_get_ui(p.get_den_mpz_t());
    uint64_t num = mpz_get_ui(p.get_num_mpz_t());
    return below(den) < num;
  }
};

// Integer weights on a common denominator for exact inverse-CDF sampling.
struct DistTable {
  std::vector<long long> values;
  std::vector<uint64_t> cum;  // cumulative weights
  uint64_t total = 0;
};

DistTable build_table(const Dist& d) {
  DistTable t;
  auto support = dist_support(d);
  Int denom = 1;
  for (auto& [v, mass] : support)
    mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), mass.get_den_mpz_t());
  if (!denom.fits_ulong_p())
    throw std::runtime_error("distribution denominator too large to sample");
  uint64_t running = 0;
  for (auto& [v, mass] : support) {
    Rat w = mass * Rat(denom);
    w.canonicalize();
    running += mpz_get_ui(w.get_num_mpz_t());
    t.values.push_back(v);
    t.cum.push_back(running);
  }
  t.total = running;
  return t;
}

struct AssertStop {};
struct StepLimit {};

class Interp {
 public:
  Interp(const Module& m, State& state, Rng& rng, const RunOptions& opts)
      : m_(m), state_(state), rng_(rng), opts_(opts) {
    tick_count_.assign(m.prog->num_labels, 0);
  }

  void exec(const Command& c) {
    step();
    if (opts_.trace) opts_.trace->visit(c.label, state_);
    switch (c.kind) {
      case Command::Kind::Skip:
        return;
      case Command::Kind::Abort:
        for (;;) step();  // S:Abort self-loops until censoring
      case Command::Kind::Assert:
        if (eval(*c.guard) == 0) throw AssertStop{};
        return;
      case Command::Kind::Tick:
        ++tick_count_[c.label];
        return;
      case Command::Kind::Assign:
        state_[var(c)] = eval(*c.rhs);
        return;
      case Command::Kind::Sample: {
        long long base = eval(*c.rhs);
        long long v = draw(c);
        state_[var(c)] = c.sample_add ? base + v : base - v;
        return;
      }
      case Command::Kind::ProbIf:
        exec(rng_.bernoulli(c.prob) ? *c.c1 : *c.c2);
        return;
      case Command::Kind::NonDetIf:
        switch (opts_.scheduler) {
          case Scheduler::First: exec(*c.c1); return;
          case Scheduler::Second: exec(*c.c2); return;
          case Scheduler::Random:
            exec(rng_.below(2) == 0 ? *c.c1 : *c.c2);
            return;
        }
        return;
      case Command::Kind::CondIf:
        exec(eval(*c.guard) != 0 ? *c.c1 : *c.c2);
        return;
      case Command::Kind::Seq:
        exec(*c.c1);
        exec(*c.c2);
        return;
      case Command::Kind::While:
        while (eval(*c.guard) != 0) {
          exec(*c.c1);
          step();  // loop-head transition
        }
        return;
      case Command::Kind::Call:
        exec(*m_.proc_bodies.at(c.callee));
        return;
    }
  }

  Rat total_cost() const {
    Rat cost(0);
    for (int l = 0; l < (int)tick_count_.size(); ++l) {
      if (!tick_count_[l]) continue;
      cost += m_.by_label[l]->amount * Rat(static_cast<long>(tick_count_[l]));
    }
    return cost;
  }

  long long steps() const { return steps_; }

 private:
  void step() {
    if (++steps_ > opts_.step_limit) throw StepLimit{};
  }

  int var(const Command& c) {
    auto it = var_cache_.find(&c);
    if (it != var_cache_.end()) return it->second;
    int v = m_.var(c.var);
    var_cache_.emplace(&c, v);
    return v;
  }

  long long draw(const Command& c) {
    auto it = dist_cache_.find(&c);
    if (it == dist_cache_.end())
      it = dist_cache_.emplace(&c, build_table(c.dist)).first;
    const DistTable& t = it->second;
    if (t.total == 0) return 0;
    uint64_t r = rng_.below(t.total);
    size_t idx = std::upper_bound(t.cum.begin(), t.cum.end(), r) - t.cum.begin();
    return t.values[idx];
  }

  long long eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var: {
        auto it = evar_cache_.find(&e);
        if (it == evar_cache_.end())
          it = evar_cache_.emplace(&e, m_.var(e.var)).first;
        return state_[it->second];
      }
      case Expr::Kind::Num:
        return e.num;
      case Expr::Kind::Bin: {
        long long l = eval(*e.lhs), r = eval(*e.rhs);
        switch (e.op) {
          case BinOp::Add: return l + r;
          case BinOp::Sub: return l - r;
          case BinOp::Mul: return l * r;
          case BinOp::Div:
            if (r == 0) throw AssertStop{};  // dynamic division by zero stops the run
            return l / r;
          case BinOp::Mod:
            if (r == 0) throw AssertStop{};
            return l % r;
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

  const Module& m_;
  State& state_;
  Rng& rng_;
  const RunOptions& opts_;
  std::vector<long long> tick_count_;
  long long steps_ = 0;
  std::map<const Command*, int> var_cache_;
  std::map<const Expr*, int> evar_cache_;
  std::map<const Command*, DistTable> dist_cache_;
};

}  // namespace

RunResult run_once(const Module& m, State initial, uint64_t stream_seed,
                   const RunOptions& opts) {
  Rng rng(stream_seed);
  RunResult out;
  Interp interp(m, initial, rng, opts);
  try {
    interp.exec(*m.prog->main_body);
  } catch (AssertStop) {
    out.assert_failed = true;
  } catch (StepLimit) {
    out.censored = true;
  }
  out.cost = interp.total_cost();
  out.steps = interp.steps();
  out.final_state = std::move(initial);
  return out;
}

SimEstimate estimate(const Module& m, const State& initial, long long trials,
                     uint64_t seed, const RunOptions& opts, int threads) {
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = (int)std::min<long long>(threads, trials);
  std::vector<double> costs(trials);
  std::vector<char> censored(trials, 0);

  auto worker = [&](long long lo, long long hi) {
    for (long long t = lo; t < hi; ++t) {
      uint64_t stream = splitmix64(seed ^ (0xabcd1234ULL + (uint64_t)t * 0x9e3779b97f4a7c15ULL));
      RunResult r = run_once(m, initial, stream, opts);
      censored[t] = r.censored;
      costs[t] = r.censored ? 0.0 : r.cost.get_d();
    }
  };
  if (threads == 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    long long chunk = (trials + threads - 1) / threads;
    for (int i = 0; i < threads; ++i) {
      long long lo = i * chunk, hi = std::min<long long>(trials, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SimEstimate est;
  est.trials = trials;
  std::vector<double> kept;
  kept.reserve(trials);
  for (long long t = 0; t < trials; ++t) {
    if (censored[t])
      ++est.censored;
    else
      kept.push_back(costs[t]);
  }
  if (kept.empty()) return est;
  double sum = 0;
  for (double c : kept) sum += c;
  double n = static_cast<double>(kept.size());
  est.mean = sum / n;
  double ss = 0;
  for (double c : kept) ss += (c - est.mean) * (c - est.mean);
  est.stderr_ = kept.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  std::sort(kept.begin(), kept.end());
  est.min = kept.front();
  est.max = kept.back();
  auto quantile = [&](double q) {
    double pos = q * (n - 1);
    size_t i = static_cast<size_t>(pos);
    double frac = pos - i;
    if (i + 1 < kept.size()) return kept[i] * (1 - frac) + kept[i + 1] * frac;
    return kept[i];
  };
  est.q25 = quantile(0.25);
  est.q50 = quantile(0.5);
  est.q75 = quantile(0.75);
  return est;
}

}  // namespace pbound
