// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "pbound/module.hpp"
#include "pbound/rational.hpp"

namespace pbound {

using State = std::vector<long long>;

enum class Scheduler { First, Second, Random };

struct RunResult {
  Rat cost;
  State final_state;
  long long steps = 0;
  bool censored = false;       // step limit hit
  bool assert_failed = false;  // stopped by a failing assert
};

// Pre-state observer, used by the context-soundness tests.
struct TraceSink {
  virtual ~TraceSink() = default;
  virtual void visit(int label, const State& s) = 0;
};

struct RunOptions {
  Scheduler scheduler = Scheduler::First;
  long long step_limit = 10'000'000;
  TraceSink* trace = nullptr;
};

// One sampled execution of the pushdown-MDP semantics: probabilistic
// branches and samples drawn from the per-trial stream, nondeterminism
// resolved by the scheduler, cost = sum of tick rewards. abort spins until
// the step limit (censored); a failing assert stops with the cost so far.
RunResult run_once(const Module& m, State initial, uint64_t stream_seed,
                   const RunOptions& opts = {});

struct SimEstimate {
  long long trials = 0;
  long long censored = 0;
  double mean = 0, stderr_ = 0;
  double min = 0, max = 0, q25 = 0, q50 = 0, q75 = 0;
};

// Independent trials with per-trial RNG streams derived from (seed, index);
// the result is identical regardless of execution order or thread count.
// Censored runs are excluded from the moments and reported in `censored`.
SimEstimate estimate(const Module& m, const State& initial, long long trials,
                     uint64_t seed, const RunOptions& opts = {}, int threads = 0);

}  // namespace pbound
