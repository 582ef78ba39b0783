// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "pbound/ert.hpp"
#include "pbound/parser.hpp"

using namespace pbound;

namespace {

struct Prog {
  Program p;
  Module m;
  explicit Prog(const std::string& src) : p(parse_program(src)), m(p) {}
};

}  // namespace

TEST_CASE("run_once on deterministic programs") {
  {
    Prog pr("var x; tick(5);");
    RunResult r = run_once(pr.m, {7}, 1);
    CHECK(r.cost == 5);
    CHECK(!r.censored);
  }
  {
    Prog pr("var x; x = 2; while (x > 0) { x = x - 1; tick(1); }");
    RunResult r = run_once(pr.m, {0}, 1);
    CHECK(r.cost == 2);
    CHECK(r.final_state[0] == 0);
  }
  {
    // The simple walk never enters the loop from x = 0.
    Prog pr("var x; while (x > 0) { x=x-1 [3/4] x=x+1; tick(1); }");
    RunResult r = run_once(pr.m, {0}, 99);
    CHECK(r.cost == 0);
  }
}

TEST_CASE("abort is censored, failed assert keeps cost") {
  {
    Prog pr("var x; tick(2); abort;");
    RunOptions opts;
    opts.step_limit = 1000;
    RunResult r = run_once(pr.m, {0}, 1, opts);
    CHECK(r.censored);
    CHECK(r.cost == 2);
  }
  {
    Prog pr("var x; tick(3); assert(x > 0); tick(4);");
    RunResult r = run_once(pr.m, {0}, 1);
    CHECK(r.assert_failed);
    CHECK(r.cost == 3);
  }
}

TEST_CASE("estimate basics") {
  {
    Prog pr("var x; tick(1);");
    SimEstimate est = estimate(pr.m, {0}, 100, 42);
    CHECK(est.mean == 1.0);
    CHECK(est.stderr_ == 0.0);
  }
  {
    Prog pr("var x; tick(1) [1/2] skip;");
    SimEstimate est = estimate(pr.m, {0}, 4000, 43);
    CHECK(std::abs(est.mean - 0.5) <= 3 * est.stderr_ + 1e-12);
  }
}

TEST_CASE("estimate is deterministic and order independent") {
  Prog pr("var x; var n; while (x < n) { x = x + 1 [1/2] skip; tick(1); }");
  SimEstimate a = estimate(pr.m, {0, 30}, 500, 7, {}, /*threads=*/1);
  SimEstimate b = estimate(pr.m, {0, 30}, 500, 7, {}, /*threads=*/4);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.min == b.min);
  CHECK(a.max == b.max);
}

TEST_CASE("simple random walk matches its closed form") {
  // T(n) = 2n; start distance 100 -> mean within 2% of 200.
  Prog pr("var x; while (x > 0) { x=x-1 [3/4] x=x+1; tick(1); }");
  SimEstimate est = estimate(pr.m, {100}, 10000, 20240817);
  CHECK(est.censored == 0);
  CHECK(std::abs(est.mean - 200.0) <= 0.02 * 200.0);
}

TEST_CASE("schedulers agree on nondeterminism-free programs") {
  Prog pr("var x; var n; while (x < n) { x = x + unif(0,2); tick(1); }");
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    RunOptions f, s, r;
    f.scheduler = Scheduler::First;
    s.scheduler = Scheduler::Second;
    r.scheduler = Scheduler::Random;
    Rat cf = run_once(pr.m, {0, 9}, seed, f).cost;
    Rat cs = run_once(pr.m, {0, 9}, seed, s).cost;
    Rat cr = run_once(pr.m, {0, 9}, seed, r).cost;
    CHECK(cf == cs);
    CHECK(cf == cr);
  }
}

TEST_CASE("ert_truncated basics") {
  {
    // tick(q) with f = 0 -> q with no residual.
    Prog pr("var x; tick(7/2);");
    ErtResult r = ert_truncated(pr.m, {0});
    CHECK(r.lower == Rat(7, 2));
    CHECK(r.residual == 0);
  }
  {
    // Loop-free body with terminal expectation f = 2x at x = k -> exactly 2k.
    Prog pr("var x; x=x-1 [3/4] x=x+1; tick(1);");
    for (long long k : {-3, 0, 1, 5, 40}) {
      ErtOptions opts;
      LinExpr f;
      f.add_term(0, Rat(2));
      opts.terminal = f;
      ErtResult r = ert_truncated(pr.m, {k}, opts);
      CHECK(r.lower == Rat(2 * static_cast<long>(k)));
      CHECK(r.residual == 0);
    }
  }
  {
    // Simple walk from x=1 at K=50: lower bound in [1.9, 2.0) with residual.
    Prog pr("var x; while (x > 0) { x=x-1 [3/4] x=x+1; tick(1); }");
    ErtOptions opts;
    opts.unroll = 50;
    ErtResult r = ert_truncated(pr.m, {1}, opts);
    CHECK(r.lower >= Rat(19, 10));
    CHECK(r.lower < 2);
    CHECK(r.residual > 0);
  }
}

TEST_CASE("ert_truncated is monotone in the unroll depth") {
  Prog pr("var x; while (x > 0) { x=x-1 [1/2] x=x+1; tick(1); }");
  Rat prev(-1);
  for (long long k : {1, 2, 4, 8, 16, 32}) {
    ErtOptions opts;
    opts.unroll = k;
    ErtResult r = ert_truncated(pr.m, {2}, opts);
    CHECK(r.lower >= prev);
    prev = r.lower;
  }
}

TEST_CASE("constant propagation for loop-free deterministic-choice-free code") {
  // ert(c, k+f) = k + ert(c, f) for nondeterminism-free loop-free commands.
  Prog pr("var x; var y; x = x + unif(0,3); { y = y + 1; tick(2); } [1/3] skip; "
          "tick(1);");
  for (long long k : {0, 1, 9}) {
    ErtOptions with_k, base;
    LinExpr f;
    f.add_term(1, Rat(1));  // f = y
    base.terminal = f;
    LinExpr fk = f;
    fk.constant += static_cast<long>(k);
    with_k.terminal = fk;
    ErtResult a = ert_truncated(pr.m, {4, 2}, with_k);
    ErtResult b = ert_truncated(pr.m, {4, 2}, base);
    CHECK(a.lower == b.lower + Rat(static_cast<long>(k)));
  }
}

TEST_CASE("nondeterminism evaluates to the pointwise max") {
  Prog pr("var x; if (*) { tick(1); } else { tick(3); }");
  ErtResult r = ert_truncated(pr.m, {0});
  CHECK(r.lower == 3);
}

TEST_CASE("ert call truncation and recursion") {
  {
    // Bounded recursion fully unrolls within the budget.
    Prog pr(
        "var l; var h; proc shrink { if (h > l) { l = l + 1 [1/2] h = h - 1; tick(1); "
        "call shrink; } } main { call shrink; }");
    ErtOptions opts;
    opts.unroll = 50;
    ErtResult r = ert_truncated(pr.m, {0, 10}, opts);
    CHECK(r.lower == 10);
    CHECK(r.residual == 0);
  }
  {
    // Unbounded recursion truncates with full residual mass.
    Prog pr("var x; proc p { call p; } main { call p; }");
    ErtOptions opts;
    opts.unroll = 10;
    ErtResult r = ert_truncated(pr.m, {0}, opts);
    CHECK(r.lower == 0);
    CHECK(r.residual == 1);
  }
}

TEST_CASE("simulator and oracle agree on loop-free fragments") {
  // estimate.mean within 4 stderr of the exact value in >= 95% of seeds.
  std::vector<std::string> fragments = {
      "var x; var y; tick(1) [1/3] { tick(2) [1/4] tick(3); }",
      "var x; var y; x = unif(0,5); while (x > 0) { x = x - 1; tick(1); }",
      "var x; var y; y = bin(4, 1/2); x = y + ber(1/2); tick(2) [1/2] skip;",
  };
  int agree = 0, total = 0;
  for (auto& src : fragments) {
    Prog pr(src);
    ErtOptions opts;
    opts.unroll = 64;
    Rat exact = ert_truncated(pr.m, {0, 0}, opts).lower;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      SimEstimate est = estimate(pr.m, {0, 0}, 2000, seed);
      double gap = std::abs(est.mean - exact.get_d());
      double tol = 4 * est.stderr_ + 1e-9;
      ++total;
      if (gap <= tol) ++agree;
    }
  }
  CHECK(agree >= (total * 95) / 100);
}
