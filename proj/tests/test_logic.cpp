// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "pbound/contexts.hpp"
#include "pbound/parser.hpp"

using namespace pbound;

namespace {

LinExpr row(std::initializer_list<std::pair<int, int>> terms, int constant) {
  LinExpr e{Rat(constant)};
  for (auto& [v, c] : terms) e.add_term(v, Rat(c));
  return e;
}

}  // namespace

TEST_CASE("entails basics") {
  // ctx {x-2>=0} |= x-1>=0, but top |= x>=0 fails.
  LinCtx ctx;
  ctx.add(row({{0, 1}}, -2));
  CHECK(entails(ctx, row({{0, 1}}, -1)));
  CHECK(!entails(LinCtx::top(), row({{0, 1}}, 0)));
  CHECK(entails(LinCtx::bot(), row({{0, 1}}, -1000)));
  // Rewrite applicability: F2 usable iff x >= 2.
  CHECK(entails(ctx, row({{0, 1}}, -2)));
  LinCtx weaker;
  weaker.add(row({{0, 1}}, -1));
  CHECK(!entails(weaker, row({{0, 1}}, -2)));
}

TEST_CASE("entails is reflexive and transitive on random contexts") {
  std::mt19937_64 rng(7);
  auto coin = [&](int lo, int hi) { return (int)(lo + rng() % (uint64_t)(hi - lo + 1)); };
  for (int trial = 0; trial < 60; ++trial) {
    auto make_ctx = [&] {
      LinCtx c;
      int rows = coin(1, 4);
      for (int i = 0; i < rows; ++i) {
        LinExpr e(Rat(coin(-5, 5)));
        for (int v = 0; v < 4; ++v) {
          int k = coin(-5, 5);
          if (k && coin(0, 1)) e.add_term(v, Rat(k));
        }
        c.add(e);
      }
      return canonicalize(c);
    };
    LinCtx a = make_ctx(), b = make_ctx(), c = make_ctx();
    for (auto& r : a.rows) CHECK(entails(a, r));  // reflexivity
    if (ctx_leq(a, b) && ctx_leq(b, c)) CHECK(ctx_leq(a, c));  // transitivity
  }
}

TEST_CASE("ctx_assume translates guards with integer tightening") {
  Program p = parse_program("var x; var n; var y; var m; skip;");
  Module m(p);
  {
    auto e = parse_program("var x; assume(x > 0);");
    LinCtx got = ctx_assume(LinCtx::top(), *e.main_body->guard, m);
    REQUIRE(got.rows.size() == 1);
    CHECK(got.rows[0] == row({{0, 1}}, -1));  // x - 1 >= 0
  }
  {
    auto e = parse_program("var x; var n; var y; var m; assume(x < n && y < m);");
    LinCtx base;
    base.add(row({{2, 1}}, 0));  // y >= 0
    LinCtx got = ctx_assume(base, *e.main_body->guard, m);
    CHECK(entails(got, row({{2, 1}}, 0)));
    CHECK(entails(got, row({{1, 1}, {0, -1}}, -1)));  // n - x - 1 >= 0
    CHECK(entails(got, row({{3, 1}, {2, -1}}, -1)));  // m - y - 1 >= 0
  }
  {
    // Nonlinear guard is dropped.
    auto e = parse_program("var x; assume(x * x > 3);");
    LinCtx got = ctx_assume(LinCtx::top(), *e.main_body->guard, m);
    CHECK(got.is_top());
  }
}

TEST_CASE("ctx_assume is monotone") {
  Program p = parse_program("var x; var n; skip;");
  Module m(p);
  auto guard_prog = parse_program("var x; var n; assume(x < n);");
  const Expr& g = *guard_prog.main_body->guard;
  LinCtx weak;
  weak.add(row({{0, 1}}, 0));
  LinCtx strong = weak;
  strong.add(row({{1, 1}}, -5));
  LinCtx aweak = ctx_assume(weak, g, m);
  LinCtx astrong = ctx_assume(strong, g, m);
  // Adding a conjunct never removes entailed facts.
  for (auto& r : aweak.rows) CHECK(entails(astrong, r));
}

TEST_CASE("ctx_assign substitutes and projects") {
  Program p = parse_program("var x; var y; skip;");
  Module m(p);
  {
    // {x>=2} x := x-1 -> {x>=1}
    LinCtx ctx;
    ctx.add(row({{0, 1}}, -2));
    auto e = parse_program("var x; var y; x = x - 1;");
    LinCtx got = ctx_assign(ctx, 0, e.main_body->rhs.get(), m);
    CHECK(entails(got, row({{0, 1}}, -1)));
    CHECK(!entails(got, row({{0, 1}}, -2)));
  }
  {
    // {x>=0} x := y -> x - y = 0 retained
    LinCtx ctx;
    ctx.add(row({{0, 1}}, 0));
    auto e = parse_program("var x; var y; x = y;");
    LinCtx got = ctx_assign(ctx, 0, e.main_body->rhs.get(), m);
    CHECK(entails(got, row({{0, 1}, {1, -1}}, 0)));
    CHECK(entails(got, row({{1, 1}, {0, -1}}, 0)));
  }
  {
    // Nonlinear rhs havocs x.
    LinCtx ctx;
    ctx.add(row({{0, 1}}, -5));
    ctx.add(row({{1, 1}}, 0));
    auto e = parse_program("var x; var y; x = x * x;");
    LinCtx got = ctx_assign(ctx, 0, e.main_body->rhs.get(), m);
    CHECK(!entails(got, row({{0, 1}}, -5)));
    CHECK(entails(got, row({{1, 1}}, 0)));  // facts about y survive
  }
}

TEST_CASE("ctx_sample joins the support extremes") {
  Program p = parse_program("var x; var n; skip;");
  Module m(p);
  {
    // {n-x>=1} x := x + unif(0,3) against the exact enumeration oracle.
    LinCtx ctx;
    ctx.add(row({{1, 1}, {0, -1}}, -1));
    auto e = parse_program("var x; var n; x = x + unif(0,3);");
    const Command& s = *e.main_body;
    LinCtx got = ctx_sample(ctx, 0, *s.rhs, s.sample_add, s.dist, m);
    LinCtx expect = [&] {
      LinCtx acc = LinCtx::bot();
      for (long long v = 0; v <= 3; ++v) {
        auto assign = parse_program("var x; var n; x = x + " + std::to_string(v) + ";");
        acc = ctx_join(acc, ctx_assign(ctx, 0, assign.main_body->rhs.get(), m));
      }
      return acc;
    }();
    for (auto& r : got.rows) CHECK(entails(expect, r));
    // The weakest of the two posts: n - x >= -2 holds, n - x >= -1 must not.
    CHECK(entails(got, row({{1, 1}, {0, -1}}, 2)));
    CHECK(!entails(got, row({{1, 1}, {0, -1}}, 1)));
  }
  {
    // Both extremes preserve x >= 0 under +ber.
    LinCtx ctx;
    ctx.add(row({{0, 1}}, 0));
    auto e = parse_program("var x; var n; x = x + ber(1/2);");
    const Command& s = *e.main_body;
    LinCtx got = ctx_sample(ctx, 0, *s.rhs, s.sample_add, s.dist, m);
    CHECK(entails(got, row({{0, 1}}, 0)));
  }
  {
    auto e = parse_program("var x; var n; x = x + ber(1/2);");
    const Command& s = *e.main_body;
    CHECK(ctx_sample(LinCtx::bot(), 0, *s.rhs, s.sample_add, s.dist, m).bottom);
  }
}

TEST_CASE("infer_contexts on straight-line and loop programs") {
  {
    Program p = parse_program("var x; var y; x = 1; y = x;");
    Module m(p);
    ContextMap cm = infer_contexts(m);
    CHECK(entails(cm.exit_of_main, row({{0, 1}}, -1)));  // x >= 1
    CHECK(entails(cm.exit_of_main, row({{1, 1}}, -1)));  // y >= 1
  }
  {
    Program p = parse_program("var x; while (true) { skip; }");
    Module m(p);
    ContextMap cm = infer_contexts(m);
    CHECK(cm.exit_of_main.bottom);
  }
  {
    // The worked-example loop: body entry context entails x >= 2.
    Program p = parse_program("var x; while (x >= 2) { x=x-1 [1/3] x=x-2; tick(1); }");
    Module m(p);
    ContextMap cm = infer_contexts(m);
    const Command& w = *p.main_body;
    const Command& body = *w.c1;
    CHECK(entails(cm.pre_of(body), row({{0, 1}}, -2)));
  }
}
