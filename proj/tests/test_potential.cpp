// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "pbound/parser.hpp"
#include "pbound/pipeline.hpp"
#include "pbound/potential.hpp"

using namespace pbound;

namespace {

IntervalAtom atom(int lo, int hi, long long shift) { return IntervalAtom{lo, hi, shift}; }

const Expr& rhs_of(const Program& p) { return *p.main_body->rhs; }

}  // namespace

TEST_CASE("eval_base") {
  // |[0,x]| at x=5.
  BaseFn b1{{atom(-1, 0, 0)}};
  CHECK(eval_base(b1, {5}) == 5);
  CHECK(eval_base(b1, {-3}) == 0);
  // The constant function.
  CHECK(eval_base(BaseFn{}, {123}) == 1);
  // |[s_min,s]| * |[0,s_min]| at s=7, s_min=3  (vars: 0=s, 1=s_min).
  BaseFn b2{{atom(1, 0, 0), atom(-1, 1, 0)}};
  CHECK(eval_base(b2, {7, 3}) == 12);
}

TEST_CASE("eval_potential matches the worked example") {
  // B = {1, |[0,x]|, |[1,x]|, |[2,x]|}, Q = (0, 3/5, 0, 0), x = 10 -> 6.
  BaseFnSet B = close_under_products(
      {atom(-1, 0, 0), atom(-1, 0, -1), atom(-1, 0, -2)}, 1);
  REQUIRE(B.size() == 4);
  Coeffs q(4, Rat(0));
  q[B.index_of(BaseFn{{atom(-1, 0, 0)}})] = Rat(3, 5);
  CHECK(eval_potential(q, B, {10}) == 6);
  CHECK(eval_potential(Coeffs(4, Rat(0)), B, {10}) == 0);
}

TEST_CASE("eval_potential on the rdwalk bound shape") {
  // 2*|[x,n+1]| at x=0,n=100 -> 202  (vars: 0=x, 1=n).
  BaseFnSet B = close_under_products({atom(0, 1, 1)}, 1);
  Coeffs q(B.size(), Rat(0));
  q[B.index_of(BaseFn{{atom(0, 1, 1)}})] = 2;
  CHECK(eval_potential(q, B, {0, 100}) == 202);
}

TEST_CASE("eval_potential is linear in the annotation") {
  BaseFnSet B = close_under_products({atom(-1, 0, 0), atom(0, 1, 0)}, 2);
  std::mt19937_64 rng(11);
  auto coin = [&](int lo, int hi) {
    return (long long)(lo + rng() % (uint64_t)(hi - lo + 1));
  };
  for (int t = 0; t < 300; ++t) {
    Coeffs q1(B.size()), q2(B.size()), mix(B.size());
    Rat lam((long)coin(-4, 4), 3), mu((long)coin(-4, 4), 5);
    lam.canonicalize();
    mu.canonicalize();
    for (int i = 0; i < B.size(); ++i) {
      q1[i] = Rat((long)coin(-9, 9));
      q2[i] = Rat((long)coin(-9, 9));
      mix[i] = lam * q1[i] + mu * q2[i];
    }
    std::vector<long long> st{coin(-20, 20), coin(-20, 20)};
    CHECK(eval_potential(mix, B, st) ==
          lam * eval_potential(q1, B, st) + mu * eval_potential(q2, B, st));
  }
}

TEST_CASE("substitution on the worked-example base set") {
  Program p = parse_program("var x; skip;");
  Module m(p);
  BaseFnSet B = close_under_products(
      {atom(-1, 0, 0), atom(-1, 0, -1), atom(-1, 0, -2)}, 1);
  LinCtx ctx;
  {
    LinExpr g{Rat(-2)};
    g.add_term(0, Rat(1));
    ctx.add(g);  // x >= 2
  }
  auto dec = parse_program("var x; x = x - 1;");

  // |[0,x]| becomes |[1,x]|.
  auto c1 = substitute(BaseFn{{atom(-1, 0, 0)}}, 0, rhs_of(dec), B, ctx, m);
  REQUIRE(c1.has_value());
  REQUIRE(c1->size() == 1);
  CHECK((*c1)[0].first == B.index_of(BaseFn{{atom(-1, 0, -1)}}));
  CHECK((*c1)[0].second == 1);

  // |[2,x]| is unstable: |[3,x]| is outside B and x>=3 is not provable.
  auto c2 = substitute(BaseFn{{atom(-1, 0, -2)}}, 0, rhs_of(dec), B, ctx, m);
  CHECK(!c2.has_value());

  // The constant function is always unchanged.
  auto c3 = substitute(BaseFn{}, 0, rhs_of(dec), B, ctx, m);
  REQUIRE(c3.has_value());
  REQUIRE(c3->size() == 1);
  CHECK((*c3)[0].first == 0);
  CHECK((*c3)[0].second == 1);
}

TEST_CASE("stable_set matches the worked example") {
  Program p = parse_program("var x; var y; skip;");
  Module m(p);
  BaseFnSet B = close_under_products(
      {atom(-1, 0, 0), atom(-1, 0, -1), atom(-1, 0, -2)}, 1);
  LinCtx ctx;
  {
    LinExpr g{Rat(-2)};
    g.add_term(0, Rat(1));
    ctx.add(g);
  }
  {
    auto dec = parse_program("var x; var y; x = x - 1;");
    StableSet s = stable_set(0, rhs_of(dec), B, ctx, m);
    // S = {1, |[0,x]|, |[1,x]|}
    std::vector<int> expect{0, B.index_of(BaseFn{{atom(-1, 0, -1)}}),
                            B.index_of(BaseFn{{atom(-1, 0, 0)}})};
    std::sort(expect.begin(), expect.end());
    CHECK(s.stable == expect);
  }
  {
    // Identity assignment: everything stable with the identity matrix.
    auto id = parse_program("var x; var y; x = x;");
    StableSet s = stable_set(0, rhs_of(id), B, LinCtx::top(), m);
    CHECK((int)s.stable.size() == B.size());
    for (int j : s.stable) {
      REQUIRE(s.columns[j].size() == 1);
      CHECK(s.columns[j][0] == std::pair<int, Rat>(j, Rat(1)));
    }
  }
  {
    // x := y over {1, |[0,x]|}: only the constant survives.
    BaseFnSet B2 = close_under_products({atom(-1, 0, 0)}, 1);
    auto cp = parse_program("var x; var y; x = y;");
    StableSet s = stable_set(0, rhs_of(cp), B2, LinCtx::top(), m);
    CHECK(s.stable == std::vector<int>{0});
  }
}

TEST_CASE("gen_base_functions reproduces the worked-example set") {
  Program p = parse_program("var x; while (x >= 2) { x=x-1 [1/3] x=x-2; tick(1); }");
  Module m(p);
  ContextMap cm = infer_contexts(m);
  BaseFnSet B = gen_base_functions(m, cm, 1);
  // {1, |[0,x]|, |[1,x]|, |[2,x]|}
  CHECK(B.size() == 4);
  CHECK(B.atom_known(atom(-1, 0, 0)));
  CHECK(B.atom_known(atom(-1, 0, -1)));
  CHECK(B.atom_known(atom(-1, 0, -2)));
}

TEST_CASE("gen_base_functions includes the walk overshoot atom") {
  Program p = parse_program(
      "var x; var n; while (x < n) { x = x + 2 [1/2] x = x - 1; tick(1); }");
  Module m(p);
  ContextMap cm = infer_contexts(m);
  BaseFnSet B = gen_base_functions(m, cm, 1);
  CHECK(B.atom_known(atom(0, 1, 1)));  // |[x,n+1]|
}

TEST_CASE("gen_base_functions with no guards is just the constant") {
  Program p = parse_program("var x; tick(3);");
  Module m(p);
  ContextMap cm = infer_contexts(m);
  BaseFnSet B = gen_base_functions(m, cm, 1);
  CHECK(B.size() == 1);
  CHECK(B.fns[0].is_one());
}

TEST_CASE("gen_rewrite_functions contains the worked-example rewrites") {
  BaseFnSet B = close_under_products(
      {atom(-1, 0, 0), atom(-1, 0, -1), atom(-1, 0, -2)}, 1);
  auto rws = gen_rewrite_functions(B, 1);
  int i0 = 0;  // the constant entry
  int ix0 = B.index_of(BaseFn{{atom(-1, 0, 0)}});
  int ix1 = B.index_of(BaseFn{{atom(-1, 0, -1)}});
  int ix2 = B.index_of(BaseFn{{atom(-1, 0, -2)}});
  auto has = [&](std::vector<std::pair<int, Rat>> want) {
    std::sort(want.begin(), want.end());
    for (auto& f : rws) {
      auto got = f.coeffs;
      std::sort(got.begin(), got.end());
      if (got == want) return true;
    }
    return false;
  };
  // F0 = 1
  CHECK(has({{i0, Rat(1)}}));
  // F1 = -1 + |[0,x]| - |[1,x]|
  CHECK(has({{i0, Rat(-1)}, {ix0, Rat(1)}, {ix1, Rat(-1)}}));
  // F2 = -2 + |[0,x]| - |[2,x]|
  CHECK(has({{i0, Rat(-2)}, {ix0, Rat(1)}, {ix2, Rat(-1)}}));
  // Absorption of every base function.
  CHECK(has({{ix0, Rat(1)}}));
  CHECK(has({{ix1, Rat(1)}}));
}

TEST_CASE("only the trivial rewrite exists over the bare constant") {
  BaseFnSet B = close_under_products({}, 2);
  auto rws = gen_rewrite_functions(B, 2);
  REQUIRE(rws.size() == 1);
  CHECK(rws[0].coeffs == std::vector<std::pair<int, Rat>>{{0, Rat(1)}});
  CHECK(rws[0].guard.empty());
}

TEST_CASE("rewrites are nonnegative under their guards, randomized") {
  // Generated over corpus-shaped base sets; ~10k checks total.
  std::vector<std::string> sources = {
      "var x; while (x >= 2) { x=x-1 [1/3] x=x-2; tick(1); }",
      "var x; var n; while (x < n) { x = x + 2 [1/2] x = x - 1; tick(1); }",
      "var h; var t; while (h <= t) { t = t + 1; h = h + unif(0,10) [1/2] skip; "
      "tick(1); }",
      "var n; var m; while (n > 0) { n = n - unif(0,1); m = n; while (m > 0) { m = m "
      "- 1 [1/3] skip; tick(1); } }",
  };
  std::mt19937_64 rng(99);
  auto coin = [&](int lo, int hi) {
    return (long long)(lo + rng() % (uint64_t)(hi - lo + 1));
  };
  long long checks = 0;
  for (auto& src : sources) {
    Program p = parse_program(src);
    Module m(p);
    ContextMap cm = infer_contexts(m);
    BaseFnSet B = gen_base_functions(m, cm, 2);
    auto rws = gen_rewrite_functions(B, 2);
    for (int t = 0; t < 60; ++t) {
      std::vector<long long> st(m.num_vars());
      for (auto& v : st) v = coin(-20, 20);
      for (auto& f : rws) {
        if (!f.guard_holds(st)) continue;
        ++checks;
        CAPTURE(f.name);
        CHECK(f.eval(B, st) >= 0);
      }
    }
  }
  CHECK(checks >= 10000);
}

TEST_CASE("substitution identity on random guarded states") {
  // For stable j and sigma |= ctx: b_j(sigma[x := e(sigma)]) equals the
  // returned combination exactly.
  Program p = parse_program(
      "var x; var n; while (x < n) { x = x + 2 [1/2] x = x - 1; tick(1); }");
  Module m(p);
  ContextMap cm = infer_contexts(m);
  BaseFnSet B = gen_base_functions(m, cm, 2);
  LinCtx ctx;
  {
    LinExpr g{Rat(-1)};
    g.add_term(1, Rat(1));
    g.add_term(0, Rat(-1));
    ctx.add(g);  // n - x - 1 >= 0
  }
  std::vector<std::string> assigns = {"x = x + 2;", "x = x - 1;", "x = n;",
                                      "x = x;", "n = n - 1;"};
  std::mt19937_64 rng(5);
  auto coin = [&](int lo, int hi) {
    return (long long)(lo + rng() % (uint64_t)(hi - lo + 1));
  };
  long long checks = 0;
  for (auto& text : assigns) {
    Program ap = parse_program("var x; var n; " + text);
    const Command& a = *ap.main_body;
    int x = m.var(a.var);
    StableSet s = stable_set(x, *a.rhs, B, ctx, m);
    for (int t = 0; t < 700; ++t) {
      std::vector<long long> st{coin(-20, 20), coin(-20, 20)};
      if (ctx.rows[0].eval(st) < 0) continue;  // rejection sampling sigma |= ctx
      std::vector<long long> post = st;
      {
        auto lin = linearize(*a.rhs, m);
        REQUIRE(lin.has_value());
        post[x] = rat_to_long(lin->eval(st));
      }
      for (int j : s.stable) {
        Rat lhs = eval_base(B.fns[j], post);
        Rat rhs(0);
        for (auto& [i, aij] : s.columns[j]) rhs += aij * eval_base(B.fns[i], st);
        CAPTURE(text);
        CAPTURE(j);
        CHECK(lhs == rhs);
        ++checks;
      }
    }
  }
  CHECK(checks >= 5000);
}

TEST_CASE("hints parse, validate and reject") {
  Program p = parse_program("var x; while (x >= 2) { x=x-1 [1/3] x=x-2; tick(1); }");
  Module m(p);
  ContextMap cm = infer_contexts(m);
  BaseFnSet B = gen_base_functions(m, cm, 1);
  auto ok = parse_hints(
      "x >= 1 => |[0,x]| - |[1,x]| - 1\n"
      "true => |[0,x]|\n",
      B, m);
  REQUIRE(ok.size() == 2);
  CHECK(ok[0].guard.size() == 1);
  CHECK(ok[1].guard.empty());
  // A combination that can go negative under its guard is rejected.
  CHECK_THROWS(parse_hints("true => |[0,x]| - |[1,x]| - 1\n", B, m));
  // Unknown monomials are rejected.
  CHECK_THROWS(parse_hints("true => |[0,q]|\n", B, m));
}
