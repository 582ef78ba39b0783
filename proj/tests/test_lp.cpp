// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <optional>
#include <random>

#include "pbound/lp.hpp"

using namespace pbound;

namespace {

// Independent oracle: enumerate candidate vertices as solutions of every
// n-subset of tight constraints (rows + variable bounds + a large box), take
// the best feasible one. Unboundedness is detected by the optimum escaping to
// the box: solving with box M and box 2M must agree.
struct OracleResult {
  bool feasible = false;
  bool bounded = false;
  Rat objective;
};

struct DenseRow {
  std::vector<Rat> a;
  Rat b;
  bool is_eq;
};

std::optional<std::vector<Rat>> solve_square(std::vector<std::vector<Rat>> m,
                                             std::vector<Rat> rhs) {
  int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (m[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;  // singular
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    Rat d = m[col][col];
    for (int j = 0; j < n; ++j) m[col][j] /= d;
    rhs[col] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rat f = m[r][col];
      for (int j = 0; j < n; ++j) m[r][j] -= f * m[col][j];
      rhs[r] -= f * rhs[col];
    }
  }
  return rhs;
}

OracleResult oracle_with_box(const LinearProgram& lp, long box) {
  int n = lp.num_vars();
  std::vector<DenseRow> rows;
  for (auto& r : lp.rows) {
    DenseRow d;
    d.a.assign(n, Rat(0));
    for (auto& [j, c] : r.terms) d.a[j] += c;
    d.b = r.rhs;
    d.is_eq = r.is_eq;
    rows.push_back(std::move(d));
  }
  for (int j = 0; j < n; ++j) {
    if (lp.nonneg[j]) {
      DenseRow d;
      d.a.assign(n, Rat(0));
      d.a[j] = 1;
      d.b = 0;
      d.is_eq = false;
      rows.push_back(std::move(d));
    } else {
      DenseRow d;  // x_j >= -box
      d.a.assign(n, Rat(0));
      d.a[j] = 1;
      d.b = -box;
      d.is_eq = false;
      rows.push_back(std::move(d));
    }
    DenseRow u;  // x_j <= box, i.e. -x_j >= -box
    u.a.assign(n, Rat(0));
    u.a[j] = -1;
    u.b = -box;
    u.is_eq = false;
    rows.push_back(std::move(u));
  }
  std::vector<Rat> cost(n, Rat(0));
  for (auto& [j, c] : lp.objective) cost[j] += c;

  auto feasible_point = [&](const std::vector<Rat>& x) {
    for (auto& r : rows) {
      Rat v(0);
      for (int j = 0; j < n; ++j) v += r.a[j] * x[j];
      if (r.is_eq ? (v != r.b) : (v < r.b)) return false;
    }
    return true;
  };

  OracleResult out;
  int m = static_cast<int>(rows.size());
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int from, int depth) {
    if (depth == n) {
      std::vector<std::vector<Rat>> mat(n, std::vector<Rat>(n));
      std::vector<Rat> rhs(n);
      for (int i = 0; i < n; ++i) {
        mat[i] = rows[pick[i]].a;
        rhs[i] = rows[pick[i]].b;
      }
      auto x = solve_square(std::move(mat), std::move(rhs));
      if (!x || !feasible_point(*x)) return;
      Rat obj(0);
      for (int j = 0; j < n; ++j) obj += cost[j] * (*x)[j];
      if (!out.feasible || obj < out.objective) out.objective = obj;
      out.feasible = true;
      return;
    }
    for (int i = from; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  out.bounded = true;  // meaning refined by the caller comparing boxes
  return out;
}

OracleResult oracle(const LinearProgram& lp) {
  OracleResult small = oracle_with_box(lp, 1000000);
  if (!small.feasible) return small;
  OracleResult big = oracle_with_box(lp, 2000000);
  OracleResult out;
  out.feasible = true;
  out.bounded = small.objective == big.objective;
  out.objective = small.objective;
  return out;
}

}  // namespace

TEST_CASE("minimal examples") {
  {
    // min x s.t. x >= 3
    LinearProgram lp;
    int x = lp.add_var("x", true);
    lp.add_row({{x, Rat(1)}}, Rat(3), false);
    lp.objective = {{x, Rat(1)}};
    auto res = solve_min(lp);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == 3);
    CHECK(res.values[x] == 3);
  }
  {
    // infeasible: x >= 1 and x <= 0
    LinearProgram lp;
    int x = lp.add_var("x", true);
    lp.add_row({{x, Rat(1)}}, Rat(1), false);
    lp.add_row({{x, Rat(-1)}}, Rat(0), false);
    CHECK(solve_min(lp).status == LpStatus::Infeasible);
  }
  {
    // unbounded: min -x s.t. x >= 0
    LinearProgram lp;
    int x = lp.add_var("x", true);
    lp.objective = {{x, Rat(-1)}};
    CHECK(solve_min(lp).status == LpStatus::Unbounded);
  }
  {
    // degenerate: no variables
    LinearProgram lp;
    auto res = solve_min(lp);
    CHECK(res.status == LpStatus::Optimal);
    CHECK(res.objective == 0);
  }
}

TEST_CASE("equality presolve keeps solutions exact") {
  // min y s.t. x = 2y + 1, x + y = 10  ->  y = 3, x = 7
  LinearProgram lp;
  int x = lp.add_var("x", true);
  int y = lp.add_var("y", true);
  lp.add_row({{x, Rat(1)}, {y, Rat(-2)}}, Rat(1), true);
  lp.add_row({{x, Rat(1)}, {y, Rat(1)}}, Rat(10), true);
  lp.objective = {{y, Rat(1)}};
  auto res = solve_min(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.values[x] == 7);
  CHECK(res.values[y] == 3);
}

TEST_CASE("simplex agrees with the vertex-enumeration oracle") {
  std::mt19937_64 rng(20240817);
  auto coin = [&](int lo, int hi) {
    return (int)(lo + rng() % (uint64_t)(hi - lo + 1));
  };
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp;
    int n = coin(1, 6);
    for (int j = 0; j < n; ++j)
      lp.add_var("x" + std::to_string(j), coin(0, 4) > 0);  // mostly nonneg
    int m = coin(1, 10);
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, Rat>> terms;
      for (int j = 0; j < n; ++j) {
        int c = coin(-9, 9);
        if (c != 0 && coin(0, 1)) terms.emplace_back(j, Rat(c));
      }
      if (terms.empty()) continue;
      lp.add_row(std::move(terms), Rat(coin(-9, 9)), coin(0, 3) == 0);
    }
    for (int j = 0; j < n; ++j) {
      int c = coin(-9, 9);
      if (c != 0) lp.objective.emplace_back(j, Rat(c));
    }
    CAPTURE(trial);
    CAPTURE(lp.to_text());
    auto mine = solve_min(lp);
    auto truth = oracle(lp);
    if (!truth.feasible) {
      CHECK(mine.status == LpStatus::Infeasible);
    } else if (!truth.bounded) {
      CHECK(mine.status == LpStatus::Unbounded);
    } else {
      REQUIRE(mine.status == LpStatus::Optimal);
      CHECK(mine.objective == truth.objective);
      // The returned point must satisfy every constraint exactly.
      for (auto& r : lp.rows) {
        Rat v(0);
        for (auto& [j, c] : r.terms) v += c * mine.values[j];
        if (r.is_eq)
          CHECK(v == r.rhs);
        else
          CHECK(v >= r.rhs);
      }
    }
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("solver determinism") {
  LinearProgram lp;
  int x = lp.add_var("x", true);
  int y = lp.add_var("y", true);
  lp.add_row({{x, Rat(1)}, {y, Rat(1)}}, Rat(4), false);
  lp.add_row({{x, Rat(2)}, {y, Rat(1)}}, Rat(5), false);
  lp.objective = {{x, Rat(1)}, {y, Rat(1)}};
  auto a = solve_min(lp);
  auto b = solve_min(lp);
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.objective == b.objective);
  CHECK(a.values == b.values);
}

TEST_CASE("iterative_minimize pins pass by pass") {
  // min over (x,y) >= 0 with x + y >= 5: first minimize 10x, then y.
  LinearProgram lp;
  int x = lp.add_var("x", true);
  int y = lp.add_var("y", true);
  lp.add_row({{x, Rat(1)}, {y, Rat(1)}}, Rat(5), false);
  auto res = iterative_minimize(lp, {{{x, Rat(10)}}, {{y, Rat(1)}}});
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.values[x] == 0);
  CHECK(res.values[y] == 5);
}
