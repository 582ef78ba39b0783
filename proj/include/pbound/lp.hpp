// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pbound/rational.hpp"

namespace pbound {

// Exact rational linear program:   minimize c.x  subject to rows, with
// per-variable nonnegativity flags. Rows are  terms.x (>=|=) rhs.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, Rat>> terms;
    Rat rhs;
    bool is_eq = false;
  };

  std::vector<std::string> var_names;
  std::vector<char> nonneg;
  std::vector<Row> rows;
  std::vector<std::pair<int, Rat>> objective;

  int add_var(const std::string& name, bool nn) {
    var_names.push_back(name);
    nonneg.push_back(nn ? 1 : 0);
    return static_cast<int>(var_names.size()) - 1;
  }
  int num_vars() const { return static_cast<int>(var_names.size()); }

  void add_row(std::vector<std::pair<int, Rat>> terms, Rat rhs, bool is_eq) {
    rows.push_back(Row{std::move(terms), std::move(rhs), is_eq});
  }

  std::string to_text() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rat objective;
  std::vector<Rat> values;  // one per variable, valid when Optimal
};

// Exact two-phase simplex with Bland's rule, preceded by an equality
// presolve. Deterministic: identical inputs give identical solutions.
LpResult solve_min(const LinearProgram& lp);

// Feasibility only (objective ignored).
bool lp_feasible(const LinearProgram& lp);

// Lexicographic minimization: for each pass in order, minimize the weighted
// sum, then pin the solved values with equality constraints before the next
// pass. Throws on an unbounded pass (weights are expected positive) and
// asserts that pinning never destroys feasibility.
LpResult iterative_minimize(
    LinearProgram lp,
    const std::vector<std::vector<std::pair<int, Rat>>>& passes);

}  // namespace pbound
