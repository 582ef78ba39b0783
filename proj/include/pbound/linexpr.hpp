// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbound/ast.hpp"
#include "pbound/module.hpp"
#include "pbound/rational.hpp"

namespace pbound {

// constant + sum of coefficient * variable, variables by module index.
struct LinExpr {
  Rat constant;
  std::map<int, Rat> coef;

  LinExpr() : constant(0) {}
  explicit LinExpr(Rat c) : constant(std::move(c)) {}

  static LinExpr variable(int v) {
    LinExpr e;
    e.coef[v] = 1;
    return e;
  }

  void add_term(int v, const Rat& c) {
    auto it = coef.find(v);
    if (it == coef.end()) {
      if (c != 0) coef.emplace(v, c);
    } else {
      it->second += c;
      if (it->second == 0) coef.erase(it);
    }
  }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(const Rat& f);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, const Rat& f) { return a *= f; }

  bool is_constant() const { return coef.empty(); }
  bool operator==(const LinExpr& o) const {
    return constant == o.constant && coef == o.coef;
  }
  bool operator<(const LinExpr& o) const {
    if (constant != o.constant) return constant < o.constant;
    return coef < o.coef;
  }

  Rat eval(const std::vector<long long>& state) const;

  // gcd-scaled integer coefficients, positive leading coefficient preserved
  // (rows mean expr >= 0, so only positive scaling).
  LinExpr normalized() const;

  std::string to_string(const Module& m) const;
};

// Expr -> LinExpr when the expression is linear with integer coefficients.
std::optional<LinExpr> linearize(const Expr& e, const Module& m);

// Conjunction of rows `expr >= 0`; `bottom` marks unreachability.
struct LinCtx {
  bool bottom = false;
  std::vector<LinExpr> rows;

  static LinCtx top() { return LinCtx{}; }
  static LinCtx bot() {
    LinCtx c;
    c.bottom = true;
    return c;
  }

  bool is_top() const { return !bottom && rows.empty(); }
  void add(const LinExpr& row);
  std::string to_string(const Module& m) const;
  bool operator==(const LinCtx& o) const;
};

// Rational entailment: every rational point of ctx satisfies goal >= 0.
// Decided by LP; sound (and complete over the rationals, by LP duality).
bool entails(const LinCtx& ctx, const LinExpr& goal);

// Both-way entailment of whole contexts.
bool ctx_equiv(const LinCtx& a, const LinCtx& b);
bool ctx_leq(const LinCtx& stronger, const LinCtx& weaker);

// Deduplicate rows and drop rows entailed by the rest.
LinCtx canonicalize(const LinCtx& ctx);

// ctx /\ e, translating conjunctions of linear comparisons; anything
// non-linear is dropped (sound over-approximation). Strict integer
// comparisons are tightened (a > b  ~>  a - b - 1 >= 0).
LinCtx ctx_assume(const LinCtx& ctx, const Expr& e, const Module& m);
// ctx /\ not e.
LinCtx ctx_assume_not(const LinCtx& ctx, const Expr& e, const Module& m);

// Strongest linear postcondition of x := e (Fourier-Motzkin projection);
// havocs x when e is not linear.
LinCtx ctx_assign(const LinCtx& ctx, int x, const Expr* e, const Module& m);

// Post context of x := e bop D, joining the two support extremes.
LinCtx ctx_sample(const LinCtx& ctx, int x, const Expr& e, bool add, const Dist& d,
                  const Module& m);

// Keep rows entailed by both sides.
LinCtx ctx_join(const LinCtx& a, const LinCtx& b);

}  // namespace pbound
