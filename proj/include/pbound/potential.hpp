// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pbound/contexts.hpp"
#include "pbound/linexpr.hpp"
#include "pbound/module.hpp"

namespace pbound {

// |[lo, hi+shift]| = max(0, hi + shift - lo) where lo/hi are variables or
// absent (treated as 0). Constants on the lo side are folded into shift, so
// the triple is canonical.
struct IntervalAtom {
  int lo = -1;  // variable index or -1
  int hi = -1;
  long long shift = 0;

  bool operator==(const IntervalAtom& o) const {
    return lo == o.lo && hi == o.hi && shift == o.shift;
  }
  bool operator<(const IntervalAtom& o) const {
    if (lo != o.lo) return lo < o.lo;
    if (hi != o.hi) return hi < o.hi;
    return shift < o.shift;
  }

  long long raw(const std::vector<long long>& state) const {
    long long v = shift;
    if (hi >= 0) v += state[hi];
    if (lo >= 0) v -= state[lo];
    return v;
  }
  long long value(const std::vector<long long>& state) const {
    long long v = raw(state);
    return v > 0 ? v : 0;
  }

  // hi + shift - lo as a linear expression (the quantity whose positive part
  // the atom denotes).
  LinExpr raw_expr() const {
    LinExpr e(Rat(static_cast<long>(shift)));
    if (hi >= 0) e.add_term(hi, Rat(1));
    if (lo >= 0) e.add_term(lo, Rat(-1));
    return e;
  }

  std::string to_string(const Module& m) const;
};

// Product of atoms; the empty product is the constant function 1.
struct BaseFn {
  std::vector<IntervalAtom> atoms;  // sorted

  int degree() const { return static_cast<int>(atoms.size()); }
  bool is_one() const { return atoms.empty(); }
  bool operator==(const BaseFn& o) const { return atoms == o.atoms; }
  bool operator<(const BaseFn& o) const {
    if (atoms.size() != o.atoms.size()) return atoms.size() < o.atoms.size();
    return atoms < o.atoms;
  }
  std::string to_string(const Module& m) const;
};

Rat eval_base(const BaseFn& b, const std::vector<long long>& state);

struct BaseFnSet {
  std::vector<BaseFn> fns;  // index 0 is the constant function 1

  int size() const { return static_cast<int>(fns.size()); }
  int index_of(const BaseFn& b) const;
  bool atom_known(const IntervalAtom& a) const;
  std::vector<IntervalAtom> atom_list() const;
  std::string to_string(const Module& m) const;
};

// Builds 1 + all products of the given atoms up to the requested degree.
BaseFnSet close_under_products(std::vector<IntervalAtom> atoms, int degree);

// Numeric annotation: one coefficient per base function.
using Coeffs = std::vector<Rat>;

Rat eval_potential(const Coeffs& q, const BaseFnSet& B,
                   const std::vector<long long>& state);

// Linear combination of base functions, provably nonnegative whenever the
// guard holds; the currency of the weakening rule.
struct RewriteFn {
  std::vector<std::pair<int, Rat>> coeffs;  // sparse over B
  std::vector<LinExpr> guard;               // conjunction, each row >= 0
  std::string name;

  Rat eval(const BaseFnSet& B, const std::vector<long long>& state) const;
  bool guard_holds(const std::vector<long long>& state) const;
  bool applicable(const LinCtx& ctx) const;
};

// b[e/x] as an exact linear combination over B, valid on states satisfying
// ctx; nullopt when b is unstable under the assignment. Telescoping shifts
// |[a,b]| = |[a+1,b]| + 1 are used only when ctx proves them.
std::optional<std::vector<std::pair<int, Rat>>> substitute(
    const BaseFn& b, int x, const Expr& e, const BaseFnSet& B, const LinCtx& ctx,
    const Module& m);

struct StableSet {
  std::vector<int> stable;                                  // indices j with a column
  std::vector<std::vector<std::pair<int, Rat>>> columns;    // per j in B order
};

// Columns of the Q:Assign matrix A: column j is substitute(b_j) when stable,
// empty otherwise.
StableSet stable_set(int x, const Expr& e, const BaseFnSet& B, const LinCtx& ctx,
                     const Module& m);

// Heuristic base-function generation from guards, inferred inequalities and
// constant-shifted variants; closed under products up to `degree`.
BaseFnSet gen_base_functions(const Module& m, const ContextMap& cm, int degree);

// Shift, split/merge, absorption and constant rewrites over B, with their
// degree-d product variants.
std::vector<RewriteFn> gen_rewrite_functions(const BaseFnSet& B, int degree);

// User hints: one rewrite per line, "guard => combo", e.g.
//   x >= 1 => |[0,x]| - |[1,x]| - 1
// Guards "true" allowed. Hints are validated by randomized nonnegativity
// checks before being admitted.
std::vector<RewriteFn> parse_hints(const std::string& text, const BaseFnSet& B,
                                   const Module& m);

}  // namespace pbound
