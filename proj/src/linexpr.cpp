// SPDX-License-Identifier: Apache-2.0
#include "pbound/linexpr.hpp"

#include <algorithm>
#include <set>

#include "pbound/lp.hpp"

namespace pbound {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  constant += o.constant;
  for (auto& [v, c] : o.coef) add_term(v, c);
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  constant -= o.constant;
  for (auto& [v, c] : o.coef) add_term(v, -c);
  return *this;
}

LinExpr& LinExpr::operator*=(const Rat& f) {
  if (f == 0) {
    constant = 0;
    coef.clear();
    return *this;
  }
  constant *= f;
  for (auto& [v, c] : coef) c *= f;
  return *this;
}

Rat LinExpr::eval(const std::vector<long long>& state) const {
  Rat r = constant;
  for (auto& [v, c] : coef) r += c * Rat(static_cast<long>(state[v]));
  return r;
}

LinExpr LinExpr::normalized() const {
  // Scale so all coefficients are coprime integers.
  Int den = constant.get_den();
  for (auto& [v, c] : coef) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
  LinExpr out = *this;
  out *= Rat(den);
  Int g = abs(out.constant.get_num());
  for (auto& [v, c] : out.coef) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
  if (g > 1) out *= Rat(1, 1) / Rat(g);
  out.constant.canonicalize();
  for (auto& [v, c] : out.coef) c.canonicalize();
  return out;
}

std::string LinExpr::to_string(const Module& m) const {
  std::string s;
  bool first = true;
  for (auto& [v, c] : coef) {
    if (!first) s += " + ";
    if (c != 1) s += rat_to_string(c) + "*";
    s += m.var_name(v);
    first = false;
  }
  if (constant != 0 || first) {
    if (!first) s += " + ";
    s += rat_to_string(constant);
  }
  return s;
}

std::optional<LinExpr> linearize(const Expr& e, const Module& m) {
  switch (e.kind) {
    case Expr::Kind::Var: {
      int v = m.var(e.var);
      if (v < 0) return std::nullopt;
      return LinExpr::variable(v);
    }
    case Expr::Kind::Num:
      return LinExpr(Rat(static_cast<long>(e.num)));
    case Expr::Kind::Bin: {
      if (e.op == BinOp::Add || e.op == BinOp::Sub) {
        auto l = linearize(*e.lhs, m);
        auto r = linearize(*e.rhs, m);
        if (!l || !r) return std::nullopt;
        return e.op == BinOp::Add ? *l + *r : *l - *r;
      }
      if (e.op == BinOp::Mul) {
        auto l = linearize(*e.lhs, m);
        auto r = linearize(*e.rhs, m);
        if (!l || !r) return std::nullopt;
        if (l->is_constant()) return *r * l->constant;
        if (r->is_constant()) return *l * r->constant;
        return std::nullopt;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void LinCtx::add(const LinExpr& row) {
  if (bottom) return;
  LinExpr n = row.normalized();
  if (n.is_constant()) {
    if (n.constant < 0) *this = bot();
    return;
  }
  for (auto& r : rows)
    if (r == n) return;
  rows.push_back(std::move(n));
}

std::string LinCtx::to_string(const Module& m) const {
  if (bottom) return "false";
  if (rows.empty()) return "true";
  std::string s;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i) s += " && ";
    s += rows[i].to_string(m) + " >= 0";
  }
  return s;
}

bool LinCtx::operator==(const LinCtx& o) const {
  return bottom == o.bottom && rows == o.rows;
}

namespace {

// Builds the feasibility LP of a context: program variables are free.
void ctx_to_lp(const LinCtx& ctx, int nvars, LinearProgram& lp) {
  for (int v = 0; v < nvars; ++v) lp.add_var("x" + std::to_string(v), false);
  for (auto& row : ctx.rows) {
    std::vector<std::pair<int, Rat>> terms;
    for (auto& [v, c] : row.coef) terms.emplace_back(v, c);
    lp.add_row(std::move(terms), -row.constant, /*is_eq=*/false);
  }
}

int max_var_of(const LinCtx& ctx, const LinExpr& goal) {
  int n = -1;
  for (auto& row : ctx.rows)
    for (auto& [v, c] : row.coef) n = std::max(n, v);
  for (auto& [v, c] : goal.coef) n = std::max(n, v);
  return n + 1;
}

}  // namespace

bool entails(const LinCtx& ctx, const LinExpr& goal) {
  if (ctx.bottom) return true;
  if (goal.is_constant()) return goal.constant >= 0;
  int nvars = max_var_of(ctx, goal);
  LinearProgram lp;
  ctx_to_lp(ctx, nvars, lp);
  for (auto& [v, c] : goal.coef) lp.objective.emplace_back(v, c);
  LpResult res = solve_min(lp);
  switch (res.status) {
    case LpStatus::Infeasible:
      return true;  // empty rational context entails everything
    case LpStatus::Unbounded:
      return false;
    case LpStatus::Optimal:
      return res.objective + goal.constant >= 0;
  }
  return false;
}

bool ctx_leq(const LinCtx& stronger, const LinCtx& weaker) {
  if (stronger.bottom) return true;
  if (weaker.bottom) return false;
  for (auto& row : weaker.rows)
    if (!entails(stronger, row)) return false;
  return true;
}

bool ctx_equiv(const LinCtx& a, const LinCtx& b) { return ctx_leq(a, b) && ctx_leq(b, a); }

LinCtx canonicalize(const LinCtx& ctx) {
  if (ctx.bottom) return ctx;
  // Detect rational infeasibility once.
  LinCtx work;
  for (auto& r : ctx.rows) work.add(r);
  if (work.bottom) return work;
  {
    LinearProgram lp;
    int nvars = max_var_of(work, LinExpr());
    ctx_to_lp(work, nvars, lp);
    if (!lp_feasible(lp)) return LinCtx::bot();
  }
  // Drop rows entailed by the others.
  LinCtx out;
  for (size_t i = 0; i < work.rows.size(); ++i) {
    LinCtx rest;
    for (size_t j = 0; j < work.rows.size(); ++j)
      if (j != i) rest.rows.push_back(work.rows[j]);
    for (auto& r : out.rows) rest.rows.push_back(r);
    if (!entails(rest, work.rows[i])) out.rows.push_back(work.rows[i]);
  }
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

namespace {

// Translates a single comparison; `tighten` applies the integer adjustment to
// strict operators.
void assume_cmp(LinCtx& ctx, BinOp op, const LinExpr& l, const LinExpr& r) {
  switch (op) {
    case BinOp::Ge:
      ctx.add(l - r);
      break;
    case BinOp::Le:
      ctx.add(r - l);
      break;
    case BinOp::Gt: {
      LinExpr d = l - r;
      d.constant -= 1;
      ctx.add(d);
      break;
    }
    case BinOp::Lt: {
      LinExpr d = r - l;
      d.constant -= 1;
      ctx.add(d);
      break;
    }
    case BinOp::Eq:
      ctx.add(l - r);
      ctx.add(r - l);
      break;
    default:
      break;  // <> carries no convex information
  }
}

BinOp negate_cmp(BinOp op) {
  switch (op) {
    case BinOp::Ge: return BinOp::Lt;
    case BinOp::Le: return BinOp::Gt;
    case BinOp::Gt: return BinOp::Le;
    case BinOp::Lt: return BinOp::Ge;
    case BinOp::Eq: return BinOp::Ne;
    case BinOp::Ne: return BinOp::Eq;
    default: return op;
  }
}

void assume_rec(LinCtx& ctx, const Expr& e, const Module& m, bool negated) {
  if (ctx.bottom) return;
  if (e.kind == Expr::Kind::Num) {
    bool truthy = e.num != 0;
    if (negated) truthy = !truthy;
    if (!truthy) ctx = LinCtx::bot();
    return;
  }
  if (e.kind == Expr::Kind::Bin) {
    if (e.op == BinOp::And && !negated) {
      assume_rec(ctx, *e.lhs, m, false);
      assume_rec(ctx, *e.rhs, m, false);
      return;
    }
    if (e.op == BinOp::Or && negated) {
      assume_rec(ctx, *e.lhs, m, true);
      assume_rec(ctx, *e.rhs, m, true);
      return;
    }
    if (is_comparison(e.op)) {
      auto l = linearize(*e.lhs, m);
      auto r = linearize(*e.rhs, m);
      if (l && r) assume_cmp(ctx, negated ? negate_cmp(e.op) : e.op, *l, *r);
      return;
    }
  }
  // Bare variables, disjunctions, nonlinear guards: no convex fact retained.
}

}  // namespace

LinCtx ctx_assume(const LinCtx& ctx, const Expr& e, const Module& m) {
  if (ctx.bottom) return ctx;
  LinCtx out = ctx;
  assume_rec(out, e, m, false);
  return canonicalize(out);
}

LinCtx ctx_assume_not(const LinCtx& ctx, const Expr& e, const Module& m) {
  if (ctx.bottom) return ctx;
  LinCtx out = ctx;
  assume_rec(out, e, m, true);
  return canonicalize(out);
}

namespace {

// Fourier-Motzkin elimination of variable v from `rows` (each row >= 0).
std::vector<LinExpr> fm_eliminate(const std::vector<LinExpr>& rows, int v) {
  std::vector<LinExpr> pos, neg, out;
  for (auto& r : rows) {
    auto it = r.coef.find(v);
    if (it == r.coef.end())
      out.push_back(r);
    else if (it->second > 0)
      pos.push_back(r);
    else
      neg.push_back(r);
  }
  for (auto& p : pos) {
    Rat cp = p.coef.at(v);
    for (auto& n : neg) {
      Rat cn = -n.coef.at(v);
      // cn * p + cp * n has no v.
      LinExpr combo = p;
      combo *= cn;
      LinExpr tmp = n;
      tmp *= cp;
      combo += tmp;
      combo.coef.erase(v);
      out.push_back(combo.normalized());
    }
  }
  return out;
}

}  // namespace

LinCtx ctx_assign(const LinCtx& ctx, int x, const Expr* e, const Module& m) {
  if (ctx.bottom) return ctx;
  std::optional<LinExpr> rhs = e ? linearize(*e, m) : std::nullopt;
  if (!rhs) {
    // Havoc: drop every row mentioning x.
    LinCtx out;
    for (auto& r : ctx.rows)
      if (!r.coef.count(x)) out.rows.push_back(r);
    return canonicalize(out);
  }
  // Fresh variable t = rhs, eliminate old x, rename t -> x.
  int t = m.num_vars();  // scratch index beyond the program variables
  std::vector<LinExpr> rows = ctx.rows;
  LinExpr def = *rhs;  // t - rhs = 0 as two inequalities
  def.add_term(t, Rat(-1));
  rows.push_back(def);
  LinExpr def2 = def;
  def2 *= Rat(-1);
  rows.push_back(def2);
  rows = fm_eliminate(rows, x);
  LinCtx out;
  for (auto& r : rows) {
    LinExpr renamed = r;
    auto it = renamed.coef.find(t);
    if (it != renamed.coef.end()) {
      Rat c = it->second;
      renamed.coef.erase(it);
      renamed.add_term(x, c);
    }
    out.add(renamed);
  }
  return canonicalize(out);
}

LinCtx ctx_sample(const LinCtx& ctx, int x, const Expr& e, bool add, const Dist& d,
                  const Module& m) {
  if (ctx.bottom) return ctx;
  auto [lo, hi] = d.support_bounds();
  auto post_for = [&](long long v) {
    ExprPtr rhs = Expr::make_bin(add ? BinOp::Add : BinOp::Sub, e.clone(),
                                 Expr::make_num(v));
    return ctx_assign(ctx, x, rhs.get(), m);
  };
  LinCtx a = post_for(lo);
  if (lo == hi) return a;
  return ctx_join(a, post_for(hi));
}

LinCtx ctx_join(const LinCtx& a, const LinCtx& b) {
  if (a.bottom) return b;
  if (b.bottom) return a;
  LinCtx out;
  for (auto& r : a.rows)
    if (entails(b, r)) out.rows.push_back(r);
  for (auto& r : b.rows)
    if (entails(a, r)) out.add(r);
  return canonicalize(out);
}

}  // namespace pbound
