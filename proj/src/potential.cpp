// SPDX-License-Identifier: Apache-2.0
#include "pbound/potential.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pbound/lp.hpp"
#include "pbound/parser.hpp"

namespace pbound {

std::string IntervalAtom::to_string(const Module& m) const {
  auto endpoint = [&](int v, long long k) {
    if (v < 0) return std::to_string(k);
    std::string s = m.var_name(v);
    if (k > 0) s += "+" + std::to_string(k);
    if (k < 0) s += std::to_string(k);
    return s;
  };
  // Prefer |[k, v]| over |[0, v-k]| when the low endpoint is constant.
  if (lo >= 0) return "|[" + endpoint(lo, 0) + "," + endpoint(hi, shift) + "]|";
  return "|[" + endpoint(-1, -shift) + "," + endpoint(hi, 0) + "]|";
}

std::string BaseFn::to_string(const Module& m) const {
  if (atoms.empty()) return "1";
  std::string s;
  for (size_t i = 0; i < atoms.size();) {
    size_t j = i;
    while (j < atoms.size() && atoms[j] == atoms[i]) ++j;
    if (!s.empty()) s += "*";
    s += atoms[i].to_string(m);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

Rat eval_base(const BaseFn& b, const std::vector<long long>& state) {
  Rat r(1);
  for (auto& a : b.atoms) r *= Rat(static_cast<long>(a.value(state)));
  return r;
}

int BaseFnSet::index_of(const BaseFn& b) const {
  for (int i = 0; i < size(); ++i)
    if (fns[i] == b) return i;
  return -1;
}

bool BaseFnSet::atom_known(const IntervalAtom& a) const {
  for (auto& f : fns)
    if (f.degree() == 1 && f.atoms[0] == a) return true;
  return false;
}

std::vector<IntervalAtom> BaseFnSet::atom_list() const {
  std::vector<IntervalAtom> out;
  for (auto& f : fns)
    if (f.degree() == 1) out.push_back(f.atoms[0]);
  return out;
}

std::string BaseFnSet::to_string(const Module& m) const {
  std::string s;
  for (int i = 0; i < size(); ++i) {
    if (i) s += ", ";
    s += fns[i].to_string(m);
  }
  return s;
}

BaseFnSet close_under_products(std::vector<IntervalAtom> atoms, int degree) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  BaseFnSet B;
  B.fns.push_back(BaseFn{});  // the constant function 1
  // Multisets of size 1..degree in lexicographic order.
  std::vector<IntervalAtom> current;
  std::function<void(size_t, int)> rec = [&](size_t from, int remaining) {
    if (!current.empty()) B.fns.push_back(BaseFn{current});
    if (remaining == 0) return;
    for (size_t i = from; i < atoms.size(); ++i) {
      current.push_back(atoms[i]);
      rec(i, remaining - 1);
      current.pop_back();
    }
  };
  rec(0, degree);
  std::sort(B.fns.begin(), B.fns.end());
  B.fns.erase(std::unique(B.fns.begin(), B.fns.end()), B.fns.end());
  return B;
}

Rat eval_potential(const Coeffs& q, const BaseFnSet& B,
                   const std::vector<long long>& state) {
  Rat r(0);
  for (size_t i = 0; i < q.size(); ++i)
    if (q[i] != 0) r += q[i] * eval_base(B.fns[i], state);
  return r;
}

Rat RewriteFn::eval(const BaseFnSet& B, const std::vector<long long>& state) const {
  Rat r(0);
  for (auto& [i, c] : coeffs) r += c * eval_base(B.fns[i], state);
  return r;
}

bool RewriteFn::guard_holds(const std::vector<long long>& state) const {
  for (auto& g : guard)
    if (g.eval(state) < 0) return false;
  return true;
}

bool RewriteFn::applicable(const LinCtx& ctx) const {
  for (auto& g : guard)
    if (!entails(ctx, g)) return false;
  return true;
}

// ---- substitution ------------------------------------------------------

namespace {

// The image of an atom under x := e, when it stays in the endpoint language:
// either a concrete atom, a nonnegative constant, or nothing (failure).
struct AtomImage {
  enum class Kind { Unchanged, Atom, Constant, Fail } kind;
  IntervalAtom atom;
  long long constant = 0;
};

// Classify e as var+const / const; anything else fails endpoint substitution.
struct EndpointExpr {
  int var = -1;
  long long k = 0;
  bool ok = false;
};

EndpointExpr endpoint_form(const Expr& e, const Module& m) {
  EndpointExpr out;
  auto lin = linearize(e, m);
  if (!lin) return out;
  if (lin->constant.get_den() != 1) return out;
  if (lin->coef.size() > 1) return out;
  if (lin->coef.size() == 1) {
    auto& [v, c] = *lin->coef.begin();
    if (c != 1) return out;
    out.var = v;
  }
  out.k = mpz_get_si(lin->constant.get_num_mpz_t());
  out.ok = true;
  return out;
}

AtomImage atom_image(const IntervalAtom& a, int x, const EndpointExpr& e) {
  if (a.lo != x && a.hi != x) return {AtomImage::Kind::Unchanged, a, 0};
  if (!e.ok) return {AtomImage::Kind::Fail, a, 0};
  IntervalAtom img = a;
  if (a.lo == x) {
    img.lo = e.var;
    img.shift -= e.k;
  }
  if (a.hi == x) {
    img.hi = e.var;
    img.shift += e.k;
  }
  if (img.lo >= 0 && img.lo == img.hi) {
    // Same variable on both sides: the atom is the constant max(0, shift).
    long long v = img.shift > 0 ? img.shift : 0;
    return {AtomImage::Kind::Constant, IntervalAtom{}, v};
  }
  if (img.lo < 0 && img.hi < 0) {
    long long v = img.shift > 0 ? img.shift : 0;
    return {AtomImage::Kind::Constant, IntervalAtom{}, v};
  }
  return {AtomImage::Kind::Atom, img, 0};
}

// Expresses `img` as target + delta with target an atom of B, exact on all
// states satisfying ctx. Preference order: exact match, then smallest |delta|.
struct Telescoped {
  IntervalAtom target;
  long long delta = 0;
  bool ok = false;
};

Telescoped telescope(const IntervalAtom& img, const BaseFnSet& B, const LinCtx& ctx) {
  Telescoped best;
  if (B.atom_known(img)) return {img, 0, true};
  for (auto& cand : B.atom_list()) {
    if (cand.lo != img.lo || cand.hi != img.hi) continue;
    long long s = img.shift - cand.shift;  // img = cand + s
    bool valid;
    if (s > 0) {
      // Down-shifts: need raw value >= s throughout the chain.
      LinExpr need = img.raw_expr();
      need.constant -= static_cast<long>(s);
      valid = entails(ctx, need);
    } else {
      // Up-shifts: need raw value >= 0.
      valid = entails(ctx, img.raw_expr());
    }
    if (!valid) continue;
    if (!best.ok || std::llabs(s) < std::llabs(best.delta) ||
        (std::llabs(s) == std::llabs(best.delta) && cand < best.target)) {
      best = {cand, s, true};
    }
  }
  return best;
}

}  // namespace

std::optional<std::vector<std::pair<int, Rat>>> substitute(
    const BaseFn& b, int x, const Expr& e, const BaseFnSet& B, const LinCtx& ctx,
    const Module& m) {
  EndpointExpr ep = endpoint_form(e, m);
  long long scalar = 1;
  std::vector<Telescoped> parts;
  for (auto& a : b.atoms) {
    AtomImage img = atom_image(a, x, ep);
    switch (img.kind) {
      case AtomImage::Kind::Fail:
        return std::nullopt;
      case AtomImage::Kind::Constant:
        if (img.constant == 0) {
          // Whole product vanishes.
          return std::vector<std::pair<int, Rat>>{};
        }
        scalar *= img.constant;
        break;
      case AtomImage::Kind::Unchanged:
      case AtomImage::Kind::Atom: {
        Telescoped t = telescope(img.kind == AtomImage::Kind::Unchanged ? a : img.atom,
                                 B, ctx);
        if (!t.ok) return std::nullopt;
        parts.push_back(t);
        break;
      }
    }
  }
  // Expand prod_j (target_j + delta_j) into a combination over B.
  std::map<BaseFn, Rat> combo;
  int n = static_cast<int>(parts.size());
  for (int mask = 0; mask < (1 << n); ++mask) {
    BaseFn mono;
    Rat coeff(static_cast<long>(scalar));
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j))
        mono.atoms.push_back(parts[j].target);
      else
        coeff *= Rat(static_cast<long>(parts[j].delta));
    }
    if (coeff == 0) continue;
    std::sort(mono.atoms.begin(), mono.atoms.end());
    combo[mono] += coeff;
  }
  std::vector<std::pair<int, Rat>> out;
  for (auto& [mono, coeff] : combo) {
    if (coeff == 0) continue;
    int idx = B.index_of(mono);
    if (idx < 0) return std::nullopt;  // closure should prevent this
    out.emplace_back(idx, coeff);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

StableSet stable_set(int x, const Expr& e, const BaseFnSet& B, const LinCtx& ctx,
                     const Module& m) {
  StableSet s;
  s.columns.resize(B.size());
  for (int j = 0; j < B.size(); ++j) {
    auto col = substitute(B.fns[j], x, e, B, ctx, m);
    if (col) {
      s.stable.push_back(j);
      s.columns[j] = std::move(*col);
    }
  }
  return s;
}

// ---- heuristic generation ----------------------------------------------

namespace {

// A comparison harvested from a guard, as a tight atom.
std::optional<IntervalAtom> atom_of_row(const LinExpr& row) {
  // Row means expr >= 0; usable when it is +/-1-coefficient over <= 2 vars.
  if (row.coef.empty() || row.coef.size() > 2) return std::nullopt;
  if (row.constant.get_den() != 1) return std::nullopt;
  int pos = -1, neg = -1;
  for (auto& [v, c] : row.coef) {
    if (c == 1 && pos < 0)
      pos = v;
    else if (c == -1 && neg < 0)
      neg = v;
    else
      return std::nullopt;
  }
  IntervalAtom a;
  a.lo = neg;
  a.hi = pos;
  a.shift = mpz_get_si(row.constant.get_num_mpz_t());
  if (a.lo == a.hi) return std::nullopt;
  return a;
}

void harvest_expr(const Expr& e, const Module& m, std::vector<IntervalAtom>& out) {
  if (e.kind != Expr::Kind::Bin) return;
  if (e.op == BinOp::And || e.op == BinOp::Or) {
    harvest_expr(*e.lhs, m, out);
    harvest_expr(*e.rhs, m, out);
    return;
  }
  if (!is_comparison(e.op)) return;
  LinCtx top = LinCtx::top();
  LinCtx got = ctx_assume(top, e, m);
  for (auto& row : got.rows) {
    auto a = atom_of_row(row);
    if (a) out.push_back(*a);
    // For equalities both orientations appear as rows already.
  }
}

// Smallest possible change of `expr` across one execution of `c` (worst-case
// drop); nullopt when the effect cannot be tracked.
std::optional<long long> min_delta(const Command& c, const LinExpr& expr,
                                   const Module& m, int depth = 0) {
  if (depth > 16) return std::nullopt;
  auto coeff_of = [&](int v) -> Rat {
    auto it = expr.coef.find(v);
    return it == expr.coef.end() ? Rat(0) : it->second;
  };
  switch (c.kind) {
    case Command::Kind::Skip:
    case Command::Kind::Abort:
    case Command::Kind::Assert:
    case Command::Kind::Tick:
      return 0;
    case Command::Kind::Assign: {
      int x = m.var(c.var);
      Rat cx = coeff_of(x);
      if (cx == 0) return 0;
      auto lin = linearize(*c.rhs, m);
      // Only shifts x := x + k are tracked.
      if (!lin || lin->coef.size() != 1 || !lin->coef.count(x) ||
          lin->coef.at(x) != 1 || lin->constant.get_den() != 1)
        return std::nullopt;
      Rat d = cx * lin->constant;
      if (d.get_den() != 1) return std::nullopt;
      return mpz_get_si(d.get_num_mpz_t());
    }
    case Command::Kind::Sample: {
      int x = m.var(c.var);
      Rat cx = coeff_of(x);
      if (cx == 0) return 0;
      auto lin = linearize(*c.rhs, m);
      if (!lin || lin->coef.size() != 1 || !lin->coef.count(x) || lin->coef.at(x) != 1)
        return std::nullopt;
      auto [lo, hi] = c.dist.support_bounds();
      long long vlo = c.sample_add ? lo : -hi;
      long long vhi = c.sample_add ? hi : -lo;
      Rat a = cx * Rat(static_cast<long>(vlo)), b = cx * Rat(static_cast<long>(vhi));
      Rat d = std::min(a, b);
      if (d.get_den() != 1) return std::nullopt;
      return mpz_get_si(d.get_num_mpz_t());
    }
    case Command::Kind::ProbIf:
    case Command::Kind::NonDetIf:
    case Command::Kind::CondIf: {
      auto a = min_delta(*c.c1, expr, m, depth + 1);
      auto b = min_delta(*c.c2, expr, m, depth + 1);
      if (!a || !b) return std::nullopt;
      return std::min(*a, *b);
    }
    case Command::Kind::Seq: {
      auto a = min_delta(*c.c1, expr, m, depth + 1);
      auto b = min_delta(*c.c2, expr, m, depth + 1);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case Command::Kind::While: {
      // Only safe when the nested loop body cannot move the expression.
      auto a = min_delta(*c.c1, expr, m, depth + 1);
      if (a && *a == 0) return 0;
      return std::nullopt;
    }
    case Command::Kind::Call: {
      const Command* body = m.prog->proc_body(c.callee);
      if (!body) return std::nullopt;
      auto a = min_delta(*body, expr, m, depth + 1);
      if (a && *a == 0) return 0;  // recursion-safe only for untouched exprs
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct StepInfo {
  // Direction-aware step magnitudes per variable: largest increment and
  // largest decrement over all assignments/samples.
  std::map<int, long long> inc, dec;
};

void collect_steps(const Module& m, StepInfo& info) {
  auto bump = [](std::map<int, long long>& t, int v, long long k) {
    auto& cur = t[v];
    cur = std::max(cur, k);
  };
  for_each_command(*m.prog, [&](const Command& c) {
    if (c.kind == Command::Kind::Assign) {
      int x = m.var(c.var);
      auto lin = linearize(*c.rhs, m);
      if (lin && lin->coef.size() == 1 && lin->coef.count(x) &&
          lin->coef.at(x) == 1 && lin->constant.get_den() == 1) {
        long long k = mpz_get_si(lin->constant.get_num_mpz_t());
        if (k >= 0) bump(info.inc, x, k);
        if (k <= 0) bump(info.dec, x, -k);
      } else {
        bump(info.inc, x, 1);
        bump(info.dec, x, 1);
      }
    } else if (c.kind == Command::Kind::Sample) {
      int x = m.var(c.var);
      auto lin = linearize(*c.rhs, m);
      bool shift_sample = lin && lin->coef.size() == 1 && lin->coef.count(x) &&
                          lin->coef.at(x) == 1;
      if (shift_sample) {
        auto [lo, hi] = c.dist.support_bounds();
        long long up = c.sample_add ? hi : -lo;
        long long down = c.sample_add ? -lo : hi;
        bump(info.inc, x, std::max(0LL, up));
        bump(info.dec, x, std::max(0LL, down));
      } else {
        bump(info.inc, x, 1);
        bump(info.dec, x, 1);
      }
    }
  });
}

bool command_ticks(const Command& c, const Module& m, std::set<std::string>& seen) {
  switch (c.kind) {
    case Command::Kind::Tick:
      return c.amount > 0;
    case Command::Kind::Call: {
      if (seen.count(c.callee)) return false;
      seen.insert(c.callee);
      const Command* body = m.prog->proc_body(c.callee);
      return body && command_ticks(*body, m, seen);
    }
    default:
      if (c.c1) {
        if (command_ticks(*c.c1, m, seen)) return true;
      }
      if (c.c2) {
        if (command_ticks(*c.c2, m, seen)) return true;
      }
      return false;
  }
}

void collect_expr_vars(const Expr& e, const Module& m, std::set<int>& vars) {
  if (e.kind == Expr::Kind::Var) {
    int v = m.var(e.var);
    if (v >= 0) vars.insert(v);
  } else if (e.kind == Expr::Kind::Bin) {
    collect_expr_vars(*e.lhs, m, vars);
    collect_expr_vars(*e.rhs, m, vars);
  }
}

void collect_cmd_vars(const Command& c, const Module& m, std::set<int>& vars,
                      std::set<std::string>& seen_procs) {
  if (c.guard) collect_expr_vars(*c.guard, m, vars);
  if (c.rhs) collect_expr_vars(*c.rhs, m, vars);
  if (!c.var.empty() && m.var(c.var) >= 0) vars.insert(m.var(c.var));
  if (c.kind == Command::Kind::Call && !seen_procs.count(c.callee)) {
    seen_procs.insert(c.callee);
    if (const Command* body = m.prog->proc_body(c.callee))
      collect_cmd_vars(*body, m, vars, seen_procs);
  }
  if (c.c1) collect_cmd_vars(*c.c1, m, vars, seen_procs);
  if (c.c2) collect_cmd_vars(*c.c2, m, vars, seen_procs);
}

constexpr long long kMaxShiftSpan = 12;

}  // namespace

// Tightest entailed integer bound of `objective` over ctx, if any.
std::optional<long long> entailed_min(const LinCtx& ctx, const LinExpr& objective,
                                      int nvars) {
  if (ctx.bottom || ctx.rows.empty()) return std::nullopt;
  LinearProgram lp;
  for (int v = 0; v < nvars; ++v) lp.add_var("x" + std::to_string(v), false);
  for (auto& row : ctx.rows) {
    std::vector<std::pair<int, Rat>> terms;
    for (auto& [v, c] : row.coef) terms.emplace_back(v, c);
    lp.add_row(std::move(terms), -row.constant, false);
  }
  for (auto& [v, c] : objective.coef) lp.objective.emplace_back(v, c);
  LpResult res = solve_min(lp);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  Rat bound = res.objective + objective.constant;
  // ceil(bound): integer states can only sit at or above it.
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), bound.get_num_mpz_t(), bound.get_den_mpz_t());
  if (!q.fits_slong_p()) return std::nullopt;
  long long k = mpz_get_si(q.get_mpz_t());
  if (std::llabs(k) > kMaxShiftSpan) return std::nullopt;
  return k;
}

BaseFnSet gen_base_functions(const Module& m, const ContextMap& cm, int degree) {
  // (i) guard comparisons, integer-tightened, with the shift span they need:
  // for loop guards, the worst single-iteration drop of the guard expression
  // bounds how far one body run can overshoot the boundary.
  StepInfo steps;
  collect_steps(m, steps);
  std::map<IntervalAtom, long long> guard_atoms;  // atom -> span
  auto fallback_span = [&](const IntervalAtom& a) {
    long long span = 1;
    if (a.lo >= 0 && steps.inc.count(a.lo)) span = std::max(span, steps.inc[a.lo]);
    if (a.hi >= 0 && steps.dec.count(a.hi)) span = std::max(span, steps.dec[a.hi]);
    return std::min(span, kMaxShiftSpan);
  };
  for_each_command(*m.prog, [&](const Command& c) {
    if (!c.guard) return;
    std::vector<IntervalAtom> here;
    harvest_expr(*c.guard, m, here);
    for (auto& a : here) {
      long long span = 1;
      if (c.kind == Command::Kind::While) {
        auto d = min_delta(*c.c1, a.raw_expr(), m);
        span = d && *d < 0 ? std::min(-*d, kMaxShiftSpan)
               : d         ? 1
                           : fallback_span(a);
      }
      auto it = guard_atoms.find(a);
      if (it == guard_atoms.end())
        guard_atoms.emplace(a, span);
      else
        it->second = std::max(it->second, span);
    }
  });

  // (ii) inferred inequalities: stored rows plus entailed lower bounds of
  // each variable at every program point.
  std::vector<IntervalAtom> plain_atoms;
  {
    std::set<std::string> seen_ctx;
    std::vector<const LinCtx*> ctxs;
    for (auto& ctx : cm.pre) {
      if (ctx.bottom || ctx.rows.empty()) continue;
      if (seen_ctx.insert(ctx.to_string(m)).second) ctxs.push_back(&ctx);
    }
    int nv = m.num_vars();
    for (const LinCtx* ctx : ctxs) {
      for (auto& row : ctx->rows) {
        auto a = atom_of_row(row);
        if (a) plain_atoms.push_back(*a);
      }
      for (int v = 0; v < nv; ++v) {
        if (auto k = entailed_min(*ctx, LinExpr::variable(v), nv))
          plain_atoms.push_back(IntervalAtom{-1, v, -*k});  // v >= k
      }
    }
  }

  // |[0,x]| for every variable of a tick-carrying loop.
  for_each_command(*m.prog, [&](const Command& c) {
    if (c.kind != Command::Kind::While) return;
    std::set<std::string> seen;
    if (!command_ticks(*c.c1, m, seen)) return;
    std::set<int> vars;
    std::set<std::string> seen2;
    collect_expr_vars(*c.guard, m, vars);
    collect_cmd_vars(*c.c1, m, vars, seen2);
    for (int v : vars) plain_atoms.push_back(IntervalAtom{-1, v, 0});
  });

  // (iii) constant-shifted variants of guard atoms across their spans; long
  // spans keep the low shifts and the top two, which is what the walk
  // invariants use.
  std::vector<IntervalAtom> all = plain_atoms;
  for (auto& [a, span] : guard_atoms) {
    all.push_back(a);
    std::set<long long> js;
    for (long long j = 1; j <= std::min<long long>(span, 4); ++j) js.insert(j);
    js.insert(span);
    if (span > 1) js.insert(span - 1);
    for (long long j : js) all.push_back(IntervalAtom{a.lo, a.hi, a.shift + j});
  }
  return close_under_products(std::move(all), degree);
}

std::vector<RewriteFn> gen_rewrite_functions(const BaseFnSet& B, int degree) {
  std::vector<RewriteFn> out;

  // F0 = 1 with empty guard.
  {
    RewriteFn f;
    f.coeffs = {{0, Rat(1)}};
    f.name = "one";
    out.push_back(f);
  }

  auto atoms = B.atom_list();
  auto fn_index = [&](const BaseFn& b) { return B.index_of(b); };
  auto atom_index = [&](const IntervalAtom& a) {
    return fn_index(BaseFn{{a}});
  };

  struct Core {
    std::vector<std::pair<int, Rat>> coeffs;  // over B, degree <= 1 entries
    std::vector<LinExpr> guard;
    std::string name;
  };
  std::vector<Core> cores;

  // Shift rewrites, both directions per same-endpoint pair at distance s:
  //   |[a,b]| - |[a+s,b]| - s   with guard b-a-s >= 0, and
  //   |[a+s,b]| + s - |[a,b]|  with no guard (max(0,r)+s >= max(0,r+s)).
  // Only unit shifts get degree-multiplied variants below; wider shifts are
  // sums of unit ones, so plain versions suffice.
  std::vector<char> is_unit;
  for (auto& a : atoms) {
    for (auto& lower : atoms) {
      if (lower.lo != a.lo || lower.hi != a.hi || lower.shift >= a.shift) continue;
      long long s = a.shift - lower.shift;
      Core c;
      c.coeffs = {{atom_index(a), Rat(1)},
                  {atom_index(lower), Rat(-1)},
                  {0, Rat(-static_cast<long>(s))}};
      c.guard = {lower.raw_expr()};
      c.name = "shift";
      cores.push_back(std::move(c));
      is_unit.push_back(s == 1);
      Core r;
      r.coeffs = {{atom_index(lower), Rat(1)},
                  {atom_index(a), Rat(-1)},
                  {0, Rat(static_cast<long>(s))}};
      r.name = "pad";
      cores.push_back(std::move(r));
      is_unit.push_back(s == 1);
    }
  }

  // Split: |[l,m]| + |[m,h]| - |[l,h]| >= 0 everywhere when the shifts agree
  // (max(0,x) + max(0,y) >= max(0,x+y-d) for d >= 0).
  // Merge: the reverse, guarded by both raw parts being nonnegative.
  for (auto& a : atoms) {
    for (auto& b : atoms) {
      if (a.hi < 0 || a.hi != b.lo) continue;
      for (auto& c : atoms) {
        if (c.lo != a.lo || c.hi != b.hi) continue;
        if (c.shift <= a.shift + b.shift) {
          Core s;
          s.coeffs = {{atom_index(a), Rat(1)},
                      {atom_index(b), Rat(1)},
                      {atom_index(c), Rat(-1)}};
          s.name = "split";
          cores.push_back(std::move(s));
          is_unit.push_back(true);
        }
        if (c.shift >= a.shift + b.shift) {
          Core g;
          g.coeffs = {{atom_index(c), Rat(1)},
                      {atom_index(a), Rat(-1)},
                      {atom_index(b), Rat(-1)}};
          if (c.shift > a.shift + b.shift) {
            g.coeffs.emplace_back(0, Rat(static_cast<long>(a.shift + b.shift - c.shift)));
          }
          g.guard = {a.raw_expr(), b.raw_expr()};
          g.name = "merge";
          cores.push_back(std::move(g));
          is_unit.push_back(true);
        }
      }
    }
  }

  // Each core alone and multiplied by base functions up to degree-1 slack.
  for (size_t ci = 0; ci < cores.size(); ++ci) {
    auto& core = cores[ci];
    int core_deg = 1;
    RewriteFn plain;
    plain.guard = core.guard;
    plain.name = core.name;
    plain.coeffs = core.coeffs;
    out.push_back(plain);
    if (!is_unit[ci]) continue;  // products only for the unit-step cores
    for (int i = 1; i < B.size(); ++i) {
      const BaseFn& mult = B.fns[i];
      if (mult.degree() + core_deg > degree) continue;
      RewriteFn f;
      f.guard = core.guard;
      f.name = core.name + "*" + std::to_string(i);
      bool ok = true;
      std::map<int, Rat> acc;
      for (auto& [idx, coef] : core.coeffs) {
        BaseFn prod = mult;
        for (auto& at : B.fns[idx].atoms) prod.atoms.push_back(at);
        std::sort(prod.atoms.begin(), prod.atoms.end());
        int pidx = B.index_of(prod);
        if (pidx < 0) {
          ok = false;
          break;
        }
        acc[pidx] += coef;
      }
      if (!ok) continue;
      for (auto& [idx, coef] : acc)
        if (coef != 0) f.coeffs.emplace_back(idx, coef);
      out.push_back(std::move(f));
    }
  }

  // Absorption: every non-constant base function may be discarded.
  for (int i = 1; i < B.size(); ++i) {
    RewriteFn f;
    f.coeffs = {{i, Rat(1)}};
    f.name = "absorb";
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<RewriteFn> parse_hints(const std::string& text, const BaseFnSet& B,
                                   const Module& m) {
  std::vector<RewriteFn> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto arrow = line.find("=>");
    if (arrow == std::string::npos)
      throw std::runtime_error("hint line " + std::to_string(lineno) + ": missing '=>'");
    std::string guard_text = line.substr(0, arrow);
    std::string combo_text = line.substr(arrow + 2);

    RewriteFn f;
    f.name = "hint:" + std::to_string(lineno);
    // Guard: "true" or a conjunction of comparisons in program syntax.
    {
      std::string trimmed;
      for (char ch : guard_text)
        if (!isspace(static_cast<unsigned char>(ch))) trimmed += ch;
      if (trimmed != "true" && !trimmed.empty()) {
        // Reuse the program parser for the guard expression.
        std::string src;
        for (auto& g : m.prog->globals) src += "var " + g + ";\n";
        src += "assume(" + guard_text + ");\n";
        Program parsed = parse_program(src);
        LinCtx top = LinCtx::top();
        const Command* a = parsed.main_body.get();
        LinCtx got = ctx_assume(top, *a->guard, m);
        f.guard = got.rows;
      }
    }
    // Combo: terms "coeff", "coeff*|[a,b]|(*|[c,d]|)*", separated by +/-.
    {
      size_t i = 0;
      auto skip_ws = [&] {
        while (i < combo_text.size() && isspace((unsigned char)combo_text[i])) ++i;
      };
      std::map<int, Rat> acc;
      bool first = true;
      while (true) {
        skip_ws();
        if (i >= combo_text.size()) break;
        Rat sign(1);
        if (combo_text[i] == '+') {
          ++i;
        } else if (combo_text[i] == '-') {
          sign = -1;
          ++i;
        } else if (!first) {
          throw std::runtime_error("hint line " + std::to_string(lineno) +
                                   ": expected '+' or '-'");
        }
        first = false;
        skip_ws();
        // optional rational coefficient
        Rat coeff(1);
        size_t start = i;
        while (i < combo_text.size() &&
               (isdigit((unsigned char)combo_text[i]) || combo_text[i] == '/' ||
                combo_text[i] == '.'))
          ++i;
        if (i > start) {
          auto r = parse_rat(combo_text.substr(start, i - start));
          if (!r)
            throw std::runtime_error("hint line " + std::to_string(lineno) +
                                     ": bad coefficient");
          coeff = *r;
        }
        skip_ws();
        if (i < combo_text.size() && combo_text[i] == '*' &&
            i + 1 < combo_text.size() && combo_text[i + 1] == '|')
          ++i;
        BaseFn mono;
        while (i < combo_text.size() && combo_text[i] == '|') {
          // |[a,b]|
          size_t close = combo_text.find("]|", i);
          if (close == std::string::npos || combo_text.compare(i, 2, "|[") != 0)
            throw std::runtime_error("hint line " + std::to_string(lineno) +
                                     ": bad atom");
          std::string inner = combo_text.substr(i + 2, close - i - 2);
          i = close + 2;
          auto comma = inner.find(',');
          if (comma == std::string::npos)
            throw std::runtime_error("hint line " + std::to_string(lineno) +
                                     ": bad atom");
          auto parse_endpoint = [&](std::string s) -> std::pair<int, long long> {
            std::string t;
            for (char ch : s)
              if (!isspace((unsigned char)ch)) t += ch;
            // var, var+k, var-k, or integer
            size_t p = t.find_first_of("+-", 1);
            std::string base = t.substr(0, p);
            long long k = 0;
            if (p != std::string::npos) k = std::stoll(t.substr(p));
            if (!base.empty() &&
                (isalpha((unsigned char)base[0]) || base[0] == '_')) {
              int v = m.var(base);
              if (v < 0)
                throw std::runtime_error("hint line " + std::to_string(lineno) +
                                         ": unknown variable " + base);
              return {v, k};
            }
            return {-1, std::stoll(base) + k};
          };
          auto [lov, lok] = parse_endpoint(inner.substr(0, comma));
          auto [hiv, hik] = parse_endpoint(inner.substr(comma + 1));
          IntervalAtom a;
          a.lo = lov;
          a.hi = hiv;
          a.shift = hik - lok;
          mono.atoms.push_back(a);
          skip_ws();
          if (i < combo_text.size() && combo_text[i] == '*') {
            ++i;
            skip_ws();
          }
        }
        std::sort(mono.atoms.begin(), mono.atoms.end());
        int idx = B.index_of(mono);
        if (idx < 0)
          throw std::runtime_error("hint line " + std::to_string(lineno) +
                                   ": monomial not in the base-function set");
        acc[idx] += sign * coeff;
      }
      for (auto& [idx, c] : acc)
        if (c != 0) f.coeffs.emplace_back(idx, c);
    }
    // Randomized nonnegativity screening before admitting the hint.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<long long> dist(-50, 50);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<long long> st(m.num_vars());
      for (auto& v : st) v = dist(rng);
      if (!f.guard_holds(st)) continue;
      if (f.eval(B, st) < 0)
        throw std::runtime_error("hint line " + std::to_string(lineno) +
                                 ": fails nonnegativity under its guard");
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace pbound
