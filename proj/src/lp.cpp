// SPDX-License-Identifier: Apache-2.0
#include "pbound/lp.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pbound {

namespace {

// Sparse row: strictly increasing column indices, no zero coefficients.
struct SparseVec {
  std::vector<std::pair<int, Rat>> t;

  Rat get(int j) const {
    auto it = std::lower_bound(t.begin(), t.end(), j,
                               [](const auto& a, int b) { return a.first < b; });
    if (it != t.end() && it->first == j) return it->second;
    return Rat(0);
  }

  void set(int j, const Rat& v) {
    auto it = std::lower_bound(t.begin(), t.end(), j,
                               [](const auto& a, int b) { return a.first < b; });
    if (it != t.end() && it->first == j) {
      if (v == 0)
        t.erase(it);
      else
        it->second = v;
    } else if (v != 0) {
      t.insert(it, {j, v});
    }
  }

  // *this += f * other
  void axpy(const Rat& f, const SparseVec& other) {
    if (f == 0 || other.t.empty()) return;
    std::vector<std::pair<int, Rat>> merged;
    merged.reserve(t.size() + other.t.size());
    size_t i = 0, j = 0;
    while (i < t.size() || j < other.t.size()) {
      if (j == other.t.size() || (i < t.size() && t[i].first < other.t[j].first)) {
        merged.push_back(t[i++]);
      } else if (i == t.size() || other.t[j].first < t[i].first) {
        merged.emplace_back(other.t[j].first, f * other.t[j].second);
        if (merged.back().second == 0) merged.pop_back();
        ++j;
      } else {
        Rat v = t[i].second + f * other.t[j].second;
        if (v != 0) merged.emplace_back(t[i].first, std::move(v));
        ++i;
        ++j;
      }
    }
    t = std::move(merged);
  }

  void scale(const Rat& f) {
    if (f == 1) return;
    for (auto& [j, v] : t) v *= f;
  }
};

struct PreRow {
  SparseVec lhs;
  Rat rhs;
  bool is_eq;
  bool alive = true;
};

struct Eliminated {
  int var;
  SparseVec expr;  // var = expr . x + cst
  Rat cst;
};

constexpr long kFillLimit = 400;

}  // namespace

std::string LinearProgram::to_text() const {
  std::ostringstream os;
  os << "min:";
  for (auto& [j, c] : objective) os << " " << rat_to_string(c) << " " << var_names[j];
  os << "\n";
  int i = 0;
  for (auto& r : rows) {
    os << "r" << i++ << ":";
    for (auto& [j, c] : r.terms) os << " " << rat_to_string(c) << " " << var_names[j];
    os << (r.is_eq ? " = " : " >= ") << rat_to_string(r.rhs) << "\n";
  }
  os << "nonneg:";
  for (int j = 0; j < num_vars(); ++j)
    if (nonneg[j]) os << " " << var_names[j];
  os << "\n";
  return os.str();
}

namespace {

class SimplexSolver {
 public:
  LpStatus run(std::vector<PreRow>& in_rows, const SparseVec& objective,
               const std::vector<char>& nonneg, int nvars,
               std::vector<Rat>& out_values, Rat& out_obj) {
    // Column layout: nonneg var -> one column; free var -> pos and neg parts.
    col_of_pos_.assign(nvars, -1);
    col_of_neg_.assign(nvars, -1);
    int ncols = 0;
    for (int v = 0; v < nvars; ++v) {
      col_of_pos_[v] = ncols++;
      if (!nonneg[v]) col_of_neg_[v] = ncols++;
    }
    n_struct_ = ncols;

    // Inequality rows feasible at the origin start with their surplus basic;
    // every other row gets an artificial.
    std::vector<int> needs_artificial;
    for (auto& pr : in_rows) {
      if (!pr.alive) continue;
      SparseVec row;
      for (auto& [v, c] : pr.lhs.t) {
        row.set(col_of_pos_[v], c);
        if (col_of_neg_[v] >= 0) row.set(col_of_neg_[v], -c);
      }
      Rat b = pr.rhs;
      if (row.t.empty()) {
        bool ok = pr.is_eq ? (b == 0) : (b <= 0);
        if (!ok) return LpStatus::Infeasible;
        continue;
      }
      int surplus = -1;
      if (!pr.is_eq) {
        surplus = ncols++;
        row.set(surplus, Rat(-1));
      }
      int r = static_cast<int>(rows_.size());
      if (!pr.is_eq && b <= 0) {
        // -terms + s = -b >= 0: slack-basis start.
        row.scale(Rat(-1));
        rows_.push_back(std::move(row));
        rhs_.push_back(-b);
        basis_.push_back(surplus);
      } else {
        if (b < 0) {
          row.scale(Rat(-1));
          b = -b;
        }
        rows_.push_back(std::move(row));
        rhs_.push_back(std::move(b));
        basis_.push_back(-1);  // patched below
        needs_artificial.push_back(r);
      }
    }
    first_artificial_ = ncols;
    for (int r : needs_artificial) {
      rows_[r].set(ncols, Rat(1));
      basis_[r] = ncols++;
    }
    ncols_ = ncols;

    if (!needs_artificial.empty()) {
      // Phase 1: minimize the sum of artificials.
      zrow_ = SparseVec();
      zval_ = 0;
      for (int r : needs_artificial) {
        zrow_.axpy(Rat(-1), rows_[r]);
        zval_ += rhs_[r];
      }
      for (int j = first_artificial_; j < ncols_; ++j) zrow_.set(j, Rat(0));
      iterate(/*allow_artificial=*/false);
      if (zval_ != 0) return LpStatus::Infeasible;
      remove_artificials();
    }

    // Phase 2.
    SparseVec cost;
    for (auto& [v, c] : objective.t) {
      cost.set(col_of_pos_[v], c);
      if (col_of_neg_[v] >= 0) cost.set(col_of_neg_[v], -c);
    }
    zrow_ = cost;
    zval_ = 0;
    for (size_t r = 0; r < rows_.size(); ++r) {
      Rat cb = cost.get(basis_[r]);
      if (cb != 0) {
        zrow_.axpy(-cb, rows_[r]);
        zval_ += cb * rhs_[r];
      }
    }
    for (size_t r = 0; r < rows_.size(); ++r) zrow_.set(basis_[r], Rat(0));
    if (!iterate(/*allow_artificial=*/false)) return LpStatus::Unbounded;

    out_values.assign(nvars, Rat(0));
    std::vector<Rat> colval(ncols_, Rat(0));
    for (size_t r = 0; r < rows_.size(); ++r) colval[basis_[r]] = rhs_[r];
    for (int v = 0; v < nvars; ++v) {
      out_values[v] = colval[col_of_pos_[v]];
      if (col_of_neg_[v] >= 0) out_values[v] -= colval[col_of_neg_[v]];
    }
    out_obj = zval_;
    return LpStatus::Optimal;
  }

 private:
  // Dantzig pricing with a Bland fallback after a run of degenerate pivots,
  // which keeps the termination guarantee. Returns false on unboundedness.
  bool iterate(bool allow_artificial) {
    constexpr int kDegenerateSwitch = 40;
    int stalled = 0;
    for (;;) {
      int enter = -1;
      if (stalled < kDegenerateSwitch) {
        const Rat* best = nullptr;
        for (auto& [j, c] : zrow_.t) {
          if (c < 0 && (allow_artificial || j < first_artificial_)) {
            if (!best || c < *best) {
              best = &c;
              enter = j;
            }
          }
        }
      } else {
        for (auto& [j, c] : zrow_.t) {
          if (c < 0 && (allow_artificial || j < first_artificial_)) {
            enter = j;
            break;
          }
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Rat best_ratio, leave_coeff;
      for (size_t r = 0; r < rows_.size(); ++r) {
        Rat a = rows_[r].get(enter);
        if (a > 0) {
          Rat ratio = rhs_[r] / a;
          if (leave < 0 || ratio < best_ratio) {
            leave = static_cast<int>(r);
            best_ratio = ratio;
            leave_coeff = a;
          } else if (ratio == best_ratio &&
                     lex_less(rows_[r], a, rows_[leave], leave_coeff)) {
            leave = static_cast<int>(r);
            leave_coeff = a;
          }
        }
      }
      if (leave < 0) return false;
      if (best_ratio == 0)
        ++stalled;
      else
        stalled = 0;
      pivot(leave, enter);
      ++pivots_;
    }
  }

  // Lexicographic comparison of rows scaled by their pivot-column entries;
  // used to break ratio ties, which curbs degenerate stalling.
  static bool lex_less(const SparseVec& a, const Rat& da, const SparseVec& b,
                       const Rat& db) {
    size_t i = 0, j = 0;
    while (i < a.t.size() || j < b.t.size()) {
      int ca = i < a.t.size() ? a.t[i].first : INT_MAX;
      int cb = j < b.t.size() ? b.t[j].first : INT_MAX;
      if (ca < cb) {
        int s = sgn(a.t[i].second);
        if (s != 0) return s < 0;
        ++i;
      } else if (cb < ca) {
        int s = sgn(b.t[j].second);
        if (s != 0) return s > 0;
        ++j;
      } else {
        Rat va = a.t[i].second / da, vb = b.t[j].second / db;
        if (va != vb) return va < vb;
        ++i;
        ++j;
      }
    }
    return false;
  }

  void pivot(int r, int j) {
    Rat d = rows_[r].get(j);
    assert(d != 0);
    rows_[r].scale(1 / d);
    rhs_[r] /= d;
    for (size_t i = 0; i < rows_.size(); ++i) {
      if ((int)i == r) continue;
      Rat a = rows_[i].get(j);
      if (a != 0) {
        rows_[i].axpy(-a, rows_[r]);
        rhs_[i] -= a * rhs_[r];
      }
    }
    Rat z = zrow_.get(j);
    if (z != 0) {
      zrow_.axpy(-z, rows_[r]);
      zval_ += z * rhs_[r];
    }
    basis_[r] = j;
  }

  void remove_artificials() {
    for (size_t r = 0; r < rows_.size();) {
      if (basis_[r] < first_artificial_) {
        ++r;
        continue;
      }
      // Basic artificial at value 0; pivot it out or drop a redundant row.
      int j = -1;
      for (auto& [col, c] : rows_[r].t) {
        if (col < first_artificial_ && c != 0) {
          j = col;
          break;
        }
      }
      if (j >= 0) {
        pivot(static_cast<int>(r), j);
        ++r;
      } else {
        rows_.erase(rows_.begin() + r);
        rhs_.erase(rhs_.begin() + r);
        basis_.erase(basis_.begin() + r);
      }
    }
    // Drop artificial columns entirely.
    for (auto& row : rows_) {
      while (!row.t.empty() && row.t.back().first >= first_artificial_)
        row.t.pop_back();
    }
  }

  std::vector<int> col_of_pos_, col_of_neg_;
  std::vector<int> surplus_cols_;
  std::vector<SparseVec> rows_;
  std::vector<Rat> rhs_;
  std::vector<int> basis_;
  SparseVec zrow_;
  Rat zval_;
  int n_struct_ = 0;
  int first_artificial_ = 0;
  int ncols_ = 0;

 public:
  long pivots_ = 0;
  size_t peak_bits() const {
    size_t peak = 0;
    for (auto& row : rows_)
      for (auto& [j, c] : row.t)
        peak = std::max(peak, mpz_sizeinbase(c.get_num_mpz_t(), 2) +
                                  mpz_sizeinbase(c.get_den_mpz_t(), 2));
    return peak;
  }
  size_t live_rows() const { return rows_.size(); }
};

struct Presolve {
  std::vector<PreRow> rows;
  SparseVec objective;
  Rat obj_const = 0;
  std::vector<Eliminated> eliminated;
  std::vector<char> gone;  // per var
  const std::vector<char>& nonneg;
  int nvars;
  bool infeasible = false;

  // col -> rows currently containing it
  std::vector<std::set<int>> occ;

  Presolve(const LinearProgram& lp) : nonneg(lp.nonneg), nvars(lp.num_vars()) {
    gone.assign(nvars, 0);
    occ.assign(nvars, {});
    rows.reserve(lp.rows.size());
    for (auto& r : lp.rows) {
      PreRow pr;
      for (auto& [j, c] : r.terms)
        if (c != 0) pr.lhs.set(j, pr.lhs.get(j) + c);
      pr.rhs = r.rhs;
      pr.is_eq = r.is_eq;
      rows.push_back(std::move(pr));
    }
    for (size_t i = 0; i < rows.size(); ++i)
      for (auto& [j, c] : rows[i].lhs.t) occ[j].insert((int)i);
    for (auto& [j, c] : lp.objective) objective.set(j, objective.get(j) + c);
  }

  void substitute(int row_idx, int var) {
    PreRow& def = rows[row_idx];
    Rat a = def.lhs.get(var);
    // var = (rhs - rest)/a
    SparseVec expr;
    for (auto& [j, c] : def.lhs.t)
      if (j != var) expr.set(j, -c / a);
    Rat cst = def.rhs / a;

    auto touched = occ[var];  // copy; we mutate occ during substitution
    for (int ri : touched) {
      if (ri == row_idx || !rows[ri].alive) continue;
      PreRow& rr = rows[ri];
      Rat f = rr.lhs.get(var);
      if (f == 0) continue;
      rr.lhs.set(var, Rat(0));
      for (auto& [j, c] : expr.t) {
        Rat before = rr.lhs.get(j);
        Rat after = before + f * c;
        rr.lhs.set(j, after);
        if (before == 0 && after != 0) occ[j].insert(ri);
        if (before != 0 && after == 0) occ[j].erase(ri);
      }
      rr.rhs -= f * cst;
      occ[var].erase(ri);
    }
    Rat fo = objective.get(var);
    if (fo != 0) {
      objective.set(var, Rat(0));
      for (auto& [j, c] : expr.t) objective.set(j, objective.get(j) + fo * c);
      obj_const += fo * cst;
    }
    // Retire the defining row; keep nonnegativity of the eliminated variable.
    for (auto& [j, c] : def.lhs.t) occ[j].erase(row_idx);
    def.alive = false;
    if (nonneg[var]) {
      PreRow bound;
      bound.lhs = expr;
      bound.rhs = -cst;
      bound.is_eq = false;
      int idx = (int)rows.size();
      rows.push_back(std::move(bound));
      for (auto& [j, c] : rows[idx].lhs.t) occ[j].insert(idx);
    }
    gone[var] = 1;
    eliminated.push_back(Eliminated{var, std::move(expr), std::move(cst)});
  }

  void run() {
    bool progress = true;
    while (progress && !infeasible) {
      progress = false;
      for (size_t ri = 0; ri < rows.size(); ++ri) {
        PreRow& r = rows[ri];
        if (!r.alive || !r.is_eq) continue;
        if (r.lhs.t.empty()) {
          if (r.rhs != 0) {
            infeasible = true;
            return;
          }
          r.alive = false;
          continue;
        }
        int best = -1;
        long best_score = 0;
        for (auto& [j, c] : r.lhs.t) {
          long score = (long)(occ[j].size() - 1) * (long)(r.lhs.t.size() - 1);
          if (best < 0 || score < best_score) {
            best = j;
            best_score = score;
          }
        }
        if (best_score > kFillLimit) continue;
        substitute((int)ri, best);
        progress = true;
      }
    }
    // Trivial inequality cleanup.
    for (auto& r : rows) {
      if (!r.alive || r.is_eq) continue;
      if (r.lhs.t.empty()) {
        if (r.rhs > 0) {
          infeasible = true;
          return;
        }
        r.alive = false;
      }
    }
    dedupe();
  }

  void dedupe() {
    std::map<std::pair<std::vector<std::pair<int, Rat>>, bool>, size_t> seen;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].alive) continue;
      auto key = std::make_pair(rows[i].lhs.t, rows[i].is_eq);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(std::move(key), i);
      } else {
        PreRow& kept = rows[it->second];
        if (kept.is_eq) {
          if (kept.rhs != rows[i].rhs) infeasible = true;
        } else {
          if (rows[i].rhs > kept.rhs) kept.rhs = rows[i].rhs;
        }
        rows[i].alive = false;
      }
    }
  }
};

}  // namespace

LpResult solve_min(const LinearProgram& lp) {
  LpResult res;
  Presolve pre(lp);
  pre.run();
  if (pre.infeasible) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  SimplexSolver solver;
  std::vector<Rat> values;
  Rat obj;
  LpStatus st = solver.run(pre.rows, pre.objective, lp.nonneg, lp.num_vars(), values, obj);
  if (getenv("PBOUND_LP_STATS")) {
    size_t live = 0;
    for (auto& r : pre.rows)
      if (r.alive) ++live;
    fprintf(stderr, "[lp] in=%dv/%zur presolved=%zur pivots=%ld peakbits=%zu\n",
            lp.num_vars(), lp.rows.size(), live, solver.pivots_, solver.peak_bits());
  }
  if (st != LpStatus::Optimal) {
    res.status = st;
    return res;
  }
  // Back-substitute eliminated variables in reverse order.
  for (auto it = pre.eliminated.rbegin(); it != pre.eliminated.rend(); ++it) {
    Rat v = it->cst;
    for (auto& [j, c] : it->expr.t) v += c * values[j];
    values[it->var] = v;
  }
  res.status = LpStatus::Optimal;
  res.values = std::move(values);
  res.objective = obj + pre.obj_const;
  return res;
}

bool lp_feasible(const LinearProgram& lp) {
  LinearProgram copy = lp;
  copy.objective.clear();
  return solve_min(copy).status == LpStatus::Optimal;
}

LpResult iterative_minimize(
    LinearProgram lp, const std::vector<std::vector<std::pair<int, Rat>>>& passes) {
  LpResult last;
  bool first = true;
  for (auto& pass : passes) {
    if (pass.empty()) continue;
    lp.objective = pass;
    LpResult res = solve_min(lp);
    if (res.status == LpStatus::Unbounded)
      throw std::runtime_error("iterative_minimize: unbounded objective pass");
    if (res.status == LpStatus::Infeasible) {
      if (first) return res;  // genuinely infeasible system
      throw std::runtime_error("iterative_minimize: pinning made the LP infeasible");
    }
    for (auto& [v, w] : pass) lp.add_row({{v, Rat(1)}}, res.values[v], /*is_eq=*/true);
    last = std::move(res);
    first = false;
  }
  if (first) {
    // No objective at all: plain feasibility.
    lp.objective.clear();
    last = solve_min(lp);
  }
  return last;
}

}  // namespace pbound
