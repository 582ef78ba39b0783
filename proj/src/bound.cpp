// SPDX-License-Identifier: Apache-2.0
#include "pbound/bound.hpp"

#include <algorithm>

#include <json.hpp>

namespace pbound {

Rat Bound::eval(const std::vector<long long>& state) const {
  Rat r(0);
  for (auto& t : terms) r += t.coeff * eval_base(t.mono, state);
  return r;
}

Bound canonicalize_bound(Bound b) {
  // Merge equal monomials, drop zeros, order by degree descending then atoms.
  std::vector<Bound::Term> merged;
  std::sort(b.terms.begin(), b.terms.end(),
            [](const Bound::Term& a, const Bound::Term& b) { return a.mono < b.mono; });
  for (auto& t : b.terms) {
    if (!merged.empty() && merged.back().mono == t.mono)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Bound::Term& t) { return t.coeff == 0; }),
               merged.end());
  std::sort(merged.begin(), merged.end(),
            [](const Bound::Term& a, const Bound::Term& b) {
              if (a.mono.degree() != b.mono.degree())
                return a.mono.degree() > b.mono.degree();
              return a.mono < b.mono;
            });
  b.terms = std::move(merged);
  return b;
}

Bound extract_bound(const std::vector<Rat>& assignment, const SymAnnotation& root,
                    const BaseFnSet& B) {
  Bound b;
  for (int i = 0; i < B.size(); ++i) {
    const Rat& c = assignment[root.v[i]];
    if (c != 0) b.terms.push_back(Bound::Term{c, B.fns[i]});
  }
  return canonicalize_bound(std::move(b));
}

std::string bound_to_text(const Bound& b, const Module& m, bool decimal) {
  if (b.terms.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < b.terms.size(); ++i) {
    auto& t = b.terms[i];
    if (i) s += " + ";
    std::string coeff = decimal ? rat_to_decimal(t.coeff) : rat_to_string(t.coeff);
    if (t.mono.is_one()) {
      s += coeff;
    } else if (t.coeff == 1) {
      s += t.mono.to_string(m);
    } else {
      s += coeff + "*" + t.mono.to_string(m);
    }
  }
  return s;
}

std::string bound_to_json(const Bound& b, const Module& m) {
  nlohmann::json j;
  j["terms"] = nlohmann::json::array();
  for (auto& t : b.terms) {
    nlohmann::json term;
    term["coeff"] = rat_to_string(t.coeff);
    term["atoms"] = nlohmann::json::array();
    for (auto& a : t.mono.atoms) {
      nlohmann::json atom;
      auto endpoint = [&](int v, long long k) {
        if (v < 0) return std::to_string(k);
        std::string s = m.var_name(v);
        if (k > 0) s += "+" + std::to_string(k);
        if (k < 0) s += std::to_string(k);
        return s;
      };
      if (a.lo >= 0) {
        atom["lo"] = endpoint(a.lo, 0);
        atom["hi"] = endpoint(a.hi, a.shift);
      } else {
        atom["lo"] = endpoint(-1, -a.shift);
        atom["hi"] = endpoint(a.hi, 0);
      }
      term["atoms"].push_back(atom);
    }
    j["terms"].push_back(term);
  }
  return j.dump();
}

}  // namespace pbound
