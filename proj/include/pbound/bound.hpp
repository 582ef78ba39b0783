// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pbound/derive.hpp"
#include "pbound/lp.hpp"
#include "pbound/potential.hpp"

namespace pbound {

// Solved symbolic bound: positive-coefficient terms over base-function
// monomials, canonically ordered (degree descending, then atom order).
struct Bound {
  struct Term {
    Rat coeff;
    BaseFn mono;
    bool operator==(const Term& o) const { return coeff == o.coeff && mono == o.mono; }
  };
  std::vector<Term> terms;

  bool is_zero() const { return terms.empty(); }
  Rat eval(const std::vector<long long>& state) const;
  bool operator==(const Bound& o) const { return terms == o.terms; }
};

Bound canonicalize_bound(Bound b);

Bound extract_bound(const std::vector<Rat>& assignment, const SymAnnotation& root,
                    const BaseFnSet& B);

std::string bound_to_text(const Bound& b, const Module& m, bool decimal = false);
std::string bound_to_json(const Bound& b, const Module& m);

}  // namespace pbound
