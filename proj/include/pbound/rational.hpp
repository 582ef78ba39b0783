// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace pbound {

// All analysis arithmetic is exact; Rat is the only number type that crosses
// module boundaries.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "7", "-3", "3/4", "0.25". Decimal literals are normalized to the
// exact fraction they denote.
std::optional<Rat> parse_rat(const std::string& text);

std::string rat_to_string(const Rat& r);

// Decimal rendering with `sig` significant digits, round half away from zero,
// trailing zeros stripped ("15/2" -> "7.5", "91/11" -> "8.27273").
std::string rat_to_decimal(const Rat& r, int sig = 6);

inline long rat_to_long(const Rat& r) {
  if (r.get_den() != 1) throw std::runtime_error("rat_to_long: not an integer");
  return mpz_get_si(r.get_num_mpz_t());
}

}  // namespace pbound
