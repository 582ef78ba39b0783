// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>

#include "pbound/interp.hpp"
#include "pbound/linexpr.hpp"
#include "pbound/module.hpp"

namespace pbound {

struct ErtOptions {
  long long unroll = 200;       // loop unrolling and call inlining depth
  size_t memo_cap = 2'000'000;  // configuration cap; exceeded -> exception
  std::optional<LinExpr> terminal;  // post-expectation f; default 0
};

struct ErtResult {
  Rat lower;     // exact expected cost of the truncated program
  Rat residual;  // probability mass reaching a truncation point
};

struct SupportCapExceeded : std::runtime_error {
  SupportCapExceeded() : std::runtime_error("ert_truncated: state cap exceeded") {}
};

// Exact expected cost of the K-truncated program (loops as bounded
// unrollings, calls as bounded inlinings, nondeterminism by pointwise max).
// Bounded approximants increase to the true ert, so `lower` is a certified
// lower bound on the expected cost whenever terminal f is nonnegative.
ErtResult ert_truncated(const Module& m, const State& initial, const ErtOptions& opts = {});

}  // namespace pbound
