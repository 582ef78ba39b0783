// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pbound/contexts.hpp"
#include "pbound/lp.hpp"
#include "pbound/module.hpp"
#include "pbound/potential.hpp"

namespace pbound {

// Symbolic potential annotation: one LP variable per base function.
struct SymAnnotation {
  std::vector<int> v;
};

struct ProcSpec {
  LinCtx pre_ctx, post_ctx;
  SymAnnotation pre, post;
};

struct DeriveOptions {
  int specs_per_proc = 1;
};

struct DeriveResult {
  LinearProgram lp;
  SymAnnotation root;
  std::map<std::string, std::vector<ProcSpec>> specs;
  // Solved-value diagnostics: annotations at interesting nodes.
  std::map<int, SymAnnotation> pre_of_label;
  std::map<int, SymAnnotation> post_of_label;
  int weaken_sites = 0;
};

// Backward, syntax-directed application of the derivation rules. All
// annotation coefficients, weakening multipliers and call frames are
// nonnegative LP variables. The solved value of `root` is the bound.
DeriveResult derive_program(const Module& m, const BaseFnSet& B, const ContextMap& cm,
                            const std::vector<RewriteFn>& rewrites,
                            const DeriveOptions& opts = {});

// Degree-wise objective passes for iterative minimization (highest degree
// first, then the constant entry). Weight of an entry is the product over its
// atoms of 10^(number of base atoms whose interval contains it).
std::vector<std::vector<std::pair<int, Rat>>> objective_passes(
    const SymAnnotation& root, const BaseFnSet& B, int degree);

}  // namespace pbound
