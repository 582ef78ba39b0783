// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pbound/bound.hpp"
#include "pbound/contexts.hpp"
#include "pbound/derive.hpp"
#include "pbound/ert.hpp"
#include "pbound/interp.hpp"
#include "pbound/module.hpp"
#include "pbound/parser.hpp"
#include "pbound/potential.hpp"

namespace pbound {

struct AnalyzeOptions {
  int degree = 2;
  int specs_per_proc = 1;
  std::string hints_text;  // extra rewrite functions
};

// Keeps the program (and the Module pointing into it) alive together with
// everything derived from it.
struct Analysis {
  Program program;
  std::unique_ptr<Module> module;
  ContextMap contexts;
  BaseFnSet base_fns;
  std::vector<RewriteFn> rewrites;
  DeriveResult derivation;
  LpResult solution;                 // from iterative minimization
  std::optional<Bound> bound;        // empty: no bound of this degree
  int degree_used = 0;
  double seconds = 0;

  int lp_vars() const { return derivation.lp.num_vars(); }
  int lp_rows() const { return static_cast<int>(derivation.lp.rows.size()); }
};

// Full pipeline: parse is assumed done. Throws on internal errors; an
// infeasible LP is reported as bound == nullopt.
Analysis analyze_program(Program prog, const AnalyzeOptions& opts = {});

Analysis analyze_source(const std::string& source, const AnalyzeOptions& opts = {});

// Parses "x=0,n=100" into a state over the program globals (missing ones 0).
State parse_input_point(const Module& m, const std::string& text);

}  // namespace pbound
