// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pbound/linexpr.hpp"
#include "pbound/module.hpp"

namespace pbound {

// Per-label pre/post logical contexts from a forward abstract interpretation
// over conjunctions of linear inequalities. Loops are widened after three
// unstable iterations; procedure bodies are analyzed from a top entry
// context, with call postconditions refined over a few whole-program rounds.
struct ContextMap {
  std::vector<LinCtx> pre, post;
  LinCtx exit_of_main;
  std::vector<std::pair<std::string, LinCtx>> proc_exit;

  const LinCtx& pre_of(const Command& c) const { return pre[c.label]; }
  const LinCtx& post_of(const Command& c) const { return post[c.label]; }
};

ContextMap infer_contexts(const Module& m);

std::string contexts_to_text(const Module& m, const ContextMap& cm);

}  // namespace pbound
