// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unordered_map>
#include <vector>

#include "pbound/ast.hpp"

namespace pbound {

// Resolved view of a parsed program: name -> index tables and label -> node
// map shared by the analyses and the interpreter.
struct Module {
  const Program* prog = nullptr;
  std::unordered_map<std::string, int> var_index;
  std::unordered_map<std::string, const Command*> proc_bodies;
  std::vector<const Command*> by_label;

  explicit Module(const Program& p) : prog(&p) {
    for (size_t i = 0; i < p.globals.size(); ++i)
      var_index.emplace(p.globals[i], static_cast<int>(i));
    for (auto& [name, body] : p.procs) proc_bodies.emplace(name, body.get());
    by_label.assign(p.num_labels, nullptr);
    for_each_command(p, [&](const Command& c) {
      if (c.label >= 0 && c.label < (int)by_label.size()) by_label[c.label] = &c;
    });
  }

  int var(const std::string& name) const {
    auto it = var_index.find(name);
    return it == var_index.end() ? -1 : it->second;
  }
  int num_vars() const { return static_cast<int>(prog->globals.size()); }
  const std::string& var_name(int i) const { return prog->globals[i]; }
};

}  // namespace pbound
