// SPDX-License-Identifier: Apache-2.0
#include "pbound/pipeline.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace pbound {

Analysis analyze_program(Program prog, const AnalyzeOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  Analysis a;
  a.program = std::move(prog);
  a.module = std::make_unique<Module>(a.program);
  a.contexts = infer_contexts(*a.module);
  // Escalate through the degrees: a low-degree bound is also a bound of the
  // requested degree and its LP is much smaller.
  for (int degree = 1; degree <= std::max(1, opts.degree); ++degree) {
    a.degree_used = degree;
    a.base_fns = gen_base_functions(*a.module, a.contexts, degree);
    a.rewrites = gen_rewrite_functions(a.base_fns, degree);
    if (!opts.hints_text.empty()) {
      auto extra = parse_hints(opts.hints_text, a.base_fns, *a.module);
      for (auto& f : extra) a.rewrites.push_back(std::move(f));
    }
    DeriveOptions dopts;
    dopts.specs_per_proc = opts.specs_per_proc;
    a.derivation = derive_program(*a.module, a.base_fns, a.contexts, a.rewrites, dopts);
    auto passes = objective_passes(a.derivation.root, a.base_fns, degree);
    a.solution = iterative_minimize(a.derivation.lp, passes);
    if (a.solution.status == LpStatus::Optimal) {
      a.bound = extract_bound(a.solution.values, a.derivation.root, a.base_fns);
      break;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  a.seconds = std::chrono::duration<double>(t1 - t0).count();
  return a;
}

Analysis analyze_source(const std::string& source, const AnalyzeOptions& opts) {
  return analyze_program(parse_program(source), opts);
}

State parse_input_point(const Module& m, const std::string& text) {
  State s(m.num_vars(), 0);
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad input point entry '" + item + "'");
    std::string name = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    auto strip = [](std::string& s) {
      while (!s.empty() && isspace((unsigned char)s.front())) s.erase(s.begin());
      while (!s.empty() && isspace((unsigned char)s.back())) s.pop_back();
    };
    strip(name);
    strip(value);
    int v = m.var(name);
    if (v < 0) throw std::runtime_error("unknown variable '" + name + "' in input point");
    s[v] = std::stoll(value);
  }
  return s;
}

}  // namespace pbound
