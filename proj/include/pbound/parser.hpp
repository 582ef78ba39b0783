// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "pbound/ast.hpp"

namespace pbound {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at " + std::to_string(line) + ":" +
                           std::to_string(col)),
        line(line),
        col(col) {}
};

// Parses and validates a program; throws ParseError with line/column on any
// lexical, syntactic or semantic problem (undeclared variable, bad
// distribution parameters, probability outside [0,1], ...). On success every
// command node carries a unique label, contiguous from 0.
Program parse_program(const std::string& source);

std::string print_program(const Program& p);
std::string print_expr(const Expr& e);
std::string print_command(const Command& c, int indent = 0);

}  // namespace pbound
