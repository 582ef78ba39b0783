// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pbound/rational.hpp"

namespace pbound {

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Gt, Lt, Le, Ge, And, Or };

const char* binop_text(BinOp op);
bool is_comparison(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { Var, Num, Bin };
  Kind kind;
  std::string var;           // Kind::Var
  long long num = 0;         // Kind::Num
  BinOp op = BinOp::Add;     // Kind::Bin
  ExprPtr lhs, rhs;

  static ExprPtr make_var(std::string name);
  static ExprPtr make_num(long long n);
  static ExprPtr make_bin(BinOp op, ExprPtr l, ExprPtr r);
  ExprPtr clone() const;
};

bool expr_equal(const Expr& a, const Expr& b);

// Discrete distributions with finite integer support and exact rational
// masses.
struct Dist {
  enum class Kind { Bernoulli, Binomial, Uniform, Hypergeom };
  Kind kind;
  Rat p;                 // Bernoulli, Binomial
  long long n = 0;       // Binomial trials / Hypergeom draws
  long long lo = 0, hi = 0;  // Uniform bounds
  long long N = 0, K = 0;    // Hypergeom population / successes

  static Dist bernoulli(Rat p);
  static Dist binomial(long long n, Rat p);
  static Dist uniform(long long lo, long long hi);
  static Dist hypergeom(long long N, long long K, long long n);

  // Inclusive support interval (before zero-mass trimming).
  std::pair<long long, long long> support_bounds() const;
  std::string to_string() const;
  bool operator==(const Dist& o) const;
};

// Exact pmf: (value, mass) pairs in increasing value order, zero-mass points
// dropped, masses summing to exactly 1.
std::vector<std::pair<long long, Rat>> dist_support(const Dist& d);

struct Command;
using CommandPtr = std::unique_ptr<Command>;

struct Command {
  enum class Kind {
    Skip,
    Abort,
    Assert,
    Tick,
    Assign,
    Sample,
    ProbIf,
    NonDetIf,
    CondIf,
    Seq,
    While,
    Call
  };
  Kind kind;
  int label = -1;  // unique, contiguous per program; assigned by the frontend

  ExprPtr guard;        // Assert, CondIf, While
  Rat amount;           // Tick
  std::string var;      // Assign, Sample
  ExprPtr rhs;          // Assign; Sample base expression
  bool sample_add = true;  // Sample: x = e + D vs x = e - D
  Dist dist = Dist::uniform(0, 0);  // Sample
  Rat prob;             // ProbIf
  CommandPtr c1, c2;    // ProbIf, NonDetIf, CondIf, Seq; While/first of body
  std::string callee;   // Call

  static CommandPtr make(Kind k);
};

struct Program {
  std::vector<std::string> globals;
  std::vector<std::pair<std::string, CommandPtr>> procs;  // declaration order
  CommandPtr main_body;
  int num_labels = 0;

  const Command* proc_body(const std::string& name) const;
};

// Walks every command node of the program (procedure bodies first, then main).
void for_each_command(const Program& p, const std::function<void(const Command&)>& fn);

}  // namespace pbound
