// SPDX-License-Identifier: Apache-2.0
#include "pbound/ast.hpp"

#include <stdexcept>

namespace pbound {

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "div";
    case BinOp::Mod: return "mod";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "<>";
    case BinOp::Gt: return ">";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Gt:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Ge:
      return true;
    default:
      return false;
  }
}

ExprPtr Expr::make_var(std::string name) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Var;
  e->var = std::move(name);
  return e;
}

ExprPtr Expr::make_num(long long n) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Num;
  e->num = n;
  return e;
}

ExprPtr Expr::make_bin(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Bin;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::clone() const {
  switch (kind) {
    case Kind::Var: return make_var(var);
    case Kind::Num: return make_num(num);
    case Kind::Bin: return make_bin(op, lhs->clone(), rhs->clone());
  }
  return nullptr;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Var: return a.var == b.var;
    case Expr::Kind::Num: return a.num == b.num;
    case Expr::Kind::Bin:
      return a.op == b.op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  }
  return false;
}

Dist Dist::bernoulli(Rat p) {
  Dist d;
  d.kind = Kind::Bernoulli;
  p.canonicalize();
  d.p = std::move(p);
  return d;
}

Dist Dist::binomial(long long n, Rat p) {
  Dist d;
  d.kind = Kind::Binomial;
  d.n = n;
  p.canonicalize();
  d.p = std::move(p);
  return d;
}

Dist Dist::uniform(long long lo, long long hi) {
  Dist d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Dist Dist::hypergeom(long long N, long long K, long long n) {
  Dist d;
  d.kind = Kind::Hypergeom;
  d.N = N;
  d.K = K;
  d.n = n;
  return d;
}

std::pair<long long, long long> Dist::support_bounds() const {
  switch (kind) {
    case Kind::Bernoulli: return {0, 1};
    case Kind::Binomial: return {0, n};
    case Kind::Uniform: return {lo, hi};
    case Kind::Hypergeom:
      return {std::max(0LL, n + K - N), std::min(n, K)};
  }
  return {0, 0};
}

std::string Dist::to_string() const {
  switch (kind) {
    case Kind::Bernoulli: return "ber(" + rat_to_string(p) + ")";
    case Kind::Binomial:
      return "bin(" + std::to_string(n) + ", " + rat_to_string(p) + ")";
    case Kind::Uniform:
      return "unif(" + std::to_string(lo) + ", " + std::to_string(hi) + ")";
    case Kind::Hypergeom:
      return "hyper(" + std::to_string(N) + ", " + std::to_string(K) + ", " +
             std::to_string(n) + ")";
  }
  return "?";
}

bool Dist::operator==(const Dist& o) const {
  return kind == o.kind && p == o.p && n == o.n && lo == o.lo && hi == o.hi &&
         N == o.N && K == o.K;
}

static Int binom_coeff(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

std::vector<std::pair<long long, Rat>> dist_support(const Dist& d) {
  std::vector<std::pair<long long, Rat>> out;
  auto push = [&](long long v, Rat mass) {
    mass.canonicalize();
    if (mass != 0) out.emplace_back(v, std::move(mass));
  };
  switch (d.kind) {
    case Dist::Kind::Bernoulli:
      push(0, 1 - d.p);
      push(1, d.p);
      break;
    case Dist::Kind::Binomial: {
      // C(n,k) p^k (1-p)^(n-k), exact.
      Rat q = 1 - d.p;
      for (long long k = 0; k <= d.n; ++k) {
        Rat mass(binom_coeff(d.n, k));
        for (long long i = 0; i < k; ++i) mass *= d.p;
        for (long long i = 0; i < d.n - k; ++i) mass *= q;
        push(k, mass);
      }
      break;
    }
    case Dist::Kind::Uniform: {
      Rat mass(1, static_cast<long>(d.hi - d.lo + 1));
      mass.canonicalize();
      for (long long v = d.lo; v <= d.hi; ++v) push(v, mass);
      break;
    }
    case Dist::Kind::Hypergeom: {
      auto [lo, hi] = d.support_bounds();
      Rat denom(binom_coeff(d.N, d.n));
      for (long long k = lo; k <= hi; ++k) {
        Rat mass = Rat(binom_coeff(d.K, k) * binom_coeff(d.N - d.K, d.n - k)) / denom;
        mass.canonicalize();
        push(k, mass);
      }
      break;
    }
  }
  return out;
}

CommandPtr Command::make(Kind k) {
  auto c = std::make_unique<Command>();
  c->kind = k;
  return c;
}

const Command* Program::proc_body(const std::string& name) const {
  for (auto& [n, body] : procs)
    if (n == name) return body.get();
  return nullptr;
}

static void walk(const Command& c, const std::function<void(const Command&)>& fn) {
  fn(c);
  if (c.c1) walk(*c.c1, fn);
  if (c.c2) walk(*c.c2, fn);
}

void for_each_command(const Program& p, const std::function<void(const Command&)>& fn) {
  for (auto& [name, body] : p.procs) walk(*body, fn);
  if (p.main_body) walk(*p.main_body, fn);
}

}  // namespace pbound
