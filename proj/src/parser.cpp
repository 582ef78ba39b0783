// SPDX-License-Identifier: Apache-2.0
#include "pbound/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace pbound {

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::Kind::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        s.push_back(take());
      tok_ = {Token::Kind::Ident, s, tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '.'))
        s.push_back(take());
      tok_ = {Token::Kind::Number, s, tok_.line, tok_.col};
      return;
    }
    // Multi-char punctuation first.
    static const char* two[] = {"==", "<>", "<=", ">=", "&&", "||"};
    for (auto* t : two) {
      if (src_.compare(pos_, 2, t) == 0) {
        take();
        take();
        tok_ = {Token::Kind::Punct, t, tok_.line, tok_.col};
        return;
      }
    }
    std::string s(1, take());
    tok_ = {Token::Kind::Punct, s, tok_.line, tok_.col};
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  char take() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Program parse() {
    Program p;
    while (is_kw("var")) {
      expect_kw("var");
      p.globals.push_back(expect_ident());
      expect_punct(";");
    }
    while (is_kw("proc")) {
      expect_kw("proc");
      std::string name = expect_ident();
      p.procs.emplace_back(name, parse_block());
    }
    if (is_kw("main")) {
      expect_kw("main");
      p.main_body = parse_block();
    } else if (lex_.peek().kind != Token::Kind::End) {
      p.main_body = parse_stmt_list();
    } else {
      p.main_body = Command::make(Command::Kind::Skip);
    }
    if (lex_.peek().kind != Token::Kind::End) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  bool is_kw(const char* kw) {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == kw;
  }
  bool is_punct(const char* p) {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  void expect_kw(const char* kw) {
    if (!is_kw(kw)) fail(std::string("expected '") + kw + "'");
    lex_.next();
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    lex_.next();
  }
  std::string expect_ident() {
    if (lex_.peek().kind != Token::Kind::Ident) fail("expected identifier");
    return lex_.next().text;
  }

  Rat expect_rat() {
    bool neg = false;
    if (is_punct("-")) {
      lex_.next();
      neg = true;
    }
    if (lex_.peek().kind != Token::Kind::Number) fail("expected number");
    std::string num = lex_.next().text;
    if (is_punct("/")) {
      lex_.next();
      if (lex_.peek().kind != Token::Kind::Number) fail("expected denominator");
      num += "/" + lex_.next().text;
    }
    auto r = parse_rat(num);
    if (!r) fail("bad numeric literal '" + num + "'");
    return neg ? -*r : *r;
  }

  long long expect_int() {
    Rat r = expect_rat();
    if (r.get_den() != 1) fail("expected integer");
    return mpz_get_si(r.get_num_mpz_t());
  }

  // Blocks: `{ stmts }` or a single statement.
  CommandPtr parse_block() {
    if (is_punct("{")) {
      lex_.next();
      CommandPtr body;
      if (is_punct("}")) {
        body = Command::make(Command::Kind::Skip);
      } else {
        body = parse_stmt_list_until("}");
      }
      expect_punct("}");
      return body;
    }
    return parse_stmt();
  }

  CommandPtr parse_stmt_list() { return parse_stmt_list_until(nullptr); }

  CommandPtr parse_stmt_list_until(const char* closer) {
    CommandPtr head = parse_stmt();
    while (lex_.peek().kind != Token::Kind::End && !(closer && is_punct(closer))) {
      CommandPtr next = parse_stmt();
      auto seq = Command::make(Command::Kind::Seq);
      seq->c1 = std::move(head);
      seq->c2 = std::move(next);
      head = std::move(seq);
    }
    return head;
  }

  // stmt := unit [ "[" rat "]" unit ] terminator
  // A trailing ';' is required unless the statement ends with '}'.
  CommandPtr parse_stmt() {
    bool braced = false;
    CommandPtr c = parse_unit(&braced);
    if (is_punct("[")) {
      lex_.next();
      Rat p = expect_rat();
      expect_punct("]");
      bool braced2 = false;
      CommandPtr c2 = parse_unit(&braced2);
      auto pi = Command::make(Command::Kind::ProbIf);
      pi->prob = p;
      pi->c1 = std::move(c);
      pi->c2 = std::move(c2);
      c = std::move(pi);
      braced = braced2;
    }
    if (!braced) {
      expect_punct(";");
    } else if (is_punct(";")) {
      lex_.next();  // tolerate `};`
    }
    return c;
  }

  // unit := "{" stmts "}" | simple statement without its terminator
  CommandPtr parse_unit(bool* braced) {
    *braced = false;
    if (is_punct("{")) {
      *braced = true;
      return parse_block();
    }
    if (is_kw("skip")) {
      lex_.next();
      return Command::make(Command::Kind::Skip);
    }
    if (is_kw("abort")) {
      lex_.next();
      return Command::make(Command::Kind::Abort);
    }
    if (is_kw("assert") || is_kw("assume")) {
      lex_.next();
      expect_punct("(");
      auto c = Command::make(Command::Kind::Assert);
      c->guard = parse_expr();
      expect_punct(")");
      return c;
    }
    if (is_kw("tick")) {
      lex_.next();
      expect_punct("(");
      auto c = Command::make(Command::Kind::Tick);
      c->amount = expect_rat();
      expect_punct(")");
      return c;
    }
    if (is_kw("call")) {
      lex_.next();
      auto c = Command::make(Command::Kind::Call);
      c->callee = expect_ident();
      return c;
    }
    if (is_kw("while")) {
      lex_.next();
      expect_punct("(");
      auto c = Command::make(Command::Kind::While);
      c->guard = parse_expr();
      expect_punct(")");
      *braced = true;
      c->c1 = parse_block();
      return c;
    }
    if (is_kw("if")) {
      lex_.next();
      expect_punct("(");
      bool nondet = false;
      ExprPtr guard;
      if (is_punct("*")) {
        lex_.next();
        nondet = true;
      } else {
        guard = parse_expr();
      }
      expect_punct(")");
      CommandPtr then_branch = parse_block();
      CommandPtr else_branch;
      if (is_kw("else")) {
        lex_.next();
        else_branch = parse_block();
      } else {
        if (nondet) fail("nondeterministic choice requires an else branch");
        else_branch = Command::make(Command::Kind::Skip);
      }
      auto c = Command::make(nondet ? Command::Kind::NonDetIf : Command::Kind::CondIf);
      c->guard = std::move(guard);
      c->c1 = std::move(then_branch);
      c->c2 = std::move(else_branch);
      *braced = true;
      return c;
    }
    // Assignment or sampling: id "=" rhs
    if (lex_.peek().kind == Token::Kind::Ident) {
      std::string name = expect_ident();
      expect_punct("=");
      return parse_rhs(name);
    }
    fail("expected statement");
  }

  bool at_dist() {
    return is_kw("ber") || is_kw("bin") || is_kw("unif") || is_kw("hyper");
  }

  Dist parse_dist() {
    std::string name = expect_ident();
    expect_punct("(");
    Dist d = Dist::uniform(0, 0);
    if (name == "ber") {
      d = Dist::bernoulli(expect_rat());
    } else if (name == "bin") {
      long long n = expect_int();
      expect_punct(",");
      d = Dist::binomial(n, expect_rat());
    } else if (name == "unif") {
      long long lo = expect_int();
      expect_punct(",");
      d = Dist::uniform(lo, expect_int());
    } else if (name == "hyper") {
      long long N = expect_int();
      expect_punct(",");
      long long K = expect_int();
      expect_punct(",");
      d = Dist::hypergeom(N, K, expect_int());
    } else {
      fail("unknown distribution '" + name + "'");
    }
    expect_punct(")");
    return d;
  }

  // rhs := dist | e | e ("+"|"-") dist
  CommandPtr parse_rhs(const std::string& target) {
    if (at_dist()) {
      // Pure sampling x = D is sugar for x = 0 + D.
      auto c = Command::make(Command::Kind::Sample);
      c->var = target;
      c->rhs = Expr::make_num(0);
      c->sample_add = true;
      c->dist = parse_dist();
      return c;
    }
    ExprPtr e = parse_additive_until_dist();
    if (at_dist()) {
      // parse_additive_until_dist stopped right before `+ D` / `- D`.
      auto c = Command::make(Command::Kind::Sample);
      c->var = target;
      c->sample_add = pending_sample_add_;
      c->rhs = std::move(e);
      c->dist = parse_dist();
      return c;
    }
    auto c = Command::make(Command::Kind::Assign);
    c->var = target;
    c->rhs = std::move(e);
    return c;
  }

  // Full expression grammar: || < && < comparisons < additive < multiplicative.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (is_punct("||") || is_punct("|")) {
      lex_.next();
      e = Expr::make_bin(BinOp::Or, std::move(e), parse_and());
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (is_punct("&&") || is_punct("&")) {
      lex_.next();
      e = Expr::make_bin(BinOp::And, std::move(e), parse_cmp());
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    for (;;) {
      BinOp op;
      if (is_punct("==")) op = BinOp::Eq;
      else if (is_punct("<>")) op = BinOp::Ne;
      else if (is_punct("<=")) op = BinOp::Le;
      else if (is_punct(">=")) op = BinOp::Ge;
      else if (is_punct("<")) op = BinOp::Lt;
      else if (is_punct(">")) op = BinOp::Gt;
      else break;
      lex_.next();
      e = Expr::make_bin(op, std::move(e), parse_add());
    }
    return e;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      BinOp op = is_punct("+") ? BinOp::Add : BinOp::Sub;
      lex_.next();
      e = Expr::make_bin(op, std::move(e), parse_mul());
    }
    return e;
  }

  // Additive parse that stops in front of a distribution call so that
  // `x = e + unif(0,3)` splits at the sampling operator.
  ExprPtr parse_additive_until_dist() {
    ExprPtr e = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      bool add = is_punct("+");
      lex_.next();
      if (at_dist()) {
        pending_sample_add_ = add;
        return e;
      }
      e = Expr::make_bin(add ? BinOp::Add : BinOp::Sub, std::move(e), parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_atom();
    for (;;) {
      BinOp op;
      if (is_punct("*")) op = BinOp::Mul;
      else if (is_kw("div")) op = BinOp::Div;
      else if (is_kw("mod")) op = BinOp::Mod;
      else break;
      lex_.next();
      e = Expr::make_bin(op, std::move(e), parse_atom());
    }
    return e;
  }

  ExprPtr parse_atom() {
    if (is_punct("(")) {
      lex_.next();
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (is_punct("-")) {
      lex_.next();
      return Expr::make_bin(BinOp::Sub, Expr::make_num(0), parse_atom());
    }
    if (lex_.peek().kind == Token::Kind::Number) {
      std::string t = lex_.next().text;
      auto r = parse_rat(t);
      if (!r || r->get_den() != 1) fail("integer literal expected in expression");
      return Expr::make_num(mpz_get_si(r->get_num_mpz_t()));
    }
    if (lex_.peek().kind == Token::Kind::Ident) {
      if (is_kw("true")) {
        lex_.next();
        return Expr::make_num(1);
      }
      if (is_kw("false")) {
        lex_.next();
        return Expr::make_num(0);
      }
      return Expr::make_var(expect_ident());
    }
    fail("expected expression");
  }

  Lexer lex_;
  bool pending_sample_add_ = true;
};

// ---- validation --------------------------------------------------------

struct Validator {
  const Program& p;
  std::set<std::string> globals;

  void run() {
    for (auto& g : p.globals) {
      if (!globals.insert(g).second)
        throw ParseError("duplicate global '" + g + "'", 0, 0);
    }
    std::set<std::string> procnames;
    for (auto& [name, body] : p.procs) {
      if (name == "main") throw ParseError("'main' is reserved", 0, 0);
      if (!procnames.insert(name).second)
        throw ParseError("duplicate procedure '" + name + "'", 0, 0);
    }
    for (auto& [name, body] : p.procs) check_cmd(*body);
    check_cmd(*p.main_body);
  }

  void check_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (!globals.count(e.var))
          throw ParseError("undeclared variable '" + e.var + "'", 0, 0);
        break;
      case Expr::Kind::Num:
        break;
      case Expr::Kind::Bin:
        if ((e.op == BinOp::Div || e.op == BinOp::Mod) &&
            e.rhs->kind == Expr::Kind::Num && e.rhs->num == 0)
          throw ParseError("division by literal zero", 0, 0);
        check_expr(*e.lhs);
        check_expr(*e.rhs);
        break;
    }
  }

  void check_dist(const Dist& d) {
    auto bad = [&](const std::string& why) {
      throw ParseError("invalid distribution " + d.to_string() + ": " + why, 0, 0);
    };
    switch (d.kind) {
      case Dist::Kind::Bernoulli:
        if (d.p < 0 || d.p > 1) bad("p outside [0,1]");
        break;
      case Dist::Kind::Binomial:
        if (d.n < 0) bad("negative trial count");
        if (d.p < 0 || d.p > 1) bad("p outside [0,1]");
        break;
      case Dist::Kind::Uniform:
        if (d.lo > d.hi) bad("empty range");
        break;
      case Dist::Kind::Hypergeom:
        if (d.N < 0 || d.K < 0 || d.n < 0) bad("negative parameter");
        if (d.K > d.N || d.n > d.N) bad("inconsistent parameters");
        break;
    }
  }

  void check_cmd(const Command& c) {
    switch (c.kind) {
      case Command::Kind::Assert:
      case Command::Kind::While:
        check_expr(*c.guard);
        break;
      case Command::Kind::CondIf:
        check_expr(*c.guard);
        break;
      case Command::Kind::Tick:
        if (c.amount < 0) throw ParseError("tick amount must be nonnegative", 0, 0);
        break;
      case Command::Kind::Assign:
        if (!globals.count(c.var))
          throw ParseError("undeclared variable '" + c.var + "'", 0, 0);
        check_expr(*c.rhs);
        break;
      case Command::Kind::Sample:
        if (!globals.count(c.var))
          throw ParseError("undeclared variable '" + c.var + "'", 0, 0);
        check_expr(*c.rhs);
        check_dist(c.dist);
        break;
      case Command::Kind::ProbIf:
        if (c.prob < 0 || c.prob > 1)
          throw ParseError("branch probability outside [0,1]", 0, 0);
        break;
      case Command::Kind::Call:
        if (!p.proc_body(c.callee))
          throw ParseError("call to unknown procedure '" + c.callee + "'", 0, 0);
        break;
      default:
        break;
    }
    if (c.c1) check_cmd(*c.c1);
    if (c.c2) check_cmd(*c.c2);
  }
};

void assign_labels(Command& c, int& next) {
  c.label = next++;
  if (c.c1) assign_labels(*c.c1, next);
  if (c.c2) assign_labels(*c.c2, next);
}

}  // namespace

Program parse_program(const std::string& source) {
  Parser parser(source);
  Program p = parser.parse();
  Validator{p}.run();
  int next = 0;
  for (auto& [name, body] : p.procs) assign_labels(*body, next);
  assign_labels(*p.main_body, next);
  p.num_labels = next;
  return p;
}

// ---- printer -----------------------------------------------------------

namespace {

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Gt:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Ge:
      return 3;
    case BinOp::Add:
    case BinOp::Sub:
      return 4;
    default:
      return 5;
  }
}

void print_expr_rec(const Expr& e, int parent_prec, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Var:
      out += e.var;
      return;
    case Expr::Kind::Num:
      out += std::to_string(e.num);
      return;
    case Expr::Kind::Bin: {
      int prec = precedence(e.op);
      bool paren = prec < parent_prec;
      if (paren) out += "(";
      print_expr_rec(*e.lhs, prec, out);
      out += " ";
      out += binop_text(e.op);
      out += " ";
      print_expr_rec(*e.rhs, prec + 1, out);
      if (paren) out += ")";
      return;
    }
  }
}

void indent_to(std::string& out, int n) { out.append(n * 2, ' '); }

void print_cmd_rec(const Command& c, int indent, std::string& out);

void print_braced(const Command& c, int indent, std::string& out) {
  out += "{\n";
  print_cmd_rec(c, indent + 1, out);
  indent_to(out, indent);
  out += "}";
}

void print_cmd_rec(const Command& c, int indent, std::string& out) {
  switch (c.kind) {
    case Command::Kind::Seq:
      print_cmd_rec(*c.c1, indent, out);
      print_cmd_rec(*c.c2, indent, out);
      return;
    case Command::Kind::Skip:
      indent_to(out, indent);
      out += "skip;\n";
      return;
    case Command::Kind::Abort:
      indent_to(out, indent);
      out += "abort;\n";
      return;
    case Command::Kind::Assert:
      indent_to(out, indent);
      out += "assert(" + print_expr(*c.guard) + ");\n";
      return;
    case Command::Kind::Tick:
      indent_to(out, indent);
      out += "tick(" + rat_to_string(c.amount) + ");\n";
      return;
    case Command::Kind::Assign:
      indent_to(out, indent);
      out += c.var + " = " + print_expr(*c.rhs) + ";\n";
      return;
    case Command::Kind::Sample: {
      indent_to(out, indent);
      bool zero_base = c.rhs->kind == Expr::Kind::Num && c.rhs->num == 0 && c.sample_add;
      out += c.var + " = ";
      if (!zero_base)
        out += print_expr(*c.rhs) + (c.sample_add ? " + " : " - ");
      out += c.dist.to_string() + ";\n";
      return;
    }
    case Command::Kind::ProbIf:
      indent_to(out, indent);
      print_braced(*c.c1, indent, out);
      out += " [" + rat_to_string(c.prob) + "] ";
      print_braced(*c.c2, indent, out);
      out += "\n";
      return;
    case Command::Kind::NonDetIf:
      indent_to(out, indent);
      out += "if (*) ";
      print_braced(*c.c1, indent, out);
      out += " else ";
      print_braced(*c.c2, indent, out);
      out += "\n";
      return;
    case Command::Kind::CondIf:
      indent_to(out, indent);
      out += "if (" + print_expr(*c.guard) + ") ";
      print_braced(*c.c1, indent, out);
      if (!(c.c2->kind == Command::Kind::Skip)) {
        out += " else ";
        print_braced(*c.c2, indent, out);
      }
      out += "\n";
      return;
    case Command::Kind::While:
      indent_to(out, indent);
      out += "while (" + print_expr(*c.guard) + ") ";
      print_braced(*c.c1, indent, out);
      out += "\n";
      return;
    case Command::Kind::Call:
      indent_to(out, indent);
      out += "call " + c.callee + ";\n";
      return;
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print_expr_rec(e, 0, out);
  return out;
}

std::string print_command(const Command& c, int indent) {
  std::string out;
  print_cmd_rec(c, indent, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (auto& g : p.globals) out += "var " + g + ";\n";
  for (auto& [name, body] : p.procs) {
    out += "proc " + name + " {\n";
    print_cmd_rec(*body, 1, out);
    out += "}\n";
  }
  out += "main {\n";
  print_cmd_rec(*p.main_body, 1, out);
  out += "}\n";
  return out;
}

}  // namespace pbound
