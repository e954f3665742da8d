#include "dynca/asmlang.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace dynca::asml {

// ---------------------------------------------------------------------------
// Constructors

namespace {

TermPtr make_term(TermKind kind, std::string name, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = kind;
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

}  // namespace

TermPtr name_term(std::string name) { return make_term(TermKind::name, std::move(name), {}); }
TermPtr empty_term() { return make_term(TermKind::empty, {}, {}); }
TermPtr singleton_term(TermPtr t) { return make_term(TermKind::singleton, {}, {std::move(t)}); }
TermPtr union_term(TermPtr a, TermPtr b) {
  return make_term(TermKind::union_, {}, {std::move(a), std::move(b)});
}
TermPtr pair_term(TermPtr a, TermPtr b) {
  return make_term(TermKind::pair, {}, {std::move(a), std::move(b)});
}
TermPtr apply_term(std::string f, std::vector<TermPtr> args) {
  return make_term(TermKind::apply, std::move(f), std::move(args));
}

CondPtr compare(CondKind kind, TermPtr lhs, TermPtr rhs) {
  auto c = std::make_shared<Cond>();
  c->kind = kind;
  c->lhs = std::move(lhs);
  c->rhs = std::move(rhs);
  return c;
}

CondPtr negate(CondPtr a) {
  auto c = std::make_shared<Cond>();
  c->kind = CondKind::not_;
  c->args = {std::move(a)};
  return c;
}

CondPtr conj(CondPtr a, CondPtr b) {
  auto c = std::make_shared<Cond>();
  c->kind = CondKind::and_;
  c->args = {std::move(a), std::move(b)};
  return c;
}

CondPtr disj(CondPtr a, CondPtr b) {
  auto c = std::make_shared<Cond>();
  c->kind = CondKind::or_;
  c->args = {std::move(a), std::move(b)};
  return c;
}

namespace {

std::shared_ptr<Stmt> make_stmt(StmtKind kind) {
  auto s = std::make_shared<Stmt>();
  s->kind = kind;
  return s;
}

}  // namespace

StmtPtr assign(TermPtr lhs, TermPtr value) {
  auto s = make_stmt(StmtKind::assign);
  s->lhs = std::move(lhs);
  s->term = std::move(value);
  return s;
}

StmtPtr if_then(CondPtr c, StmtPtr then, StmtPtr otherwise) {
  auto s = make_stmt(StmtKind::if_);
  s->cond = std::move(c);
  s->body.push_back(std::move(then));
  if (otherwise) s->body.push_back(std::move(otherwise));
  return s;
}

StmtPtr let(std::string var, TermPtr t, StmtPtr body) {
  auto s = make_stmt(StmtKind::let);
  s->var = std::move(var);
  s->term = std::move(t);
  s->body.push_back(std::move(body));
  return s;
}

StmtPtr let_choose(std::string var, TermPtr set, StmtPtr body) {
  auto s = make_stmt(StmtKind::let_choose);
  s->var = std::move(var);
  s->term = std::move(set);
  s->body.push_back(std::move(body));
  return s;
}

StmtPtr par(std::vector<StmtPtr> branches) {
  auto s = make_stmt(StmtKind::par);
  s->body = std::move(branches);
  return s;
}

StmtPtr skip() { return make_stmt(StmtKind::skip); }

bool Program::is_critical(std::string_view name) const {
  return std::find(criticals.begin(), criticals.end(), name) != criticals.end();
}

int Program::arity(std::string_view name) const {
  for (const auto& [f, k] : functions) {
    if (f == name) return k;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Structural equality

namespace {

template <class T>
bool equal_ptr(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

template <class T>
bool equal_all(const std::vector<std::shared_ptr<const T>>& a,
               const std::vector<std::shared_ptr<const T>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_ptr(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool equal(const Term& a, const Term& b) {
  return a.kind == b.kind && a.name == b.name && equal_all(a.args, b.args);
}

bool equal(const Cond& a, const Cond& b) {
  return a.kind == b.kind && equal_ptr(a.lhs, b.lhs) && equal_ptr(a.rhs, b.rhs) &&
         equal_all(a.args, b.args);
}

bool equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && equal_ptr(a.lhs, b.lhs) && equal_ptr(a.term, b.term) &&
         a.var == b.var && equal_ptr(a.cond, b.cond) && equal_all(a.body, b.body);
}

bool equal(const Program& a, const Program& b) {
  return a.atoms == b.atoms && a.functions == b.functions && a.criticals == b.criticals &&
         equal_ptr(a.body, b.body);
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { ident, number, punct, keyword, end };

struct Token {
  Tok type;
  std::string text;
  int line;
  int column;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"if",  "then", "else", "let",   "in",        "par",
                                       "choose", "skip", "not", "and", "or",        "U",
                                       "do",  "atoms", "functions", "critical"};
  return k;
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({keywords().count(word) ? Tok::keyword : Tok::ident, word, l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::number, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    std::string two(src.substr(i, 2));
    if (two == ":=" || two == "!=") {
      out.push_back({Tok::punct, two, l, cl});
      advance(2);
      continue;
    }
    if (std::string_view("{}()<>,;=/:").find(c) != std::string_view::npos) {
      out.push_back({Tok::punct, std::string(1, c), l, cl});
      advance(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::end, "", line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Program program() {
    while (true) {
      if (accept_kw("atoms")) {
        expect(":");
        prog_.atoms = ident_list();
      } else if (accept_kw("critical")) {
        expect(":");
        prog_.criticals = ident_list();
      } else if (accept_kw("functions")) {
        expect(":");
        if (!at(";")) {
          do {
            std::string f = ident("function name");
            expect("/");
            const Token& n = peek();
            if (n.type != Tok::number) fail("an arity");
            ++pos_;
            prog_.functions.emplace_back(f, std::stoi(n.text));
          } while (accept(","));
        }
        expect(";");
      } else {
        break;
      }
    }
    expect_kw("do");
    prog_.body = stmt();
    if (peek().type != Tok::end) fail("end of input");
    return std::move(prog_);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(const char* p) const { return peek().type == Tok::punct && peek().text == p; }
  bool at_kw(const char* k) const { return peek().type == Tok::keyword && peek().text == k; }
  bool accept(const char* p) {
    if (!at(p)) return false;
    ++pos_;
    return true;
  }
  bool accept_kw(const char* k) {
    if (!at_kw(k)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.type == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ParseError("expected " + expected + ", found " + found, t.line, t.column);
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
    throw ParseError(msg, t.line, t.column);
  }
  void expect(const char* p) {
    if (!accept(p)) fail(std::string("'") + p + "'");
  }
  void expect_kw(const char* k) {
    if (!accept_kw(k)) fail(std::string("'") + k + "'");
  }
  std::string ident(const char* what) {
    if (peek().type != Tok::ident) fail(what);
    return toks_[pos_++].text;
  }
  std::vector<std::string> ident_list() {
    std::vector<std::string> out;
    if (!at(";")) {
      do {
        out.push_back(ident("a name"));
      } while (accept(","));
    }
    expect(";");
    return out;
  }

  bool is_var(const std::string& name) const {
    return std::find(scope_.begin(), scope_.end(), name) != scope_.end();
  }
  bool is_atom(const std::string& name) const {
    return std::find(prog_.atoms.begin(), prog_.atoms.end(), name) != prog_.atoms.end();
  }

  template <class Node>
  static std::shared_ptr<Node> at_pos(std::shared_ptr<Node> n, const Token& t) {
    n->line = t.line;
    n->column = t.column;
    return n;
  }

  TermPtr positioned(TermPtr t, const Token& tok) {
    auto copy = std::make_shared<Term>(*t);
    return at_pos(copy, tok);
  }

  std::vector<TermPtr> args_of(const std::string& f, const Token& tok) {
    std::vector<TermPtr> args;
    expect("(");
    if (!at(")")) {
      do {
        args.push_back(term());
      } while (accept(","));
    }
    expect(")");
    int k = prog_.arity(f);
    if (k < 0) fail_at(tok, "undeclared function '" + f + "'");
    if (static_cast<int>(args.size()) != k) {
      fail_at(tok, "function '" + f + "' takes " + std::to_string(k) + " arguments, got " +
                       std::to_string(args.size()));
    }
    return args;
  }

  TermPtr primary() {
    const Token& tok = peek();
    if (accept("{")) {
      if (accept("}")) return positioned(empty_term(), tok);
      TermPtr t = singleton_term(term());
      while (accept(",")) t = union_term(t, singleton_term(term()));
      expect("}");
      return positioned(t, tok);
    }
    if (accept("<")) {
      TermPtr a = term();
      expect(",");
      TermPtr b = term();
      expect(">");
      return positioned(pair_term(a, b), tok);
    }
    if (accept("(")) {
      TermPtr t = term();
      expect(")");
      return t;
    }
    if (tok.type != Tok::ident) fail("a term");
    std::string name = toks_[pos_++].text;
    if (at("(")) return positioned(apply_term(name, args_of(name, tok)), tok);
    if (is_var(name) || prog_.is_critical(name)) return positioned(name_term(name), tok);
    if (prog_.arity(name) >= 0) fail_at(tok, "function '" + name + "' used without arguments");
    if (is_atom(name)) fail_at(tok, "atom literal '" + name + "' is not a term");
    fail_at(tok, "undeclared name '" + name + "'");
  }

  TermPtr term() {
    TermPtr t = primary();
    while (at_kw("U")) {
      const Token& tok = peek();
      ++pos_;
      t = positioned(union_term(t, primary()), tok);
    }
    return t;
  }

  CondPtr comparison() {
    TermPtr a = term();
    CondKind kind;
    if (accept_kw("in")) kind = CondKind::member;
    else if (accept("=")) kind = CondKind::eq;
    else if (accept("!=")) kind = CondKind::neq;
    else fail("'in', '=' or '!='");
    return compare(kind, a, term());
  }

  CondPtr cond_atom() {
    if (accept_kw("not")) return negate(cond_atom());
    if (at("(")) {
      std::size_t save = pos_;
      ++pos_;
      try {
        CondPtr c = cond();
        if (accept(")")) return c;
      } catch (const ParseError&) {
      }
      pos_ = save;
    }
    return comparison();
  }

  CondPtr cond_and() {
    CondPtr c = cond_atom();
    while (accept_kw("and")) c = conj(c, cond_atom());
    return c;
  }

  CondPtr cond() {
    CondPtr c = cond_and();
    while (accept_kw("or")) c = disj(c, cond_and());
    return c;
  }

  void bind_check(const std::string& var, const Token& tok) {
    if (prog_.is_critical(var) || prog_.arity(var) >= 0 || is_atom(var)) {
      fail_at(tok, "let variable '" + var + "' shadows a declaration");
    }
  }

  StmtPtr stmt() {
    const Token& tok = peek();
    if (accept_kw("if")) {
      CondPtr c = cond();
      expect_kw("then");
      StmtPtr then = stmt();
      StmtPtr otherwise = accept_kw("else") ? stmt() : nullptr;
      return positioned_stmt(if_then(c, then, otherwise), tok);
    }
    if (accept_kw("let")) {
      const Token& vtok = peek();
      std::string var = ident("a variable name");
      bind_check(var, vtok);
      expect("=");
      bool choose = accept_kw("choose");
      TermPtr t;
      if (choose) {
        expect("(");
        t = term();
        expect(")");
      } else {
        t = term();
      }
      expect_kw("in");
      scope_.push_back(var);
      StmtPtr body = stmt();
      scope_.pop_back();
      return positioned_stmt(choose ? let_choose(var, t, body) : let(var, t, body), tok);
    }
    if (accept_kw("par")) {
      expect("{");
      std::vector<StmtPtr> branches;
      while (!at("}")) {
        branches.push_back(stmt());
        if (!accept(";")) break;
      }
      expect("}");
      return positioned_stmt(par(branches), tok);
    }
    if (accept_kw("skip")) return positioned_stmt(skip(), tok);
    if (accept("(")) {
      StmtPtr s = stmt();
      expect(")");
      return s;
    }
    if (tok.type != Tok::ident) fail("a statement");
    std::string name = toks_[pos_++].text;
    TermPtr lhs;
    if (at("(")) {
      lhs = positioned(apply_term(name, args_of(name, tok)), tok);
    } else if (prog_.is_critical(name)) {
      lhs = positioned(name_term(name), tok);
    } else if (is_var(name)) {
      fail_at(tok, "cannot assign let variable '" + name + "'");
    } else {
      fail_at(tok, "undeclared name '" + name + "'");
    }
    expect(":=");
    return positioned_stmt(assign(lhs, term()), tok);
  }

  StmtPtr positioned_stmt(StmtPtr s, const Token& tok) {
    auto copy = std::make_shared<Stmt>(*s);
    return at_pos(copy, tok);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program prog_;
  std::vector<std::string> scope_;
};

}  // namespace

Program parse(std::string_view source) { return Parser(source).program(); }

// ---------------------------------------------------------------------------
// Validation

namespace {

void assigned_criticals(const Stmt& s, std::set<std::string>& out) {
  if (s.kind == StmtKind::assign && s.lhs->kind == TermKind::name) out.insert(s.lhs->name);
  for (const auto& b : s.body) assigned_criticals(*b, out);
}

void check_par(const Stmt& s, std::vector<std::string>& out) {
  if (s.kind == StmtKind::par) {
    std::vector<std::set<std::string>> sets;
    for (const auto& b : s.body) {
      sets.emplace_back();
      assigned_criticals(*b, sets.back());
    }
    std::set<std::string> reported;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        for (const auto& name : sets[i]) {
          if (sets[j].count(name) && reported.insert(name).second) {
            out.push_back("conflicting parallel assignment to " + name);
          }
        }
      }
    }
  }
  for (const auto& b : s.body) check_par(*b, out);
}

void check_scope(const Term& t, const Program& p, std::vector<std::string>& scope,
                 std::vector<std::string>& out) {
  if (t.kind == TermKind::name && !p.is_critical(t.name) &&
      std::find(scope.begin(), scope.end(), t.name) == scope.end()) {
    out.push_back("undeclared name " + t.name);
  }
  if (t.kind == TermKind::apply && p.arity(t.name) != static_cast<int>(t.args.size())) {
    out.push_back("arity mismatch for " + t.name);
  }
  for (const auto& a : t.args) check_scope(*a, p, scope, out);
}

void check_scope(const Cond& c, const Program& p, std::vector<std::string>& scope,
                 std::vector<std::string>& out) {
  if (c.lhs) check_scope(*c.lhs, p, scope, out);
  if (c.rhs) check_scope(*c.rhs, p, scope, out);
  for (const auto& a : c.args) check_scope(*a, p, scope, out);
}

void check_scope(const Stmt& s, const Program& p, std::vector<std::string>& scope,
                 std::vector<std::string>& out) {
  if (s.lhs) {
    if (s.lhs->kind == TermKind::name && !p.is_critical(s.lhs->name)) {
      out.push_back("assignment to non-critical " + s.lhs->name);
    }
    for (const auto& a : s.lhs->args) check_scope(*a, p, scope, out);
    if (s.lhs->kind == TermKind::apply && p.arity(s.lhs->name) != static_cast<int>(s.lhs->args.size())) {
      out.push_back("arity mismatch for " + s.lhs->name);
    }
  }
  if (s.term) check_scope(*s.term, p, scope, out);
  if (s.cond) check_scope(*s.cond, p, scope, out);
  bool binds = s.kind == StmtKind::let || s.kind == StmtKind::let_choose;
  if (binds) {
    if (p.is_critical(s.var) || p.arity(s.var) >= 0) out.push_back("let variable " + s.var + " shadows a declaration");
    scope.push_back(s.var);
  }
  for (const auto& b : s.body) check_scope(*b, p, scope, out);
  if (binds) scope.pop_back();
}

}  // namespace

std::vector<std::string> validate(const Program& p) {
  std::vector<std::string> out;
  std::set<std::string> names;
  auto declare = [&](const std::string& n) {
    if (!names.insert(n).second) out.push_back("duplicate declaration " + n);
    if (n == "val" || n == "p1" || n == "p2") out.push_back("reserved name " + n);
  };
  for (const auto& a : p.atoms) declare(a);
  for (const auto& c : p.criticals) declare(c);
  for (const auto& [f, k] : p.functions) {
    declare(f);
    if (k < 1) out.push_back("function " + f + " must take at least one argument");
  }
  if (!p.body) {
    out.push_back("missing body");
    return out;
  }
  std::vector<std::string> scope;
  check_scope(*p.body, p, scope, out);
  check_par(*p.body, out);
  return out;
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Term& t) {
  switch (t.kind) {
    case TermKind::name: return t.name;
    case TermKind::empty: return "{}";
    case TermKind::singleton: return "{" + to_string(*t.args[0]) + "}";
    case TermKind::union_: {
      std::string rhs = to_string(*t.args[1]);
      if (t.args[1]->kind == TermKind::union_) rhs = "(" + rhs + ")";
      return to_string(*t.args[0]) + " U " + rhs;
    }
    case TermKind::pair:
      return "<" + to_string(*t.args[0]) + ", " + to_string(*t.args[1]) + ">";
    case TermKind::apply: {
      std::string s = t.name + "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(*t.args[i]);
      }
      return s + ")";
    }
  }
  return {};
}

namespace {

int precedence(const Cond& c) {
  switch (c.kind) {
    case CondKind::or_: return 1;
    case CondKind::and_: return 2;
    case CondKind::not_: return 3;
    default: return 4;
  }
}

std::string cond_text(const Cond& c, int min_prec) {
  std::string s;
  switch (c.kind) {
    case CondKind::member: s = to_string(*c.lhs) + " in " + to_string(*c.rhs); break;
    case CondKind::eq: s = to_string(*c.lhs) + " = " + to_string(*c.rhs); break;
    case CondKind::neq: s = to_string(*c.lhs) + " != " + to_string(*c.rhs); break;
    case CondKind::not_: s = "not " + cond_text(*c.args[0], 3); break;
    case CondKind::and_: s = cond_text(*c.args[0], 2) + " and " + cond_text(*c.args[1], 3); break;
    case CondKind::or_: s = cond_text(*c.args[0], 1) + " or " + cond_text(*c.args[1], 2); break;
  }
  return precedence(c) < min_prec ? "(" + s + ")" : s;
}

void print_stmt(const Stmt& s, int indent, std::ostringstream& out) {
  std::string pad(indent, ' ');
  auto nested = [&](const Stmt& child, bool wrap) {
    if (wrap) {
      out << pad << "  (\n";
      print_stmt(child, indent + 4, out);
      out << "\n" << pad << "  )";
    } else {
      print_stmt(child, indent + 2, out);
    }
  };
  switch (s.kind) {
    case StmtKind::assign:
      out << pad << to_string(*s.lhs) << " := " << to_string(*s.term);
      break;
    case StmtKind::skip:
      out << pad << "skip";
      break;
    case StmtKind::if_: {
      out << pad << "if " << cond_text(*s.cond, 0) << " then\n";
      bool has_else = s.body.size() > 1;
      const Stmt& then = *s.body[0];
      nested(then, has_else && (then.kind == StmtKind::if_ || then.kind == StmtKind::let ||
                                then.kind == StmtKind::let_choose));
      if (has_else) {
        out << "\n" << pad << "else\n";
        nested(*s.body[1], false);
      }
      break;
    }
    case StmtKind::let:
    case StmtKind::let_choose:
      out << pad << "let " << s.var << " = ";
      if (s.kind == StmtKind::let_choose) out << "choose(" << to_string(*s.term) << ")";
      else out << to_string(*s.term);
      out << " in\n";
      nested(*s.body[0], false);
      break;
    case StmtKind::par:
      out << pad << "par {";
      for (std::size_t i = 0; i < s.body.size(); ++i) {
        out << (i ? ";\n" : "\n");
        print_stmt(*s.body[i], indent + 2, out);
      }
      out << "\n" << pad << "}";
      break;
  }
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
  return s;
}

bool has_choice(const Stmt& s) {
  if (s.kind == StmtKind::let_choose) return true;
  return std::any_of(s.body.begin(), s.body.end(), [](const StmtPtr& b) { return has_choice(*b); });
}

}  // namespace

std::string to_string(const Cond& c) { return cond_text(c, 0); }

std::string to_string(const Stmt& s) {
  std::ostringstream out;
  print_stmt(s, 0, out);
  return out.str();
}

std::string pretty_print(const Program& p) {
  std::ostringstream out;
  out << "atoms: " << join(p.atoms) << ";\n";
  std::vector<std::string> fs;
  for (const auto& [f, k] : p.functions) fs.push_back(f + "/" + std::to_string(k));
  out << "functions: " << join(fs) << ";\n";
  out << "critical: " << join(p.criticals) << ";\n";
  out << "do\n";
  if (p.body) print_stmt(*p.body, 2, out);
  out << "\n";
  return out.str();
}

bool uses_choice(const Program& p) { return p.body && has_choice(*p.body); }

}  // namespace dynca::asml
