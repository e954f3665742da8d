#pragma once

// ASM-lite: guarded parallel assignments over hereditarily finite values.
//
//   atoms: a, b;
//   functions: f/2;
//   critical: t, p;
//   do if t != p then t := f(t, p)
//
// Terms: names, {}, {t}, {t1, t2, ...}, t U t', <t, t'>, f(t1, ..., tk).
// Conditions: t in t', t = t', t != t', not, and, or, parentheses.
// Statements: lhs := t, skip, if c then s [else s], let x = t in s,
// let x = choose(t) in s, par { s; s; ... }, ( s ).

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynca/error.hpp"

namespace dynca::asml {

enum class TermKind { name, empty, singleton, union_, pair, apply };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind = TermKind::empty;
  /// Variable or critical term for `name`, function symbol for `apply`.
  std::string name;
  std::vector<TermPtr> args;
  int line = 0;
  int column = 0;
};

TermPtr name_term(std::string name);
TermPtr empty_term();
TermPtr singleton_term(TermPtr t);
TermPtr union_term(TermPtr a, TermPtr b);
TermPtr pair_term(TermPtr a, TermPtr b);
TermPtr apply_term(std::string f, std::vector<TermPtr> args);

enum class CondKind { member, eq, neq, not_, and_, or_ };

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct Cond {
  CondKind kind = CondKind::eq;
  TermPtr lhs, rhs;              // comparisons
  std::vector<CondPtr> args;     // connectives: one for not, two for and/or
};

CondPtr compare(CondKind kind, TermPtr lhs, TermPtr rhs);
CondPtr negate(CondPtr c);
CondPtr conj(CondPtr a, CondPtr b);
CondPtr disj(CondPtr a, CondPtr b);

enum class StmtKind { assign, if_, let, let_choose, par, skip };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::skip;
  /// assign: target, a name or an application of a function symbol.
  TermPtr lhs;
  /// assign: value; let/let_choose: bound term (the set for choose).
  TermPtr term;
  /// let/let_choose: variable.
  std::string var;
  CondPtr cond;
  /// if: then and optional else; let: body; par: branches.
  std::vector<StmtPtr> body;
  int line = 0;
  int column = 0;
};

StmtPtr assign(TermPtr lhs, TermPtr value);
StmtPtr if_then(CondPtr c, StmtPtr then, StmtPtr otherwise = nullptr);
StmtPtr let(std::string var, TermPtr t, StmtPtr body);
StmtPtr let_choose(std::string var, TermPtr set, StmtPtr body);
StmtPtr par(std::vector<StmtPtr> branches);
StmtPtr skip();

struct Program {
  std::vector<std::string> atoms;
  std::vector<std::pair<std::string, int>> functions;
  std::vector<std::string> criticals;
  StmtPtr body;

  bool is_critical(std::string_view name) const;
  /// Arity of a declared function, -1 when undeclared.
  int arity(std::string_view name) const;
};

/// Structural equality; source positions are ignored.
bool equal(const Term& a, const Term& b);
bool equal(const Cond& a, const Cond& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const Program& a, const Program& b);

/// Throws ParseError on syntax errors, undeclared names and arity
/// mismatches.
Program parse(std::string_view source);

/// Declaration consistency and conflict-free parallel blocks. Empty means
/// valid.
std::vector<std::string> validate(const Program& p);

std::string to_string(const Term& t);
std::string to_string(const Cond& c);
std::string to_string(const Stmt& s);
std::string pretty_print(const Program& p);

/// True when the body contains a choose.
bool uses_choice(const Program& p);

}  // namespace dynca::asml
