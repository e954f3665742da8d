#pragma once

// Test-side oracles and generators. Nothing here calls into the code under
// test for the answer it is checking: equality, union and matching are
// recomputed the slow way.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynca/asmlang.hpp"
#include "dynca/hfset.hpp"
#include "dynca/pattern.hpp"
#include "dynca/state.hpp"
#include "dynca/tangle.hpp"

namespace testing {

using dynca::hf::Value;

inline std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return n == 0 ? 0 : static_cast<std::size_t>(rng() % n);
}

// ----- values ---------------------------------------------------------------

/// Structural equality from the definition: sets are equal when each member
/// of one has an equal member in the other.
inline bool same(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  if (a.is_atom()) return a.atom_name() == b.atom_name();
  if (a.is_pair()) return same(a.first(), b.first()) && same(a.second(), b.second());
  auto covered = [](const Value& x, const Value& y) {
    for (const auto& m : x.members()) {
      bool hit = false;
      for (const auto& n : y.members()) hit = hit || same(m, n);
      if (!hit) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

/// Union by concatenation and pairwise dedup.
inline std::vector<Value> naive_union(const Value& s, const Value& t) {
  std::vector<Value> out;
  for (const auto* side : {&s, &t}) {
    for (const auto& m : side->members()) {
      bool dup = false;
      for (const auto& o : out) dup = dup || same(m, o);
      if (!dup) out.push_back(m);
    }
  }
  return out;
}

inline bool naive_member(const Value& v, const Value& s) {
  for (const auto& m : s.members()) {
    if (same(v, m)) return true;
  }
  return false;
}

/// Distinct values reachable from `roots` (the roots included).
inline std::size_t distinct_subvalues(const std::vector<Value>& roots) {
  std::vector<Value> seen;
  std::function<void(const Value&)> walk = [&](const Value& v) {
    for (const auto& s : seen) {
      if (same(s, v)) return;
    }
    seen.push_back(v);
    if (v.is_set()) {
      for (const auto& m : v.members()) walk(m);
    } else if (v.is_pair()) {
      walk(v.first());
      walk(v.second());
    }
  };
  for (const auto& r : roots) walk(r);
  return seen.size();
}

inline Value random_value(std::mt19937_64& rng, const std::vector<std::string>& atoms, int depth) {
  if (depth == 0 || below(rng, 6) == 0) {
    if (below(rng, 3) == 0) return Value::set({});
    return Value::atom(atoms[below(rng, atoms.size())]);
  }
  if (below(rng, 5) == 0) {
    return Value::pair(random_value(rng, atoms, depth - 1), random_value(rng, atoms, depth - 1));
  }
  std::vector<Value> ms;
  std::size_t n = below(rng, 4);
  for (std::size_t i = 0; i < n; ++i) ms.push_back(random_value(rng, atoms, depth - 1));
  return Value::set(ms);
}

inline Value random_set(std::mt19937_64& rng, const std::vector<std::string>& atoms, int depth) {
  std::vector<Value> ms;
  std::size_t n = below(rng, 4);
  for (std::size_t i = 0; i < n; ++i) ms.push_back(random_value(rng, atoms, depth - 1));
  return Value::set(ms);
}

inline dynca::State random_state(std::mt19937_64& rng, const std::vector<std::string>& atoms) {
  dynca::State s;
  std::size_t terms = 1 + below(rng, 4);
  for (std::size_t i = 0; i < terms; ++i) {
    s.terms["t" + std::to_string(i)] = random_value(rng, atoms, 3);
  }
  std::size_t locs = below(rng, 3);
  for (std::size_t i = 0; i < locs; ++i) {
    std::vector<Value> args;
    std::size_t arity = 1 + below(rng, 2);
    for (std::size_t k = 0; k < arity; ++k) args.push_back(random_value(rng, atoms, 2));
    s.locations[{"f" + std::to_string(arity), args}] = random_set(rng, atoms, 2);
  }
  return s.normalized();
}

// ----- programs -------------------------------------------------------------

/// Random well-scoped AST of statement depth at most `depth`. The result
/// need not be a sensible program, only one that parses and validates.
class AstGen {
 public:
  explicit AstGen(std::mt19937_64& rng) : rng_(rng) {}

  dynca::asml::Program program(int depth) {
    using namespace dynca::asml;
    Program p;
    p.atoms = {"a", "b"};
    p.criticals = {"t", "p", "q"};
    p.functions = {{"f", 1}, {"g", 2}};
    p.body = stmt(depth);
    return p;
  }

 private:
  using TermPtr = dynca::asml::TermPtr;
  using CondPtr = dynca::asml::CondPtr;
  using StmtPtr = dynca::asml::StmtPtr;

  std::string name() {
    std::vector<std::string> names{"t", "p", "q"};
    names.insert(names.end(), vars_.begin(), vars_.end());
    return names[below(rng_, names.size())];
  }

  TermPtr term(int depth) {
    using namespace dynca::asml;
    switch (depth <= 0 ? below(rng_, 2) : below(rng_, 7)) {
      case 0: return name_term(name());
      case 1: return empty_term();
      case 2: return singleton_term(term(depth - 1));
      case 3: return union_term(term(depth - 1), term(depth - 1));
      case 4: return pair_term(term(depth - 1), term(depth - 1));
      case 5: return apply_term("f", {term(depth - 1)});
      default: return apply_term("g", {term(depth - 1), term(depth - 1)});
    }
  }

  CondPtr cond(int depth) {
    using namespace dynca::asml;
    switch (depth <= 0 ? below(rng_, 3) : below(rng_, 6)) {
      case 0: return compare(CondKind::member, term(1), term(1));
      case 1: return compare(CondKind::eq, term(1), term(1));
      case 2: return compare(CondKind::neq, term(1), term(1));
      case 3: return negate(cond(depth - 1));
      case 4: return conj(cond(depth - 1), cond(depth - 1));
      default: return disj(cond(depth - 1), cond(depth - 1));
    }
  }

  StmtPtr stmt(int depth) {
    using namespace dynca::asml;
    switch (depth <= 0 ? below(rng_, 2) : below(rng_, 7)) {
      case 0: {
        std::vector<std::string> targets{"t", "p", "q"};
        std::string target = targets[below(rng_, 3)];
        if (used_.count(target)) return skip();
        used_.insert(target);
        return assign(name_term(target), term(2));
      }
      case 1: {
        if (below(rng_, 2)) return skip();
        return assign(apply_term("f", {term(1)}), term(1));
      }
      case 2: return if_then(cond(1), stmt(depth - 1), below(rng_, 2) ? stmt(depth - 1) : nullptr);
      case 3:
      case 4: {
        std::string v = "x" + std::to_string(fresh_++);
        TermPtr t = term(2);
        vars_.push_back(v);
        StmtPtr body = stmt(depth - 1);
        vars_.pop_back();
        return below(rng_, 2) ? let(v, t, body) : let_choose(v, t, body);
      }
      default: {
        std::vector<StmtPtr> branches;
        std::size_t n = 1 + below(rng_, 3);
        for (std::size_t i = 0; i < n; ++i) branches.push_back(stmt(depth - 1));
        return par(branches);
      }
    }
  }

  std::mt19937_64& rng_;
  std::vector<std::string> vars_;
  std::set<std::string> used_;
  int fresh_ = 0;
};

// ----- tangles and matching ---------------------------------------------------

struct RandomMatchCase {
  dynca::Tangle tangle;
  dynca::RuleSet rules;
};

/// Up to 12 nodes over a tiny palette plus 1 to 3 rules of up to 4 cells.
/// Node 0 is the active criticals node.
inline RandomMatchCase random_match_case(std::mt19937_64& rng) {
  using dynca::Symbol;
  static const std::vector<std::string> colors{"set", "atom", "pair"};
  static const std::vector<std::string> labels{"in", "p1", "t"};
  RandomMatchCase c;
  std::size_t n = 2 + below(rng, 11);
  c.tangle.add_node(Symbol("crit"));
  for (std::size_t i = 1; i < n; ++i) c.tangle.add_node(Symbol(colors[below(rng, colors.size())]));
  std::size_t edges = below(rng, 3 * n);
  for (std::size_t i = 0; i < edges; ++i) {
    auto a = static_cast<dynca::NodeId>(below(rng, n));
    auto b = static_cast<dynca::NodeId>(below(rng, n));
    if (a != b) c.tangle.add_edge(a, Symbol(labels[below(rng, labels.size())]), b);
  }
  c.rules.palette = {"crit", "set", "atom", "pair"};
  c.rules.labels = {labels.begin(), labels.end()};
  c.rules.negative_edges = true;
  c.rules.radius_bound = 4;
  std::size_t nrules = 1 + below(rng, 3);
  for (std::size_t r = 0; r < nrules; ++r) {
    dynca::Rule rule;
    rule.name = "r" + std::to_string(r);
    rule.pattern.focus = "C";
    rule.pattern.cells.push_back({"C", Symbol("crit")});
    std::size_t cells = below(rng, 4);
    for (std::size_t i = 0; i < cells; ++i) {
      std::string name = "X" + std::to_string(i);
      std::optional<Symbol> color;
      if (below(rng, 3)) color = Symbol(colors[below(rng, colors.size())]);
      // Tree edge to an earlier cell keeps the pattern connected.
      std::string other = rule.pattern.cells[below(rng, rule.pattern.cells.size())].name;
      Symbol label(labels[below(rng, labels.size())]);
      rule.pattern.cells.push_back({name, color});
      if (below(rng, 2)) {
        rule.pattern.edges.push_back({other, label, name});
      } else {
        rule.pattern.edges.push_back({name, label, other});
      }
    }
    if (cells >= 2 && below(rng, 2)) {
      rule.pattern.edges.push_back({"X0", Symbol(labels[below(rng, labels.size())]), "X1"});
    }
    if (cells >= 1 && below(rng, 3) == 0) {
      rule.negative_edges.push_back({"C", Symbol(labels[below(rng, labels.size())]), "X0"});
    }
    rule.pattern.radius = 4;
    rule.rewrite = dynca::identity_rewrite(rule.pattern);
    c.rules.rules.push_back(rule);
  }
  return c;
}

/// Every injective binding of the rule's cells into `g` with the focus on
/// the active node, by exhaustive enumeration.
inline std::set<std::vector<dynca::NodeId>> brute_force_bindings(const dynca::Tangle& g,
                                                                 const dynca::Rule& r) {
  std::set<std::vector<dynca::NodeId>> out;
  const auto& cells = r.pattern.cells;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cells.size(); ++i) index[cells[i].name] = i;
  std::vector<dynca::NodeId> b(cells.size());
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == cells.size()) {
      if (b[index.at(r.pattern.focus)] != g.active()) return;
      for (const auto& e : r.pattern.edges) {
        if (!g.has_edge(b[index.at(e.src)], e.label, b[index.at(e.dst)])) return;
      }
      for (const auto& e : r.negative_edges) {
        if (g.has_edge(b[index.at(e.src)], e.label, b[index.at(e.dst)])) return;
      }
      out.insert(b);
      return;
    }
    for (dynca::NodeId v = 0; v < g.node_count(); ++v) {
      if (std::find(b.begin(), b.begin() + k, v) != b.begin() + k) continue;
      if (cells[k].color && g.node(v).color != *cells[k].color) continue;
      b[k] = v;
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

/// Maximality by definition: a match survives unless some other match's
/// node set strictly contains its own.
inline std::vector<std::size_t> naive_maximal(const std::vector<std::set<dynca::NodeId>>& cellsets) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cellsets.size(); ++i) {
    bool blocked = false;
    for (std::size_t j = 0; j < cellsets.size(); ++j) {
      const auto& a = cellsets[i];
      const auto& b = cellsets[j];
      if (b.size() > a.size() && std::includes(b.begin(), b.end(), a.begin(), a.end())) blocked = true;
    }
    if (!blocked) out.push_back(i);
  }
  return out;
}

}  // namespace testing
