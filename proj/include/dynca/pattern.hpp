#pragma once

// Transition rules: neighborhood patterns anchored at the active cell,
// rewrites, matching, and the maximality precedence filter.

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynca/error.hpp"
#include "dynca/symbol.hpp"
#include "dynca/tangle.hpp"

namespace dynca {

struct PatternCell {
  std::string name;
  /// nullopt matches a node of any color.
  std::optional<Symbol> color;

  friend bool operator==(const PatternCell&, const PatternCell&) = default;
};

struct PatternEdge {
  std::string src;
  Symbol label;
  std::string dst;

  friend bool operator==(const PatternEdge&, const PatternEdge&) = default;
};

struct Pattern {
  std::vector<PatternCell> cells;
  std::vector<PatternEdge> edges;
  std::string focus;
  int radius = 1;

  const PatternCell* cell(const std::string& name) const;
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct CreatedCell {
  std::string name;
  Symbol color;

  friend bool operator==(const CreatedCell&, const CreatedCell&) = default;
};

struct Recoloring {
  std::string cell;
  Symbol color;

  friend bool operator==(const Recoloring&, const Recoloring&) = default;
};

/// Right-hand side of a rule. Edge and recolor operations name right-side
/// cells: either a fresh cell from `creations` or a cell carried over from
/// the pattern through `correspondence` (right name, left name).
struct Rewrite {
  std::vector<std::pair<std::string, std::string>> correspondence;
  std::vector<CreatedCell> creations;
  std::vector<Recoloring> recolorings;
  std::vector<PatternEdge> removals;
  std::vector<PatternEdge> additions;
  /// Never legal; kept so hand-written rule files that try it are rejected
  /// by validation rather than misparsed.
  std::vector<std::string> deletions;

  friend bool operator==(const Rewrite&, const Rewrite&) = default;
};

struct Rule {
  std::string name;
  Pattern pattern;
  Rewrite rewrite;
  /// Edges that must be absent under the binding (engine extension).
  std::vector<PatternEdge> negative_edges;

  /// Name prefix up to the first ':'.
  std::string phase() const;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Rewrite whose correspondence is the identity on the pattern's cells.
Rewrite identity_rewrite(const Pattern& p);

struct RuleSet {
  std::set<std::string> palette;
  std::set<std::string> labels;
  std::vector<Rule> rules;
  int radius_bound = 1;
  bool negative_edges = false;
  /// Criticals colors during which only structural invariants hold.
  std::set<std::string> lock_colors;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

struct Match {
  std::size_t rule = 0;
  /// Node bound to each pattern cell, in pattern cell order.
  std::vector<NodeId> binding;
  /// Sorted, duplicate-free set of bound nodes.
  std::vector<NodeId> cellset;

  friend bool operator==(const Match&, const Match&) = default;
};

class StaleMatch : public Error {
 public:
  using Error::Error;
};

/// Precompiled form of a RuleSet for repeated matching.
class Matcher {
 public:
  explicit Matcher(const RuleSet& rules);

  /// Every match of every rule anchored at the active node, ordered by rule
  /// then binding. Only rules whose focus color fits the active node are
  /// tried.
  std::vector<Match> match_all(const Tangle& g) const;
  /// Matches of a single rule anchored at the active node.
  std::vector<Match> match_rule(const Tangle& g, std::size_t rule) const;
  /// Whether `m` still embeds into `g`.
  bool still_valid(const Tangle& g, const Match& m) const;

  const RuleSet& rules() const { return rules_; }

 private:
  struct Step {
    int cell;
    int anchor;       // already-bound cell the candidate is reached from
    Symbol label;
    bool outgoing;    // anchor -label-> cell
  };
  struct Compiled {
    std::vector<std::optional<Symbol>> colors;
    int focus = 0;
    std::vector<Step> order;
    // Edges checked once both endpoints are bound, keyed by the later cell.
    std::vector<std::vector<std::tuple<int, Symbol, int>>> checks;
    std::vector<std::tuple<int, Symbol, int>> negatives;
    bool valid = true;
  };

  void search(const Tangle& g, std::size_t rule, const Compiled& c, std::size_t depth,
              std::vector<NodeId>& binding, std::vector<Match>& out) const;

  RuleSet rules_;
  std::vector<Compiled> compiled_;
  std::vector<std::size_t> wildcard_focus_;
  std::vector<std::pair<Symbol, std::vector<std::size_t>>> by_focus_color_;
};

/// Convenience wrapper: builds a Matcher and matches once.
std::vector<Match> match_all(const Tangle& g, const RuleSet& rules);

/// Drops every match whose cellset is a strict subset of another match's
/// cellset. Matches with equal cellsets survive together.
std::vector<Match> maximality_filter(const std::vector<Match>& matches);

enum class TieBreak { deterministic, random };

/// Picks the winner among maximal matches: the lowest rule index wins; within
/// that rule the lexicographically smallest binding (deterministic) or a
/// seeded uniform draw (random). Returns nullopt when `matches` is empty.
std::optional<Match> select_match(const std::vector<Match>& maximal, TieBreak mode,
                                  std::mt19937_64& rng);

/// Applies the rule's rewrite under `m`'s binding: creations, recolorings,
/// removals, then additions. Returns the ids of created nodes in creation
/// order. Throws StaleMatch when the binding no longer embeds.
std::vector<NodeId> apply(Tangle& g, const Rule& rule, const Match& m);
/// Same, with the stale check done through a precompiled matcher.
std::vector<NodeId> apply(Tangle& g, const Matcher& matcher, const Match& m);

/// Empty iff every rule satisfies the radius bound, has an acyclic pattern,
/// uses only palette colors and alphabet labels, has a total correspondence
/// and deletes no node.
std::vector<std::string> validate_ruleset(const RuleSet& rules);

/// Longest undirected hop distance from the focus to any cell; -1 when some
/// cell is unreachable.
int pattern_radius(const Pattern& p);
bool pattern_has_cycle(const Pattern& p);

}  // namespace dynca
