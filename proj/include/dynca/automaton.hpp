#pragma once

// Sequential simulation: at every tick the active cell gathers its matches,
// drops the non-maximal ones, picks one and applies it.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynca/pattern.hpp"
#include "dynca/tangle.hpp"

namespace dynca {

struct Configuration {
  Tangle tangle;
  std::uint64_t tick = 0;
  std::mt19937_64 rng;

  Configuration() = default;
  Configuration(Tangle g, std::uint64_t seed) : tangle(std::move(g)), rng(seed) {}
};

struct StepStats {
  std::uint64_t total = 0;
  /// Keyed by rule-name prefix (see Rule::phase).
  std::map<std::string, std::uint64_t> per_phase;
  std::map<std::string, std::uint64_t> per_rule;

  void record(const Rule& r);
  /// `phase <tag> <count>` lines, then `total <count>`.
  std::string to_text() const;
};

enum class RunOutcome { quiescent, budget_exhausted };

struct EngineOptions {
  TieBreak mode = TieBreak::deterministic;
  std::uint64_t max_ticks = 1'000'000;
  /// Check tangle invariants after every tick; structural only while the
  /// Criticals node wears a lock color.
  bool check_invariants = false;
};

class InvariantViolation : public Error {
 public:
  InvariantViolation(std::uint64_t tick, std::vector<std::string> violations);
  std::uint64_t tick() const { return tick_; }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::uint64_t tick_;
  std::vector<std::string> violations_;
};

struct RunResult {
  RunOutcome outcome = RunOutcome::quiescent;
  StepStats stats;
};

struct TraceEntry {
  std::uint64_t tick = 0;
  std::string rule;
  std::vector<NodeId> binding;
  std::string snapshot;
};

class Automaton {
 public:
  /// Called after each applied transition with the updated configuration.
  using Hook = std::function<void(const Configuration&, const Rule&, const Match&)>;

  explicit Automaton(RuleSet rules, EngineOptions options = {});

  /// The match that would fire next, or nullopt when quiescent.
  std::optional<Match> select(Configuration& cfg) const;
  /// Applies one transition. Returns the applied match, nullopt when
  /// quiescent (the configuration is then untouched).
  std::optional<Match> step(Configuration& cfg) const;
  RunResult run(Configuration& cfg, const Hook& hook = {}) const;
  std::vector<TraceEntry> trace(Configuration& cfg) const;

  /// Invariant violations of `cfg` at the level its Criticals color allows.
  std::vector<std::string> violations(const Configuration& cfg) const;

  const RuleSet& rules() const { return matcher_.rules(); }
  const Matcher& matcher() const { return matcher_; }
  const EngineOptions& options() const { return options_; }

 private:
  Matcher matcher_;
  EngineOptions options_;
};

}  // namespace dynca
