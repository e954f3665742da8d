#pragma once

// Reference semantics of ASM-lite over hereditarily finite values.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynca/asmlang.hpp"
#include "dynca/hfset.hpp"
#include "dynca/state.hpp"

namespace dynca {

/// Resolves choose(). Implementations see the set and return one member.
class ChoiceSource {
 public:
  virtual ~ChoiceSource() = default;
  virtual hf::Value choose(const hf::Value& set) = 0;
};

/// Seeded uniform draw over the members in canonical order.
class SeededChoice : public ChoiceSource {
 public:
  explicit SeededChoice(std::uint64_t seed) : rng_(seed) {}
  hf::Value choose(const hf::Value& set) override;

 private:
  std::mt19937_64 rng_;
};

/// Replays a recorded sequence of chosen values. Throws Error when the
/// script runs out or names a non-member.
class ScriptedChoice : public ChoiceSource {
 public:
  explicit ScriptedChoice(std::vector<hf::Value> script) : script_(std::move(script)) {}
  hf::Value choose(const hf::Value& set) override;
  std::size_t used() const { return next_; }
  std::size_t size() const { return script_.size(); }

 private:
  std::vector<hf::Value> script_;
  std::size_t next_ = 0;
};

/// Follows a prefix of member indices, taking index 0 beyond it, and records
/// the branching factor of every choice point it meets.
class PathChoice : public ChoiceSource {
 public:
  explicit PathChoice(std::vector<std::size_t> prefix) : path_(std::move(prefix)) {}
  hf::Value choose(const hf::Value& set) override;
  const std::vector<std::size_t>& path() const { return path_; }
  const std::vector<std::size_t>& arity() const { return arity_; }

 private:
  std::vector<std::size_t> path_;
  std::vector<std::size_t> arity_;
  std::size_t next_ = 0;
};

enum class Outcome { terminal, budget_exhausted, inconsistent, error };
std::string_view outcome_name(Outcome o);

struct FireResult {
  enum Kind { next, terminal, inconsistent, error } kind = terminal;
  State state;
  std::string message;
};

struct InterpRun {
  Outcome outcome = Outcome::terminal;
  State state;
  std::uint64_t steps = 0;
  std::string message;
};

class Interpreter {
 public:
  explicit Interpreter(asml::Program program, hf::Limits limits = {64, 4096});

  /// One transition: gathers the update set against `s` and applies it.
  FireResult fire(const State& s, ChoiceSource& choice) const;
  InterpRun run(State s0, ChoiceSource& choice, std::uint64_t max_steps = 10'000) const;

  const asml::Program& program() const { return program_; }

 private:
  asml::Program program_;
  hf::Limits limits_;
};

/// Fills missing critical terms with the empty set. Throws Error for terms
/// the program does not declare.
State complete_state(const asml::Program& p, const State& s);

struct OutcomeSet {
  /// Distinct end results, in first-found order.
  std::vector<InterpRun> outcomes;
  std::size_t paths = 0;
};

/// Runs every resolution of every choice point. Throws Error when there are
/// more than `max_paths` paths.
OutcomeSet enumerate_outcomes(const Interpreter& interp, const State& s0,
                              std::uint64_t max_steps = 10'000, std::size_t max_paths = 64);

}  // namespace dynca
