#pragma once

// Glue shared by the CLI, the tests and the Python module: compiled
// simulation with decoding, interpreter-vs-automaton differential runs,
// random program generation and tick-count benchmarks.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynca/asmlang.hpp"
#include "dynca/automaton.hpp"
#include "dynca/compiler.hpp"
#include "dynca/interpreter.hpp"
#include "dynca/state.hpp"

namespace dynca {

struct SimOptions {
  TieBreak mode = TieBreak::deterministic;
  std::uint64_t seed = 0;
  std::uint64_t max_ticks = 1'000'000;
  bool check_invariants = false;
};

struct SimRun {
  Outcome outcome = Outcome::terminal;
  State state;
  /// Completed ASM steps (firings of the compilation unit's end rule).
  std::uint64_t steps = 0;
  StepStats stats;
  /// Values picked by choice rules, in tick order.
  std::vector<hf::Value> choices;
  Tangle final;
  std::string message;
};

/// Outcome encoded by the Criticals color of a quiescent compiled tangle.
Outcome compiled_outcome(const Tangle& g);

/// Encodes `s0`, runs the compiled rules to quiescence and decodes. An
/// invariant violation is reported through `message` with outcome error.
SimRun simulate(const CompilationUnit& cu, const State& s0, const SimOptions& opts,
                const Automaton::Hook& hook = {});

struct DiffResult {
  bool agree = false;
  std::string detail;
  InterpRun interp;
  SimRun sim;
};

/// Runs the automaton with `opts`, then replays its choices through the
/// interpreter and compares outcome, final state and step count.
DiffResult difftest(const CompilationUnit& cu, const State& s0, const SimOptions& opts,
                    std::uint64_t max_steps = 10'000);

struct CorpusEntry {
  std::string name;
  std::string source;
  asml::Program program;
  State state;
};

/// Every `<name>.asml` with a sibling `<name>.state`, sorted by name.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

struct GeneratorOptions {
  int max_statements = 20;
  int max_atoms = 5;
  int max_depth = 3;
  int data_terms = 5;
};

struct GeneratedCase {
  asml::Program program;
  State state;
};

/// Random program plus initial state. Programs stop after at most
/// `max_depth` ASM steps, only build sets where sets are required, and
/// guard every choose with a nonemptiness test.
GeneratedCase generate_case(std::mt19937_64& rng, const GeneratorOptions& opts = {});

/// Random value of depth at most `depth` over `atoms`.
hf::Value random_value(std::mt19937_64& rng, const std::vector<std::string>& atoms, int depth,
                       int width = 3);

// ----- benchmarks -------------------------------------------------------

enum class BenchOp { pair, choice, cond, singleton, union_ };

struct BenchPoint {
  int size = 0;
  std::uint64_t ticks = 0;
};

struct BenchReport {
  BenchOp op = BenchOp::pair;
  bool negative_edges = false;
  std::vector<BenchPoint> points;
  double exponent = 0.0;
  /// Constant-time ops: all tick counts equal. Others: exponent in window.
  bool pass = false;
  double lo = 0.0, hi = 0.0;

  std::string to_text() const;
};

std::string bench_name(BenchOp op);
std::optional<BenchOp> parse_bench_op(const std::string& s);

/// Program and initial state whose measured ticks scale with `size`.
GeneratedCase bench_case(BenchOp op, int size);
/// Ticks attributed to the measured operation.
std::uint64_t bench_ticks(BenchOp op, int size, bool negative_edges = false);
BenchReport run_bench(BenchOp op, const std::vector<int>& sizes, bool negative_edges = false);

/// Iterated union over `steps` ASM steps; returns total ticks.
std::uint64_t overhead_ticks(int steps);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dynca
