// dynca: interpret, compile, simulate, difftest and bench ASM-lite programs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dynca/harness.hpp"
#include "dynca/ruleset_io.hpp"

using namespace dynca;

namespace {

enum Exit { ok = 0, disagree = 1, input_error = 2, budget = 3, invariant = 4 };

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_ruleset(const std::string& text) { return text.rfind("ruleset ", 0) == 0; }

int exit_for(Outcome o) { return o == Outcome::budget_exhausted ? budget : ok; }

struct Report {
  Outcome outcome = Outcome::terminal;
  std::uint64_t steps = 0;
  std::uint64_t ticks = 0;
  State state;
  std::string message;
  std::string stats;
};

void print(std::ostream& out, const Report& r, std::uint64_t seed, const std::string& mode) {
  out << "outcome " << outcome_name(r.outcome) << "\n";
  out << "seed " << seed << "\n";
  out << "mode " << mode << "\n";
  out << "steps " << r.steps << "\n";
  if (!r.stats.empty()) out << "ticks " << r.ticks << "\n";
  if (!r.message.empty()) out << "message " << r.message << "\n";
  out << "state\n" << format_state(r.state) << r.stats;
}

// Critical-term commits stop removing the old value edge, so an updated
// term ends up with two values. Differential testing should flag it.
void corrupt(CompilationUnit& cu) {
  for (auto& r : cu.ruleset.rules) {
    if (r.phase() != "commit" || r.name.find(".retarget") == std::string::npos) continue;
    std::erase_if(r.rewrite.removals, [](const PatternEdge& e) { return !labels::is_internal(e.label); });
  }
}

std::string rule_trace(const CompilationUnit& cu, const State& s0, const SimOptions& so) {
  std::ostringstream out;
  std::uint64_t tick = 0;
  simulate(cu, s0, so, [&](const Configuration&, const Rule& r, const Match&) {
    out << "  tick " << ++tick << " " << r.name << "\n";
  });
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic cellular automata for ASM-lite programs"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool random_mode = false;
  bool negative_edges = false;
  bool check_invariants = false;
  std::uint64_t max_ticks = 1'000'000;
  std::uint64_t max_steps = 10'000;
  std::string program_path, state_path, out_path, report_path;

  auto* interpret = app.add_subcommand("interpret", "Run a program with the direct interpreter");
  interpret->add_option("program", program_path)->required();
  interpret->add_option("state", state_path);
  interpret->add_option("--seed", seed);
  interpret->add_option("--max-steps", max_steps);

  auto* compile_cmd = app.add_subcommand("compile", "Compile a program to a rule set");
  compile_cmd->add_option("program", program_path)->required();
  compile_cmd->add_option("-o,--output", out_path);
  compile_cmd->add_flag("--negative-edges", negative_edges);

  std::string trace_path;
  std::uint64_t dot_every = 0;
  std::string dot_dir = "dot";
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a program or rule set on the automaton");
  simulate_cmd->add_option("program", program_path, "Program or serialized rule set")->required();
  simulate_cmd->add_option("state", state_path);
  simulate_cmd->add_option("--seed", seed);
  auto* det = simulate_cmd->add_flag("--deterministic", "Smallest-binding tie break (default)");
  simulate_cmd->add_flag("--random", random_mode)->excludes(det);
  simulate_cmd->add_option("--max-ticks", max_ticks);
  simulate_cmd->add_option("--trace", trace_path, "Write one line per tick to FILE");
  simulate_cmd->add_option("--dot-every", dot_every, "Write a Graphviz snapshot every N ticks");
  simulate_cmd->add_option("--dot-dir", dot_dir);
  simulate_cmd->add_flag("--negative-edges", negative_edges);
  simulate_cmd->add_flag("--check-invariants", check_invariants);

  std::vector<std::string> corpora;
  int generate = 0;
  std::vector<std::uint64_t> seeds{0};
  bool corrupt_ruleset = false;
  bool verbose = false;
  auto* diff = app.add_subcommand("difftest", "Compare interpreter and automaton");
  diff->add_option("--corpus", corpora, "Directory of .asml/.state pairs");
  diff->add_option("--generate", generate, "Number of random programs");
  diff->add_option("--seed", seed, "Generator seed");
  diff->add_option("--seeds", seeds, "Automaton seeds (random mode when more than one)");
  diff->add_flag("--random", random_mode);
  diff->add_flag("--corrupt-ruleset", corrupt_ruleset);
  diff->add_flag("--negative-edges", negative_edges);
  diff->add_flag("--check-invariants", check_invariants);
  diff->add_option("--max-ticks", max_ticks);
  diff->add_option("--report", report_path, "Write the summary and disagreement dumps here");
  diff->add_flag("-v,--verbose", verbose);

  std::string op_name;
  std::vector<int> sizes;
  auto* bench = app.add_subcommand("bench", "Tick counts against input size");
  bench->add_option("op", op_name, "pair, choice, cond, singleton or union")->required();
  bench->add_option("--sizes", sizes);
  bench->add_flag("--negative-edges", negative_edges);
  bench->add_option("--report", report_path);

  CLI11_PARSE(app, argc, argv);
  std::string mode = random_mode ? "random" : "deterministic";
  TieBreak tie = random_mode ? TieBreak::random : TieBreak::deterministic;

  try {
    if (*interpret) {
      asml::Program p = asml::parse(slurp(program_path));
      State s0 = state_path.empty() ? State{} : parse_state(slurp(state_path), p.atoms);
      Interpreter interp(p);
      SeededChoice choice(seed);
      InterpRun r = interp.run(complete_state(p, s0), choice, max_steps);
      print(std::cout, {r.outcome, r.steps, 0, r.state, r.message, ""}, seed, "interpreter");
      return exit_for(r.outcome);
    }
    if (*compile_cmd) {
      CompileOptions co;
      co.negative_edges = negative_edges;
      CompilationUnit cu = compile(asml::parse(slurp(program_path)), co);
      std::string text = serialize_ruleset(cu.ruleset);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream(out_path) << text;
      }
      std::cerr << cu.ruleset.rules.size() << " rules, radius " << cu.ruleset.radius_bound << "\n";
      return ok;
    }
    if (*simulate_cmd) {
      std::string text = slurp(program_path);
      std::string state_text = state_path.empty() ? "" : slurp(state_path);
      if (dot_every > 0) std::filesystem::create_directories(dot_dir);
      auto dot = [&](std::uint64_t tick, const Tangle& g) {
        std::ofstream(dot_dir + "/tick" + std::to_string(tick) + ".dot") << to_dot(g);
      };
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error("cannot write " + trace_path);
      }
      std::uint64_t tick = 0;
      auto hook = [&](const Configuration& cfg, const Rule& rule, const Match&) {
        ++tick;
        if (trace.is_open()) trace << "tick " << tick << " " << rule.name << "\n";
        if (dot_every > 0 && tick % dot_every == 0) dot(tick, cfg.tangle);
      };

      Report rep;
      if (is_ruleset(text)) {
        // Bare rule set: no program, so terms come from the state file as is.
        RuleSet rs = parse_ruleset(text);
        if (auto errs = validate_ruleset(rs); !errs.empty()) throw Error(errs.front());
        Automaton automaton(rs, {tie, max_ticks, check_invariants});
        Configuration cfg(encode(parse_state(state_text)), seed);
        if (dot_every > 0) dot(0, cfg.tangle);
        RunResult rr;
        try {
          rr = automaton.run(cfg, [&](const Configuration& c, const Rule& r, const Match& m) {
            if (r.name == "control:end:0") ++rep.steps;
            hook(c, r, m);
          });
        } catch (const InvariantViolation& e) {
          std::cerr << e.what() << "\n";
          return invariant;
        }
        rep.outcome = rr.outcome == RunOutcome::budget_exhausted ? Outcome::budget_exhausted
                                                                 : compiled_outcome(cfg.tangle);
        rep.state = decode(cfg.tangle);
        rep.ticks = rr.stats.total;
        rep.stats = rr.stats.to_text();
      } else {
        asml::Program p = asml::parse(text);
        CompileOptions co;
        co.negative_edges = negative_edges;
        CompilationUnit cu = compile(p, co);
        State s0 = complete_state(p, parse_state(state_text, p.atoms));
        if (dot_every > 0) dot(0, encode(s0));
        SimRun r = simulate(cu, s0, {tie, seed, max_ticks, check_invariants}, hook);
        if (r.message.rfind("invariant", 0) == 0) {
          std::cerr << r.message << "\n";
          return invariant;
        }
        rep = {r.outcome, r.steps, r.stats.total, r.state, r.message, r.stats.to_text()};
      }
      print(std::cout, rep, seed, mode);
      return exit_for(rep.outcome);
    }
    if (*diff) {
      struct Case {
        std::string name;
        asml::Program program;
        State state;
      };
      std::vector<Case> cases;
      for (const auto& dir : corpora) {
        for (auto& e : load_corpus(dir)) cases.push_back({e.name, e.program, e.state});
      }
      std::mt19937_64 rng(seed);
      for (int i = 0; i < generate; ++i) {
        GeneratedCase g = generate_case(rng);
        cases.push_back({"generated-" + std::to_string(i), g.program, g.state});
      }
      if (seeds.size() > 1) tie = TieBreak::random;
      std::ostringstream dump;
      int failures = 0, runs = 0;
      bool violated = false;
      for (const auto& c : cases) {
        CompileOptions co;
        co.negative_edges = negative_edges;
        CompilationUnit cu = compile(c.program, co);
        if (corrupt_ruleset) corrupt(cu);
        for (auto s : seeds) {
          SimOptions so{tie, s, max_ticks, check_invariants};
          DiffResult d = difftest(cu, c.state, so);
          ++runs;
          if (!d.agree) {
            ++failures;
            if (d.detail.rfind("invariant", 0) == 0) violated = true;
            std::cout << "DISAGREE " << c.name << " seed " << s << "\n" << d.detail << "\n";
            dump << "DISAGREE " << c.name << " seed " << s << "\n"
                 << d.detail << "\nprogram\n"
                 << asml::pretty_print(c.program) << "state\n"
                 << format_state(c.state) << "trace\n"
                 << rule_trace(cu, c.state, so);
          } else if (verbose) {
            std::cout << "agree " << c.name << " seed " << s << " " << outcome_name(d.sim.outcome)
                      << " steps " << d.sim.steps << " ticks " << d.sim.stats.total << "\n";
          }
        }
      }
      std::ostringstream summary;
      summary << runs - failures << "/" << runs << " runs agree\n";
      std::cout << summary.str();
      if (!report_path.empty()) std::ofstream(report_path) << summary.str() << dump.str();
      if (violated) return invariant;
      return failures == 0 ? ok : disagree;
    }
    if (*bench) {
      auto op = parse_bench_op(op_name);
      if (!op) throw Error("unknown bench op " + op_name);
      if (sizes.empty()) sizes = {2, 4, 8, 16, 32};
      if (!std::is_sorted(sizes.begin(), sizes.end())) throw Error("sizes must be ascending");
      BenchReport r = run_bench(*op, sizes, negative_edges);
      std::cout << r.to_text();
      if (!report_path.empty()) std::ofstream(report_path) << r.to_text();
      return r.pass ? ok : disagree;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return input_error;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  }
  return ok;
}
