// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not taken from the command
// line.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "dynca/harness.hpp"
#include "dynca/ruleset_io.hpp"
#include "support.hpp"

using namespace dynca;
using hf::Value;

namespace {

const std::filesystem::path corpus_root = DYNCA_CORPUS_DIR;

constexpr int generated_programs = 100;
constexpr std::uint64_t generator_seed = 20240601;
const std::vector<std::uint64_t> automaton_seeds{1, 2, 3};

constexpr double union_lo = 1.6, union_hi = 2.4;
constexpr double singleton_lo = 0.7, singleton_hi = 1.3;
constexpr double overhead_max = 2.4;
constexpr int permutations_per_program = 5;
constexpr std::size_t max_paths = 64;
constexpr int confluence_seeds = 10;
constexpr int roundtrip_states = 500;
constexpr int roundtrip_asts = 500;
constexpr int random_tangles = 200;

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void verdict(int n, const std::string& name, bool pass, const std::string& detail, double secs) {
  char t[32];
  std::snprintf(t, sizeof t, "%.2fs", secs);
  lines[n] = std::string(pass ? "PASS" : "FAIL") + " criterion " + std::to_string(n) + " " + name + ": " +
             detail + " [" + t + "]";
  if (!pass) ++failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fixed(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", x);
  return b;
}

struct Case {
  std::string name;
  asml::Program program;
  State state;
};

std::vector<Case> criterion_one_cases() {
  std::vector<Case> out;
  for (auto& e : load_corpus(corpus_root / "hand")) out.push_back({e.name, e.program, e.state});
  std::mt19937_64 rng(generator_seed);
  for (int i = 0; i < generated_programs; ++i) {
    GeneratedCase g = generate_case(rng);
    out.push_back({"generated-" + std::to_string(i), g.program, g.state});
  }
  return out;
}

// Values of every value node, decoded bottom-up with memoization. Throws on
// a containment cycle.
std::vector<std::optional<std::string>> node_values(const Tangle& g) {
  std::vector<std::optional<std::string>> val(g.node_count());
  std::vector<int> state(g.node_count(), 0);
  std::function<std::string(NodeId)> go = [&](NodeId n) -> std::string {
    if (state[n] == 2) return *val[n];
    if (state[n] == 1) throw std::runtime_error("containment cycle");
    state[n] = 1;
    const Node& node = g.node(n);
    std::string s;
    if (node.kind == NodeKind::atom) {
      s = node.atom;
    } else if (node.kind == NodeKind::set) {
      std::vector<std::string> ms;
      for (const auto& e : node.in) {
        if (e.label == labels::member()) ms.push_back(go(e.node));
      }
      std::sort(ms.begin(), ms.end());
      s = "{";
      for (const auto& m : ms) s += m + ",";
      s += "}";
    } else {
      std::string a, b;
      for (const auto& e : node.in) {
        if (e.label == labels::first()) a = go(e.node);
        if (e.label == labels::second()) b = go(e.node);
      }
      s = "<" + a + "," + b + ">";
    }
    state[n] = 2;
    val[n] = s;
    return s;
  };
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto k = g.node(i).kind;
    if (k == NodeKind::atom || k == NodeKind::set || k == NodeKind::pair) go(i);
  }
  return val;
}

// ---------------------------------------------------------------------------

void differential_and_invariants(const std::vector<Case>& cases) {
  Timer timer;
  int runs = 0, agree = 0;
  std::size_t idle_ticks = 0, violations = 0;
  std::string first_problem;
  for (const auto& c : cases) {
    CompilationUnit cu = compile(c.program);
    for (auto seed : automaton_seeds) {
      DiffResult d = difftest(cu, c.state, {TieBreak::random, seed, 1'000'000, true});
      ++runs;
      if (d.agree) {
        ++agree;
      } else if (first_problem.empty()) {
        first_problem = c.name + " seed " + std::to_string(seed) + ": " + d.detail;
      }
    }
  }
  verdict(1, "differential correctness", agree == runs,
          std::to_string(agree) + "/" + std::to_string(runs) + " runs agree over " +
              std::to_string(cases.size()) + " programs x " + std::to_string(automaton_seeds.size()) +
              " seeds, tolerance 0" + (first_problem.empty() ? "" : "; first: " + first_problem),
          timer.seconds());

  // Criterion 4 replays the same runs with a test-side checker in the hook.
  Timer t4;
  for (const auto& c : cases) {
    CompilationUnit cu = compile(c.program);
    const auto& locks = cu.ruleset.lock_colors;
    for (auto seed : automaton_seeds) {
      std::size_t last_nodes = 0;
      auto note = [&](const std::string& what) {
        ++violations;
        if (first_problem.empty()) first_problem = c.name + ": " + what;
      };
      simulate(cu, c.state, {TieBreak::random, seed, 1'000'000, false},
               [&](const Configuration& cfg, const Rule&, const Match&) {
                 const Tangle& g = cfg.tangle;
                 if (g.node_count() < last_nodes) note("node count decreased");
                 last_nodes = g.node_count();
                 std::size_t crits = 0;
                 for (NodeId i = 0; i < g.node_count(); ++i) crits += g.node(i).kind == NodeKind::criticals;
                 if (crits != 1) note("criticals count " + std::to_string(crits));
                 if (locks.count(g.node(g.active()).color.str())) return;
                 ++idle_ticks;
                 try {
                   auto vals = node_values(g);
                   std::unordered_set<std::string> seen;
                   for (const auto& v : vals) {
                     if (v && !seen.insert(*v).second) note("duplicate node for " + *v);
                   }
                 } catch (const std::runtime_error&) {
                   note("containment cycle");
                 }
               });
    }
  }
  verdict(4, "structural invariants", violations == 0 && idle_ticks > 0,
          std::to_string(violations) + " violations over " + std::to_string(idle_ticks) +
              " lock-idle ticks, tolerance 0",
          t4.seconds());
}

void complexity() {
  Timer timer;
  BenchReport u = run_bench(BenchOp::union_, {2, 4, 8, 16, 32});
  BenchReport s = run_bench(BenchOp::singleton, {2, 4, 8, 16});
  bool union_ok = u.exponent >= union_lo && u.exponent <= union_hi;
  bool singleton_ok = s.exponent >= singleton_lo && s.exponent <= singleton_hi;
  std::ostringstream detail;
  detail << "union exponent " << fixed(u.exponent) << " in [" << union_lo << ", " << union_hi
         << "]; singleton exponent " << fixed(s.exponent) << " in [" << singleton_lo << ", "
         << singleton_hi << "]";
  bool constant_ok = true;
  for (auto op : {BenchOp::pair, BenchOp::choice, BenchOp::cond}) {
    auto a = bench_ticks(op, 2), b = bench_ticks(op, 32);
    detail << "; " << bench_name(op) << " " << a << "/" << b << " ticks at 2/32";
    constant_ok = constant_ok && a == b;
  }
  verdict(2, "complexity fits", union_ok && singleton_ok && constant_ok, detail.str(), timer.seconds());
}

void overhead() {
  Timer timer;
  std::vector<double> xs, ys;
  std::ostringstream detail;
  for (int t : {4, 8, 16, 32}) {
    auto ticks = overhead_ticks(t);
    xs.push_back(t);
    ys.push_back(static_cast<double>(ticks));
    detail << "T=" << t << ":" << ticks << " ";
  }
  double e = loglog_slope(xs, ys);
  detail << "exponent " << fixed(e) << " <= " << overhead_max;
  verdict(3, "overall overhead", e <= overhead_max, detail.str(), timer.seconds());
}

void maximality() {
  Timer timer;
  int bad = 0;
  auto over = [](std::size_t rule, std::vector<NodeId> nodes) {
    Match m;
    m.rule = rule;
    m.binding = nodes;
    std::sort(nodes.begin(), nodes.end());
    m.cellset = nodes;
    return m;
  };
  // Strict subset blocked; incomparable overlap keeps both.
  auto blocked = maximality_filter({over(0, {1, 2, 3}), over(1, {1, 2})});
  bad += !(blocked.size() == 1 && blocked[0].rule == 0);
  bad += maximality_filter({over(0, {1, 2}), over(1, {2, 3})}).size() != 2;

  // Engine level: a less specific rule listed first still loses.
  Tangle g;
  g.add_node(Symbol("crit"));
  for (int i = 0; i < 2; ++i) g.add_edge(0, Symbol("next"), g.add_node(Symbol("noisy")));
  RuleSet rs;
  rs.palette = {"crit", "crit.one", "crit.two", "noisy"};
  rs.labels = {"next"};
  for (int k : {1, 2}) {
    Rule r;
    r.name = "neighbors:" + std::to_string(k);
    r.pattern.focus = "C";
    r.pattern.cells.push_back({"C", Symbol("crit")});
    for (int i = 0; i < k; ++i) {
      r.pattern.cells.push_back({"N" + std::to_string(i), Symbol("noisy")});
      r.pattern.edges.push_back({"C", Symbol("next"), "N" + std::to_string(i)});
    }
    r.rewrite = identity_rewrite(r.pattern);
    r.rewrite.recolorings.push_back({"C", Symbol(k == 1 ? "crit.one" : "crit.two")});
    rs.rules.push_back(r);
  }
  Configuration cfg(g, 0);
  Automaton(rs).step(cfg);
  bad += cfg.tangle.node(0).color.str() != "crit.two";

  std::mt19937_64 rng(7);
  int mismatches = 0;
  for (int i = 0; i < random_tangles; ++i) {
    auto c = testing::random_match_case(rng);
    auto all = Matcher(c.rules).match_all(c.tangle);
    for (std::size_t r = 0; r < c.rules.rules.size(); ++r) {
      std::set<std::vector<NodeId>> got;
      for (const auto& m : all) {
        if (m.rule == r) got.insert(m.binding);
      }
      mismatches += got != testing::brute_force_bindings(c.tangle, c.rules.rules[r]);
    }
    std::vector<std::set<NodeId>> cellsets;
    for (const auto& m : all) cellsets.emplace_back(m.binding.begin(), m.binding.end());
    std::multiset<std::vector<NodeId>> want, have;
    for (auto k : testing::naive_maximal(cellsets)) want.insert(all[k].binding);
    for (const auto& m : maximality_filter(all)) have.insert(m.binding);
    mismatches += want != have;
  }
  verdict(5, "maximality semantics", bad == 0 && mismatches == 0,
          std::to_string(bad) + " unit failures, " + std::to_string(mismatches) + " mismatches vs brute force on " +
              std::to_string(random_tangles) + " random tangles, tolerance 0",
          timer.seconds());
}

void isomorphism() {
  Timer timer;
  std::vector<Case> pool;
  for (auto& e : load_corpus(corpus_root / "hand")) {
    if (!asml::uses_choice(e.program)) pool.push_back({e.name, e.program, e.state});
  }
  std::mt19937_64 rng(31);
  int checked = 0, bad = 0;
  std::string first;
  for (const auto& c : pool) {
    CompilationUnit cu = compile(c.program);
    State s0 = complete_state(c.program, c.state);
    SimRun base = simulate(cu, s0, {});
    for (int k = 0; k < permutations_per_program; ++k) {
      std::vector<std::string> image = c.program.atoms;
      std::shuffle(image.begin(), image.end(), rng);
      std::unordered_map<std::string, std::string> perm;
      for (std::size_t i = 0; i < image.size(); ++i) perm[c.program.atoms[i]] = image[i];
      SimRun moved = simulate(cu, rename_atoms(s0, perm), {});
      ++checked;
      if (moved.outcome != base.outcome || moved.state != rename_atoms(base.state, perm)) {
        ++bad;
        if (first.empty()) first = c.name;
      }
    }
  }
  verdict(6, "isomorphism closure", bad == 0 && pool.size() >= 20,
          std::to_string(checked - bad) + "/" + std::to_string(checked) + " permuted runs commute over " +
              std::to_string(pool.size()) + " choice-free programs" + (first.empty() ? "" : "; first: " + first),
          timer.seconds());
}

void confluence() {
  Timer timer;
  auto corpus = load_corpus(corpus_root / "confluent");
  int bad = 0;
  std::size_t total_paths = 0;
  std::string first;
  for (const auto& e : corpus) {
    Interpreter interp(e.program);
    State s0 = complete_state(e.program, e.state);
    OutcomeSet all = enumerate_outcomes(interp, s0, 10'000, max_paths);
    total_paths += all.paths;
    bool ok = all.outcomes.size() == 1 && asml::uses_choice(e.program);
    CompilationUnit cu = compile(e.program);
    for (int seed = 1; ok && seed <= confluence_seeds; ++seed) {
      SimRun r = simulate(cu, s0, {TieBreak::random, static_cast<std::uint64_t>(seed), 1'000'000, false});
      const InterpRun& only = all.outcomes.front();
      ok = r.outcome == only.outcome && (r.outcome == Outcome::error || r.state == only.state);
    }
    if (!ok) {
      ++bad;
      if (first.empty()) first = e.name;
    }
  }
  verdict(7, "choice confluence", bad == 0 && corpus.size() == 10,
          std::to_string(corpus.size() - bad) + "/" + std::to_string(corpus.size()) +
              " programs with one reachable outcome (" + std::to_string(total_paths) + " paths, <= " +
              std::to_string(max_paths) + " each) matched by " + std::to_string(confluence_seeds) +
              " seeded automaton runs" + (first.empty() ? "" : "; first: " + first),
          timer.seconds());
}

void round_trips(const std::vector<Case>& cases) {
  Timer timer;
  std::mt19937_64 rng(8);
  std::vector<std::string> atoms{"a", "b", "c", "d"};
  int state_bad = 0, ast_bad = 0, rules_bad = 0, rulesets = 0;
  for (int i = 0; i < roundtrip_states; ++i) {
    State s = testing::random_state(rng, atoms);
    state_bad += decode(encode(s)) != s;
  }
  for (int i = 0; i < roundtrip_asts; ++i) {
    testing::AstGen gen(rng);
    asml::Program p = gen.program(4);
    try {
      ast_bad += !asml::equal(asml::parse(asml::pretty_print(p)), p);
    } catch (const ParseError&) {
      ++ast_bad;
    }
  }
  std::vector<asml::Program> programs;
  for (const auto& c : cases) programs.push_back(c.program);
  for (auto& e : load_corpus(corpus_root / "confluent")) programs.push_back(e.program);
  for (auto op : {BenchOp::pair, BenchOp::choice, BenchOp::cond, BenchOp::singleton, BenchOp::union_}) {
    programs.push_back(bench_case(op, 2).program);
  }
  for (const auto& p : programs) {
    for (bool neg : {false, true}) {
      RuleSet rs = compile(p, {neg}).ruleset;
      ++rulesets;
      rules_bad += !(parse_ruleset(serialize_ruleset(rs)) == rs);
    }
  }
  verdict(8, "round trips", state_bad == 0 && ast_bad == 0 && rules_bad == 0,
          "states " + std::to_string(roundtrip_states - state_bad) + "/" + std::to_string(roundtrip_states) +
              ", ASTs " + std::to_string(roundtrip_asts - ast_bad) + "/" + std::to_string(roundtrip_asts) +
              ", rule sets " + std::to_string(rulesets - rules_bad) + "/" + std::to_string(rulesets),
          timer.seconds());
}

}  // namespace

int main() {
  Timer total;
  auto cases = criterion_one_cases();
  differential_and_invariants(cases);
  complexity();
  overhead();
  maximality();
  isomorphism();
  confluence();
  round_trips(cases);
  for (const auto& [n, line] : lines) std::cout << line << "\n";
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " in "
            << fixed(total.seconds()) << "s" << std::endl;
  return failures == 0 ? 0 : 1;
}
