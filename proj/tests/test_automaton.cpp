#include <doctest.h>

#include "dynca/automaton.hpp"
#include "dynca/compiler.hpp"
#include "dynca/harness.hpp"

using namespace dynca;

namespace {

// A focus with `n` noisy neighbors.
Tangle neighborhood(int n) {
  Tangle g;
  g.add_node(Symbol("crit"));
  for (int i = 0; i < n; ++i) {
    NodeId x = g.add_node(Symbol("noisy"));
    g.add_edge(0, Symbol("next"), x);
  }
  return g;
}

// Rule that recolors the focus once it sees `k` noisy neighbors.
Rule react(int k, const std::string& to) {
  Rule r;
  r.name = "react:" + std::to_string(k);
  r.pattern.focus = "C";
  r.pattern.cells.push_back({"C", Symbol("crit")});
  for (int i = 0; i < k; ++i) {
    std::string n = "N" + std::to_string(i);
    r.pattern.cells.push_back({n, Symbol("noisy")});
    r.pattern.edges.push_back({"C", Symbol("next"), n});
  }
  r.rewrite = identity_rewrite(r.pattern);
  r.rewrite.recolorings.push_back({"C", Symbol(to)});
  return r;
}

RuleSet noisy_rules() {
  RuleSet rs;
  rs.palette = {"crit", "crit.stay", "crit.police", "crit.ambulance", "noisy"};
  rs.labels = {"next"};
  // Least specific first, so only maximality can make the others win.
  rs.rules = {react(1, "crit.stay"), react(2, "crit.police"), react(3, "crit.ambulance")};
  return rs;
}

CompilationUnit pairing() {
  return compile(asml::parse("atoms: ;\nfunctions: ;\ncritical: t, p;\ndo t := <t, p>\n"));
}

}  // namespace

TEST_CASE("more specific neighborhoods take precedence") {
  Automaton a(noisy_rules());
  for (auto [n, color] : std::vector<std::pair<int, std::string>>{
           {1, "crit.stay"}, {2, "crit.police"}, {3, "crit.ambulance"}, {5, "crit.ambulance"}}) {
    Configuration cfg(neighborhood(n), 0);
    auto m = a.step(cfg);
    REQUIRE(m);
    CHECK(cfg.tangle.node(0).color.str() == color);
  }
}

TEST_CASE("no match is quiescent") {
  Automaton a(noisy_rules());
  Configuration cfg(neighborhood(0), 0);
  CHECK_FALSE(a.step(cfg));
  auto r = a.run(cfg);
  CHECK(r.outcome == RunOutcome::quiescent);
  CHECK(r.stats.total == 0);
  CHECK(a.trace(cfg).empty());
}

TEST_CASE("overlapping maximal matches: deterministic winner is stable") {
  RuleSet rs = noisy_rules();
  rs.rules = {react(2, "crit.police")};
  Automaton a(rs);
  Configuration probe(neighborhood(3), 0);
  auto maximal = maximality_filter(a.matcher().match_all(probe.tangle));
  CHECK(maximal.size() == 6);  // ordered pairs of distinct neighbors
  std::vector<NodeId> first;
  for (int run = 0; run < 100; ++run) {
    Configuration cfg(neighborhood(3), static_cast<std::uint64_t>(run));
    auto m = a.select(cfg);
    REQUIRE(m);
    if (run == 0) first = m->binding;
    CHECK(m->binding == first);
  }
  CHECK(first == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("random tie break is seeded") {
  RuleSet rs = noisy_rules();
  rs.rules = {react(2, "crit.police")};
  Automaton a(rs, {TieBreak::random, 100, false});
  std::set<std::vector<NodeId>> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Configuration c1(neighborhood(3), seed), c2(neighborhood(3), seed);
    auto m1 = a.select(c1), m2 = a.select(c2);
    CHECK(m1->binding == m2->binding);
    seen.insert(m1->binding);
  }
  CHECK(seen.size() > 1);
}

TEST_CASE("pairing runs in a constant number of ticks") {
  CompilationUnit cu = pairing();
  std::vector<std::uint64_t> ticks;
  for (int n : {2, 32}) {
    std::vector<hf::Value> xs, ys;
    for (int i = 0; i < n; ++i) {
      xs.push_back(hf::Value::atom("x" + std::to_string(i)));
      ys.push_back(hf::Value::atom("y" + std::to_string(i)));
    }
    State s;
    s.terms = {{"t", hf::Value::set(xs)}, {"p", hf::Value::set(ys)}};
    Automaton a(cu.ruleset, {TieBreak::deterministic, 1'000'000, true});
    Configuration cfg(encode(s), 0);
    std::uint64_t n_ticks = 0;
    while (true) {
      auto m = a.step(cfg);
      REQUIRE(m);
      ++n_ticks;
      if (a.rules().rules[m->rule].name == cu.end_rule) break;
    }
    ticks.push_back(n_ticks);
  }
  CHECK(ticks[0] == ticks[1]);
}

TEST_CASE("tick budget") {
  Automaton a(noisy_rules(), {TieBreak::deterministic, 0, false});
  Configuration cfg(neighborhood(1), 0);
  CHECK(a.run(cfg).outcome == RunOutcome::budget_exhausted);

  // Two ticks of work: react to one neighbor, then a follow-up rule.
  RuleSet rs = noisy_rules();
  rs.rules.resize(1);
  Rule calm;
  calm.name = "calm:0";
  calm.pattern.focus = "C";
  calm.pattern.cells.push_back({"C", Symbol("crit.stay")});
  calm.rewrite = identity_rewrite(calm.pattern);
  calm.rewrite.recolorings.push_back({"C", Symbol("crit.police")});
  rs.rules.push_back(calm);
  Automaton one(rs, {TieBreak::deterministic, 1, false});
  Configuration c2(neighborhood(1), 0);
  auto r = one.run(c2);
  CHECK(r.outcome == RunOutcome::budget_exhausted);
  CHECK(r.stats.total == 1);
  Automaton enough(rs, {TieBreak::deterministic, 2, false});
  Configuration c3(neighborhood(1), 0);
  CHECK(enough.run(c3).outcome == RunOutcome::quiescent);
}

TEST_CASE("trace entries replay to the final tangle") {
  CompilationUnit cu = compile(asml::parse(
      "atoms: a, b;\nfunctions: ;\ncritical: f, t, p;\n"
      "do if f = {} then par { t := p ; p := {t} U p ; f := <f, f> }\n"));
  State s;
  s.terms = {{"t", hf::parse_value("{a}")}, {"p", hf::parse_value("{b}")}, {"f", hf::empty()}};
  Automaton a(cu.ruleset);
  Configuration cfg(encode(s), 0);
  auto trace = a.trace(cfg);
  REQUIRE(trace.size() >= 3);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].tick > trace[i - 1].tick);

  Tangle g = encode(s);
  for (const auto& e : trace) {
    std::size_t idx = 0;
    while (a.rules().rules[idx].name != e.rule) ++idx;
    Match m;
    m.rule = idx;
    m.binding = e.binding;
    m.cellset = e.binding;
    std::sort(m.cellset.begin(), m.cellset.end());
    m.cellset.erase(std::unique(m.cellset.begin(), m.cellset.end()), m.cellset.end());
    apply(g, a.rules().rules[idx], m);
    CHECK(to_snapshot(g) == e.snapshot);
  }
  CHECK(to_snapshot(g) == to_snapshot(cfg.tangle));
}

TEST_CASE("invariant checking aborts on a broken rule") {
  RuleSet rs;
  rs.palette = {"crit", "set"};
  rs.labels = {"t"};
  Rule dup;
  dup.name = "dup:0";
  dup.pattern.focus = "C";
  dup.pattern.cells.push_back({"C", Symbol("crit")});
  dup.rewrite = identity_rewrite(dup.pattern);
  dup.rewrite.creations.push_back({"N", Symbol("set")});
  dup.rewrite.additions.push_back({"C", Symbol("t"), "N"});
  rs.rules = {dup};
  Automaton a(rs, {TieBreak::deterministic, 10, true});
  // A fresh empty set next to the existing one breaks node uniqueness.
  Configuration cfg(encode(State{}), 0);
  CHECK_THROWS_AS(a.run(cfg), InvariantViolation);
}

TEST_CASE("step stats attribute ticks to phases") {
  CompilationUnit cu = compile(asml::parse(
      "atoms: a;\nfunctions: ;\ncritical: f, t;\ndo if f = {} then par { t := {t} ; f := <f, f> }\n"));
  SimRun r = simulate(cu, State{}, {});
  CHECK(r.outcome == Outcome::terminal);
  std::uint64_t sum = 0;
  for (const auto& [phase, n] : r.stats.per_phase) sum += n;
  CHECK(sum == r.stats.total);
  CHECK(r.stats.per_phase.count("singleton") == 1);
  CHECK(r.stats.to_text().find("total") != std::string::npos);
}
