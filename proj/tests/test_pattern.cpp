#include <doctest.h>

#include "dynca/pattern.hpp"
#include "dynca/compiler.hpp"
#include "support.hpp"

using namespace dynca;

namespace {

Match match_over(std::size_t rule, std::vector<NodeId> nodes) {
  Match m;
  m.rule = rule;
  m.binding = nodes;
  std::sort(nodes.begin(), nodes.end());
  m.cellset = nodes;
  return m;
}

RuleSet palette_for(std::vector<Rule> rules) {
  RuleSet rs;
  rs.palette = {"crit", "set", "atom", "pair", "white", "black"};
  rs.labels = {"in", "t", "p", "p1", "p2", "@v0"};
  rs.radius_bound = 2;
  rs.rules = std::move(rules);
  return rs;
}

Rule focus_only(const std::string& name, const char* color = nullptr) {
  Rule r;
  r.name = name;
  r.pattern.focus = "C";
  r.pattern.cells.push_back({"C", color ? std::optional<Symbol>(Symbol(color)) : std::nullopt});
  r.rewrite = identity_rewrite(r.pattern);
  return r;
}

Tangle three_nodes() {
  State s;
  s.terms["t"] = hf::parse_value("{a}");
  return encode(s);  // criticals, {}, a, {a}
}

}  // namespace

TEST_CASE("matching basics") {
  Tangle g = three_nodes();
  CHECK(match_all(g, palette_for({})).empty());
  CHECK(match_all(g, palette_for({focus_only("any")})).size() == 1);
}

TEST_CASE("edge pattern against a single empty term") {
  State s;
  s.terms["t"] = hf::empty();
  Tangle g = encode(s);
  Rule r = focus_only("t");
  r.pattern.cells.push_back({"X", std::nullopt});
  r.pattern.edges.push_back({"C", Symbol("t"), "X"});
  r.rewrite = identity_rewrite(r.pattern);
  auto found = match_all(g, palette_for({r}));
  auto expected = testing::brute_force_bindings(g, r);
  REQUIRE(found.size() == 1);
  REQUIRE(expected.size() == 1);
  CHECK(found[0].binding == *expected.begin());
  CHECK(decode_node(g, found[0].binding[1]) == hf::empty());
}

TEST_CASE("maximality") {
  SUBCASE("single match survives") {
    auto out = maximality_filter({match_over(0, {1, 2})});
    CHECK(out.size() == 1);
  }
  SUBCASE("strict subset is blocked") {
    auto out = maximality_filter({match_over(0, {1, 2, 3}), match_over(1, {1, 2})});
    REQUIRE(out.size() == 1);
    CHECK(out[0].cellset == std::vector<NodeId>{1, 2, 3});
  }
  SUBCASE("incomparable overlaps both survive") {
    auto out = maximality_filter({match_over(0, {1, 2}), match_over(1, {2, 3})});
    CHECK(out.size() == 2);
  }
  SUBCASE("equal cellsets both survive") {
    auto out = maximality_filter({match_over(0, {1, 2}), match_over(1, {2, 1})});
    CHECK(out.size() == 2);
  }
}

TEST_CASE("select_match prefers rule order then smallest binding") {
  std::mt19937_64 rng(1);
  auto m = select_match({match_over(2, {1, 3}), match_over(1, {1, 4}), match_over(1, {1, 2})},
                        TieBreak::deterministic, rng);
  REQUIRE(m);
  CHECK(m->rule == 1);
  CHECK(m->binding == std::vector<NodeId>{1, 2});
  CHECK_FALSE(select_match({}, TieBreak::deterministic, rng));
}

TEST_CASE("apply: identity and recolor") {
  Tangle g = three_nodes();
  g.recolor(0, Symbol("white"));
  RuleSet rs = palette_for({focus_only("noop", "white")});
  auto ms = match_all(g, rs);
  REQUIRE(ms.size() == 1);
  std::string before = to_snapshot(g);
  apply(g, rs.rules[0], ms[0]);
  CHECK(to_snapshot(g) == before);

  Rule paint = focus_only("paint", "white");
  paint.rewrite.recolorings.push_back({"C", Symbol("black")});
  apply(g, paint, ms[0]);
  CHECK(g.node(0).color == Symbol("black"));
  for (NodeId i = 1; i < g.node_count(); ++i) CHECK(g.node(i).color != Symbol("black"));
  CHECK(g.edge_count() == parse_snapshot(before).edge_count());
}

TEST_CASE("apply: compiled pairing rule creates one node and three edges") {
  asml::Program p = asml::parse("atoms: a;\nfunctions: ;\ncritical: t, p;\ndo t := <t, p>\n");
  CompilationUnit cu = compile(p);
  const Rule* create = nullptr;
  for (const auto& r : cu.ruleset.rules) {
    if (r.name == "pairing:e0.create:1") create = &r;
  }
  REQUIRE(create);
  // Criticals, {} and {a}: t = {a}, p = {}.
  State s;
  s.terms = {{"t", hf::parse_value("{a}")}, {"p", hf::empty()}};
  Tangle g = encode(s);
  auto ms = Matcher(cu.ruleset).match_rule(g, static_cast<std::size_t>(create - cu.ruleset.rules.data()));
  REQUIRE(ms.size() == 1);
  std::size_t nodes = g.node_count(), edges = g.edge_count();
  auto created = apply(g, *create, ms[0]);
  CHECK(created.size() == 1);
  CHECK(g.node_count() == nodes + 1);
  CHECK(g.edge_count() == edges + 3);
  CHECK(decode_node(g, created[0]) == hf::pair(hf::parse_value("{a}"), hf::empty()));
}

TEST_CASE("apply rejects stale matches") {
  Tangle g = three_nodes();
  Rule r = focus_only("t");
  r.pattern.cells.push_back({"X", std::nullopt});
  r.pattern.edges.push_back({"C", Symbol("t"), "X"});
  r.rewrite = identity_rewrite(r.pattern);
  auto ms = match_all(g, palette_for({r}));
  REQUIRE(ms.size() == 1);
  g.remove_edge(0, Symbol("t"), ms[0].binding[1]);
  CHECK_THROWS_AS(apply(g, r, ms[0]), StaleMatch);
}

TEST_CASE("validate_ruleset") {
  asml::Program p = asml::parse("atoms: a;\nfunctions: ;\ncritical: t, p;\ndo t := <t, p>\n");
  CHECK(validate_ruleset(compile(p).ruleset).empty());

  auto has = [](const std::vector<std::string>& errs, const std::string& what) {
    return std::any_of(errs.begin(), errs.end(),
                       [&](const std::string& e) { return e.find(what) != std::string::npos; });
  };
  Rule loop = focus_only("loop", "crit");
  loop.pattern.cells.push_back({"X", std::nullopt});
  loop.pattern.edges.push_back({"C", Symbol("t"), "X"});
  loop.pattern.edges.push_back({"X", Symbol("t"), "C"});
  loop.rewrite = identity_rewrite(loop.pattern);
  CHECK(has(validate_ruleset(palette_for({loop})), "pattern loop"));

  Rule orphan = focus_only("orphan", "crit");
  orphan.pattern.cells.push_back({"X", std::nullopt});
  orphan.pattern.edges.push_back({"C", Symbol("t"), "X"});
  orphan.rewrite = identity_rewrite(orphan.pattern);
  orphan.rewrite.correspondence.pop_back();
  CHECK(has(validate_ruleset(palette_for({orphan})), "uncovered cell"));

  Rule far = focus_only("far", "crit");
  far.pattern.cells.push_back({"X", std::nullopt});
  far.pattern.cells.push_back({"Y", std::nullopt});
  far.pattern.cells.push_back({"Z", std::nullopt});
  far.pattern.edges.push_back({"C", Symbol("t"), "X"});
  far.pattern.edges.push_back({"X", Symbol("in"), "Y"});
  far.pattern.edges.push_back({"Y", Symbol("in"), "Z"});
  far.pattern.radius = 3;
  far.rewrite = identity_rewrite(far.pattern);
  CHECK(has(validate_ruleset(palette_for({far})), "radius"));

  Rule neg = focus_only("neg", "crit");
  neg.pattern.cells.push_back({"X", std::nullopt});
  neg.pattern.edges.push_back({"C", Symbol("t"), "X"});
  neg.negative_edges.push_back({"C", Symbol("p"), "X"});
  neg.rewrite = identity_rewrite(neg.pattern);
  CHECK(has(validate_ruleset(palette_for({neg})), "negative edges"));
}

TEST_CASE("pattern geometry") {
  Rule r = focus_only("g");
  r.pattern.cells.push_back({"X", std::nullopt});
  r.pattern.cells.push_back({"Y", std::nullopt});
  r.pattern.edges.push_back({"C", Symbol("t"), "X"});
  r.pattern.edges.push_back({"Y", Symbol("in"), "X"});
  CHECK(pattern_radius(r.pattern) == 2);
  CHECK_FALSE(pattern_has_cycle(r.pattern));
  r.pattern.cells.push_back({"Z", std::nullopt});
  CHECK(pattern_radius(r.pattern) == -1);
}

TEST_CASE("property: matcher agrees with brute-force embedding enumeration") {
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    auto c = testing::random_match_case(rng);
    Matcher m(c.rules);
    auto all = m.match_all(c.tangle);
    for (std::size_t r = 0; r < c.rules.rules.size(); ++r) {
      std::set<std::vector<NodeId>> got;
      for (const auto& x : all) {
        if (x.rule == r) got.insert(x.binding);
      }
      if (got != testing::brute_force_bindings(c.tangle, c.rules.rules[r])) ++mismatches;
    }
    // Maximality against the definition.
    std::vector<std::set<NodeId>> cellsets;
    for (const auto& x : all) cellsets.emplace(cellsets.end(), x.binding.begin(), x.binding.end());
    auto keep = testing::naive_maximal(cellsets);
    auto filtered = maximality_filter(all);
    std::multiset<std::vector<NodeId>> want, have;
    for (auto k : keep) want.insert(all[k].binding);
    for (const auto& x : filtered) have.insert(x.binding);
    if (want != have) ++mismatches;
  }
  CHECK(mismatches == 0);
}
