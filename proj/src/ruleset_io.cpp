#include "dynca/ruleset_io.hpp"

#include <sstream>
#include <vector>

namespace dynca {

namespace {

void write_edge(std::ostringstream& out, const char* kw, const PatternEdge& e) {
  out << "  " << kw << " " << e.src << " " << e.label.str() << " " << e.dst << "\n";
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace

std::string serialize_ruleset(const RuleSet& rules) {
  std::ostringstream out;
  out << "ruleset v1\n";
  out << "radius " << rules.radius_bound << "\n";
  out << "negative-edges " << (rules.negative_edges ? "on" : "off") << "\n";
  out << "palette";
  for (const auto& c : rules.palette) out << " " << c;
  out << "\nlabels";
  for (const auto& l : rules.labels) out << " " << l;
  out << "\nlock";
  for (const auto& c : rules.lock_colors) out << " " << c;
  out << "\n";
  for (const auto& r : rules.rules) {
    out << "rule " << r.name << "\n";
    for (const auto& c : r.pattern.cells) {
      out << "  cell " << c.name << " " << (c.color ? c.color->str() : "*") << "\n";
    }
    out << "  focus " << r.pattern.focus << "\n";
    out << "  radius " << r.pattern.radius << "\n";
    for (const auto& e : r.pattern.edges) write_edge(out, "edge", e);
    for (const auto& e : r.negative_edges) write_edge(out, "neg", e);
    for (const auto& [right, left] : r.rewrite.correspondence) {
      out << "  corr " << right << " " << left << "\n";
    }
    for (const auto& c : r.rewrite.creations) out << "  create " << c.name << " " << c.color.str() << "\n";
    for (const auto& c : r.rewrite.recolorings) out << "  recolor " << c.cell << " " << c.color.str() << "\n";
    for (const auto& e : r.rewrite.removals) write_edge(out, "remove", e);
    for (const auto& e : r.rewrite.additions) write_edge(out, "add", e);
    for (const auto& d : r.rewrite.deletions) out << "  delete " << d << "\n";
    out << "end\n";
  }
  return out.str();
}

RuleSet parse_ruleset(std::string_view text) {
  RuleSet rs;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  Rule* rule = nullptr;
  auto fail = [&](const std::string& msg) { throw ParseError(msg, lineno, 1); };
  auto need = [&](const std::vector<std::string>& t, std::size_t n) {
    if (t.size() != n) fail("expected " + std::to_string(n - 1) + " operands after '" + t[0] + "'");
  };
  auto edge = [&](const std::vector<std::string>& t) {
    need(t, 4);
    return PatternEdge{t[1], Symbol(t[2]), t[3]};
  };
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) fail("malformed number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + s + "'");
    }
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto t = tokens(line);
    if (t.empty() || t[0][0] == '#') continue;
    const std::string& kw = t[0];
    if (!header) {
      if (t.size() != 2 || kw != "ruleset" || t[1] != "v1") fail("expected 'ruleset v1'");
      header = true;
      continue;
    }
    if (!rule) {
      if (kw == "radius") {
        need(t, 2);
        rs.radius_bound = number(t[1]);
      } else if (kw == "negative-edges") {
        need(t, 2);
        if (t[1] != "on" && t[1] != "off") fail("expected on or off");
        rs.negative_edges = t[1] == "on";
      } else if (kw == "palette") {
        rs.palette.insert(t.begin() + 1, t.end());
      } else if (kw == "labels") {
        rs.labels.insert(t.begin() + 1, t.end());
      } else if (kw == "lock") {
        rs.lock_colors.insert(t.begin() + 1, t.end());
      } else if (kw == "rule") {
        need(t, 2);
        rs.rules.emplace_back();
        rule = &rs.rules.back();
        rule->name = t[1];
      } else {
        fail("unexpected '" + kw + "'");
      }
      continue;
    }
    if (kw == "cell") {
      need(t, 3);
      std::optional<Symbol> color;
      if (t[2] != "*") color = Symbol(t[2]);
      rule->pattern.cells.push_back({t[1], color});
    } else if (kw == "focus") {
      need(t, 2);
      rule->pattern.focus = t[1];
    } else if (kw == "radius") {
      need(t, 2);
      rule->pattern.radius = number(t[1]);
    } else if (kw == "edge") {
      rule->pattern.edges.push_back(edge(t));
    } else if (kw == "neg") {
      rule->negative_edges.push_back(edge(t));
    } else if (kw == "corr") {
      need(t, 3);
      rule->rewrite.correspondence.emplace_back(t[1], t[2]);
    } else if (kw == "create") {
      need(t, 3);
      rule->rewrite.creations.push_back({t[1], Symbol(t[2])});
    } else if (kw == "recolor") {
      need(t, 3);
      rule->rewrite.recolorings.push_back({t[1], Symbol(t[2])});
    } else if (kw == "remove") {
      rule->rewrite.removals.push_back(edge(t));
    } else if (kw == "add") {
      rule->rewrite.additions.push_back(edge(t));
    } else if (kw == "delete") {
      need(t, 2);
      rule->rewrite.deletions.push_back(t[1]);
    } else if (kw == "end") {
      need(t, 1);
      rule = nullptr;
    } else {
      fail("unexpected '" + kw + "' inside rule " + rule->name);
    }
  }
  if (!header) throw ParseError("empty rule set file", lineno, 1);
  if (rule) throw ParseError("rule " + rule->name + " is missing 'end'", lineno, 1);
  return rs;
}

}  // namespace dynca
