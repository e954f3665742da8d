#include "dynca/pattern.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

namespace dynca {

const PatternCell* Pattern::cell(const std::string& name) const {
  for (const auto& c : cells) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string Rule::phase() const { return name.substr(0, name.find(':')); }

Rewrite identity_rewrite(const Pattern& p) {
  Rewrite r;
  for (const auto& c : p.cells) r.correspondence.emplace_back(c.name, c.name);
  return r;
}

namespace {

constexpr NodeId kUnbound = UINT32_MAX;

std::map<std::string, int> cell_index(const Pattern& p) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < p.cells.size(); ++i) idx.emplace(p.cells[i].name, static_cast<int>(i));
  return idx;
}

std::vector<NodeId> sorted_cellset(const std::vector<NodeId>& binding) {
  std::vector<NodeId> s = binding;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Matcher

Matcher::Matcher(const RuleSet& rules) : rules_(rules) {
  std::unordered_map<Symbol, std::vector<std::size_t>> by_color;
  for (std::size_t r = 0; r < rules_.rules.size(); ++r) {
    const Pattern& p = rules_.rules[r].pattern;
    Compiled c;
    auto idx = cell_index(p);
    c.colors.resize(p.cells.size());
    for (std::size_t i = 0; i < p.cells.size(); ++i) c.colors[i] = p.cells[i].color;
    c.checks.resize(p.cells.size());
    auto focus = idx.find(p.focus);
    bool ok = focus != idx.end() && idx.size() == p.cells.size();
    for (const auto& e : p.edges) ok = ok && idx.count(e.src) && idx.count(e.dst);
    for (const auto& e : rules_.rules[r].negative_edges) ok = ok && idx.count(e.src) && idx.count(e.dst);
    if (!ok) {
      c.valid = false;
      compiled_.push_back(std::move(c));
      continue;
    }
    c.focus = focus->second;

    // Breadth-first binding order from the focus.
    std::vector<int> position(p.cells.size(), -1);
    position[c.focus] = 0;
    std::deque<int> queue{c.focus};
    int next = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const auto& e : p.edges) {
        int s = idx[e.src], d = idx[e.dst];
        if (s == u && position[d] < 0) {
          position[d] = next++;
          c.order.push_back({d, u, e.label, true});
          queue.push_back(d);
        } else if (d == u && position[s] < 0) {
          position[s] = next++;
          c.order.push_back({s, u, e.label, false});
          queue.push_back(s);
        }
      }
    }
    if (c.order.size() + 1 != p.cells.size()) c.valid = false;
    for (const auto& e : p.edges) {
      int s = idx[e.src], d = idx[e.dst];
      int later = position[s] > position[d] ? s : d;
      c.checks[later].emplace_back(s, e.label, d);
    }
    for (const auto& e : rules_.rules[r].negative_edges) {
      c.negatives.emplace_back(idx[e.src], e.label, idx[e.dst]);
    }
    if (p.cells[c.focus].color) {
      by_color[*p.cells[c.focus].color].push_back(r);
    } else {
      wildcard_focus_.push_back(r);
    }
    compiled_.push_back(std::move(c));
  }
  for (auto& [color, list] : by_color) by_focus_color_.emplace_back(color, std::move(list));
  std::sort(by_focus_color_.begin(), by_focus_color_.end(),
            [](const auto& a, const auto& b) { return a.first.id() < b.first.id(); });
}

void Matcher::search(const Tangle& g, std::size_t rule, const Compiled& c, std::size_t depth,
                     std::vector<NodeId>& binding, std::vector<Match>& out) const {
  if (depth == c.order.size()) {
    for (const auto& [s, label, d] : c.negatives) {
      if (g.has_edge(binding[s], label, binding[d])) return;
    }
    out.push_back({rule, binding, sorted_cellset(binding)});
    return;
  }
  const Step& step = c.order[depth];
  const Node& anchor = g.node(binding[step.anchor]);
  const auto& adjacency = step.outgoing ? anchor.out : anchor.in;
  for (const auto& he : adjacency) {
    if (he.label != step.label) continue;
    NodeId cand = he.node;
    if (std::find(binding.begin(), binding.end(), cand) != binding.end()) continue;
    const auto& want = c.colors[step.cell];
    if (want && g.node(cand).color != *want) continue;
    binding[step.cell] = cand;
    bool ok = true;
    for (const auto& [s, label, d] : c.checks[step.cell]) {
      if (!g.has_edge(binding[s], label, binding[d])) {
        ok = false;
        break;
      }
    }
    if (ok) search(g, rule, c, depth + 1, binding, out);
    binding[step.cell] = kUnbound;
  }
}

std::vector<Match> Matcher::match_rule(const Tangle& g, std::size_t rule) const {
  std::vector<Match> out;
  const Compiled& c = compiled_.at(rule);
  if (!c.valid || g.node_count() == 0) return out;
  NodeId active = g.active();
  const auto& want = c.colors[c.focus];
  if (want && g.node(active).color != *want) return out;
  std::vector<NodeId> binding(c.colors.size(), kUnbound);
  binding[c.focus] = active;
  for (const auto& [s, label, d] : c.checks[c.focus]) {
    if (!g.has_edge(binding[s], label, binding[d])) return out;
  }
  search(g, rule, c, 0, binding, out);
  std::sort(out.begin(), out.end(),
            [](const Match& a, const Match& b) { return a.binding < b.binding; });
  return out;
}

std::vector<Match> Matcher::match_all(const Tangle& g) const {
  std::vector<Match> out;
  if (g.node_count() == 0) return out;
  Symbol color = g.node(g.active()).color;
  std::vector<std::size_t> candidates = wildcard_focus_;
  auto it = std::lower_bound(by_focus_color_.begin(), by_focus_color_.end(), color.id(),
                             [](const auto& entry, std::uint32_t id) { return entry.first.id() < id; });
  if (it != by_focus_color_.end() && it->first == color) {
    candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  for (std::size_t r : candidates) {
    auto ms = match_rule(g, r);
    out.insert(out.end(), std::make_move_iterator(ms.begin()), std::make_move_iterator(ms.end()));
  }
  return out;
}

bool Matcher::still_valid(const Tangle& g, const Match& m) const {
  const Compiled& c = compiled_.at(m.rule);
  if (!c.valid || m.binding.size() != c.colors.size()) return false;
  if (m.binding[c.focus] != g.active()) return false;
  for (std::size_t i = 0; i < m.binding.size(); ++i) {
    if (m.binding[i] >= g.node_count()) return false;
    if (c.colors[i] && g.node(m.binding[i]).color != *c.colors[i]) return false;
  }
  auto s = sorted_cellset(m.binding);
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
  for (const auto& checks : c.checks) {
    for (const auto& [a, label, b] : checks) {
      if (!g.has_edge(m.binding[a], label, m.binding[b])) return false;
    }
  }
  for (const auto& [a, label, b] : c.negatives) {
    if (g.has_edge(m.binding[a], label, m.binding[b])) return false;
  }
  return true;
}

std::vector<Match> match_all(const Tangle& g, const RuleSet& rules) {
  return Matcher(rules).match_all(g);
}

// ---------------------------------------------------------------------------
// Precedence

std::vector<Match> maximality_filter(const std::vector<Match>& matches) {
  std::vector<std::size_t> by_size(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) by_size[i] = i;
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    return matches[a].cellset.size() < matches[b].cellset.size();
  });
  std::vector<bool> blocked(matches.size(), false);
  for (std::size_t i = 0; i < by_size.size(); ++i) {
    const auto& small = matches[by_size[i]].cellset;
    for (std::size_t j = by_size.size(); j-- > i + 1;) {
      const auto& big = matches[by_size[j]].cellset;
      if (big.size() <= small.size()) break;
      if (std::includes(big.begin(), big.end(), small.begin(), small.end())) {
        blocked[by_size[i]] = true;
        break;
      }
    }
  }
  std::vector<Match> out;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (!blocked[i]) out.push_back(matches[i]);
  }
  return out;
}

std::optional<Match> select_match(const std::vector<Match>& maximal, TieBreak mode,
                                  std::mt19937_64& rng) {
  if (maximal.empty()) return std::nullopt;
  std::size_t best_rule = maximal.front().rule;
  for (const auto& m : maximal) best_rule = std::min(best_rule, m.rule);
  std::vector<const Match*> tied;
  for (const auto& m : maximal) {
    if (m.rule == best_rule) tied.push_back(&m);
  }
  if (mode == TieBreak::deterministic) {
    return **std::min_element(tied.begin(), tied.end(), [](const Match* a, const Match* b) {
      return a->binding < b->binding;
    });
  }
  std::sort(tied.begin(), tied.end(),
            [](const Match* a, const Match* b) { return a->binding < b->binding; });
  return *tied[hf::pick_index(rng, tied.size())];
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

bool embeds(const Tangle& g, const Rule& rule, const Match& m) {
  const Pattern& p = rule.pattern;
  if (m.binding.size() != p.cells.size()) return false;
  auto idx = cell_index(p);
  auto s = sorted_cellset(m.binding);
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    if (m.binding[i] >= g.node_count()) return false;
    if (p.cells[i].color && g.node(m.binding[i]).color != *p.cells[i].color) return false;
  }
  auto fit = idx.find(p.focus);
  if (fit == idx.end() || m.binding[fit->second] != g.active()) return false;
  for (const auto& e : p.edges) {
    if (!g.has_edge(m.binding[idx.at(e.src)], e.label, m.binding[idx.at(e.dst)])) return false;
  }
  for (const auto& e : rule.negative_edges) {
    if (g.has_edge(m.binding[idx.at(e.src)], e.label, m.binding[idx.at(e.dst)])) return false;
  }
  return true;
}

std::vector<NodeId> rewrite(Tangle& g, const Rule& rule, const Match& m) {
  if (!rule.rewrite.deletions.empty()) throw Error("rule " + rule.name + " deletes nodes");
  auto idx = cell_index(rule.pattern);
  std::map<std::string, NodeId> right;
  for (const auto& [r, l] : rule.rewrite.correspondence) right[r] = m.binding.at(idx.at(l));
  std::vector<NodeId> created;
  for (const auto& c : rule.rewrite.creations) {
    NodeId id = g.add_node(c.color);
    right[c.name] = id;
    created.push_back(id);
  }
  auto node = [&](const std::string& name) {
    auto it = right.find(name);
    if (it == right.end()) throw Error("rule " + rule.name + " names unknown cell " + name);
    return it->second;
  };
  for (const auto& rc : rule.rewrite.recolorings) g.recolor(node(rc.cell), rc.color);
  for (const auto& e : rule.rewrite.removals) g.remove_edge(node(e.src), e.label, node(e.dst));
  for (const auto& e : rule.rewrite.additions) g.add_edge(node(e.src), e.label, node(e.dst));
  return created;
}

}  // namespace

std::vector<NodeId> apply(Tangle& g, const Rule& rule, const Match& m) {
  if (!embeds(g, rule, m)) throw StaleMatch("stale match for rule " + rule.name);
  return rewrite(g, rule, m);
}

std::vector<NodeId> apply(Tangle& g, const Matcher& matcher, const Match& m) {
  const Rule& rule = matcher.rules().rules.at(m.rule);
  if (!matcher.still_valid(g, m)) throw StaleMatch("stale match for rule " + rule.name);
  return rewrite(g, rule, m);
}

// ---------------------------------------------------------------------------
// Validation

int pattern_radius(const Pattern& p) {
  auto idx = cell_index(p);
  auto f = idx.find(p.focus);
  if (f == idx.end()) return -1;
  std::vector<int> dist(p.cells.size(), -1);
  dist[f->second] = 0;
  std::deque<int> q{f->second};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (const auto& e : p.edges) {
      auto s = idx.find(e.src), d = idx.find(e.dst);
      if (s == idx.end() || d == idx.end()) continue;
      int other = -1;
      if (s->second == u) other = d->second;
      else if (d->second == u) other = s->second;
      if (other >= 0 && dist[other] < 0) {
        dist[other] = dist[u] + 1;
        q.push_back(other);
      }
    }
  }
  int r = 0;
  for (int d : dist) {
    if (d < 0) return -1;
    r = std::max(r, d);
  }
  return r;
}

bool pattern_has_cycle(const Pattern& p) {
  auto idx = cell_index(p);
  std::vector<int> indeg(p.cells.size(), 0);
  std::vector<std::vector<int>> adj(p.cells.size());
  for (const auto& e : p.edges) {
    auto s = idx.find(e.src), d = idx.find(e.dst);
    if (s == idx.end() || d == idx.end()) continue;
    if (s->second == d->second) return true;
    adj[s->second].push_back(d->second);
    ++indeg[d->second];
  }
  std::vector<int> ready;
  for (std::size_t i = 0; i < indeg.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++seen;
    for (int v : adj[u]) {
      if (--indeg[v] == 0) ready.push_back(v);
    }
  }
  return seen != p.cells.size();
}

std::vector<std::string> validate_ruleset(const RuleSet& rules) {
  std::vector<std::string> out;
  auto report = [&](const Rule& r, const std::string& what) {
    out.push_back(what + " in rule " + r.name);
  };
  std::set<std::string> names;
  for (const auto& rule : rules.rules) {
    const Pattern& p = rule.pattern;
    if (!names.insert(rule.name).second) report(rule, "duplicate rule name");
    auto idx = cell_index(p);
    if (idx.size() != p.cells.size()) report(rule, "duplicate cell name");
    if (!idx.count(p.focus)) report(rule, "missing focus");
    for (const auto& c : p.cells) {
      if (c.color && !rules.palette.count(c.color->str())) {
        report(rule, "unknown color " + c.color->str());
      }
    }
    auto check_edge = [&](const PatternEdge& e, const char* what) {
      if (!idx.count(e.src) || !idx.count(e.dst)) report(rule, std::string(what) + " names an unknown cell");
      if (!rules.labels.count(e.label.str())) report(rule, "unknown label " + e.label.str());
    };
    for (const auto& e : p.edges) check_edge(e, "pattern edge");
    for (const auto& e : rule.negative_edges) check_edge(e, "negative edge");
    if (!rule.negative_edges.empty() && !rules.negative_edges) {
      report(rule, "negative edges disabled");
    }
    int r = pattern_radius(p);
    if (r < 0) report(rule, "disconnected cell");
    else if (r > p.radius) report(rule, "radius exceeded");
    if (p.radius > rules.radius_bound) report(rule, "radius bound exceeded");
    if (pattern_has_cycle(p)) report(rule, "pattern loop");

    const Rewrite& w = rule.rewrite;
    if (!w.deletions.empty()) report(rule, "node deletion");
    std::map<std::string, std::string> right;
    for (const auto& [rn, ln] : w.correspondence) {
      if (!idx.count(ln)) report(rule, "correspondence to unknown cell " + ln);
      if (!right.emplace(rn, ln).second) report(rule, "duplicate right cell " + rn);
    }
    for (const auto& c : w.creations) {
      if (!right.emplace(c.name, std::string{}).second) report(rule, "duplicate right cell " + c.name);
      if (!rules.palette.count(c.color.str())) report(rule, "unknown color " + c.color.str());
    }
    // Cells never die: every matched cell must survive into the right side.
    for (const auto& c : p.cells) {
      bool kept = std::any_of(w.correspondence.begin(), w.correspondence.end(),
                              [&](const auto& rl) { return rl.second == c.name; });
      if (!kept) report(rule, "uncovered cell " + c.name);
    }
    auto covered = [&](const std::string& name) {
      if (!right.count(name)) report(rule, "uncovered cell " + name);
    };
    for (const auto& rc : w.recolorings) {
      covered(rc.cell);
      if (!rules.palette.count(rc.color.str())) report(rule, "unknown color " + rc.color.str());
    }
    for (const auto& e : w.additions) {
      covered(e.src);
      covered(e.dst);
      if (!rules.labels.count(e.label.str())) report(rule, "unknown label " + e.label.str());
    }
    for (const auto& e : w.removals) {
      covered(e.src);
      covered(e.dst);
      auto s = right.find(e.src), d = right.find(e.dst);
      if (s == right.end() || d == right.end()) continue;
      bool matched = std::any_of(p.edges.begin(), p.edges.end(), [&](const PatternEdge& pe) {
        return pe.src == s->second && pe.dst == d->second && pe.label == e.label;
      });
      if (!matched) report(rule, "removal of unmatched edge");
    }
  }
  return out;
}

}  // namespace dynca
