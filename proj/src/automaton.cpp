#include "dynca/automaton.hpp"

#include <sstream>

namespace dynca {

void StepStats::record(const Rule& r) {
  ++total;
  ++per_phase[r.phase()];
  ++per_rule[r.name];
}

std::string StepStats::to_text() const {
  std::ostringstream out;
  for (const auto& [phase, n] : per_phase) out << "phase " << phase << " " << n << "\n";
  out << "total " << total << "\n";
  return out.str();
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : "; ") + p;
  return s;
}

}  // namespace

InvariantViolation::InvariantViolation(std::uint64_t tick, std::vector<std::string> violations)
    : Error("invariant violation at tick " + std::to_string(tick) + ": " + join(violations)),
      tick_(tick),
      violations_(std::move(violations)) {}

Automaton::Automaton(RuleSet rules, EngineOptions options)
    : matcher_(std::move(rules)), options_(options) {}

std::optional<Match> Automaton::select(Configuration& cfg) const {
  auto all = matcher_.match_all(cfg.tangle);
  if (all.empty()) return std::nullopt;
  return select_match(maximality_filter(all), options_.mode, cfg.rng);
}

std::optional<Match> Automaton::step(Configuration& cfg) const {
  auto m = select(cfg);
  if (!m) return std::nullopt;
  std::size_t before = cfg.tangle.node_count();
  apply(cfg.tangle, matcher_, *m);
  ++cfg.tick;
  if (options_.check_invariants) {
    auto v = violations(cfg);
    if (cfg.tangle.node_count() < before) v.push_back("node count decreased");
    if (!v.empty()) throw InvariantViolation(cfg.tick, std::move(v));
  }
  return m;
}

std::vector<std::string> Automaton::violations(const Configuration& cfg) const {
  const Tangle& g = cfg.tangle;
  auto level = InvariantLevel::full;
  if (g.node_count() > 0 && rules().lock_colors.count(g.node(g.active()).color.str())) {
    level = InvariantLevel::structural;
  }
  return check_invariants(g, level);
}

RunResult Automaton::run(Configuration& cfg, const Hook& hook) const {
  RunResult result;
  while (true) {
    if (result.stats.total >= options_.max_ticks) {
      // Budget spent: only report exhaustion if there is more to do.
      if (!matcher_.match_all(cfg.tangle).empty()) result.outcome = RunOutcome::budget_exhausted;
      return result;
    }
    auto m = step(cfg);
    if (!m) return result;
    const Rule& r = rules().rules[m->rule];
    result.stats.record(r);
    if (hook) hook(cfg, r, *m);
  }
}

std::vector<TraceEntry> Automaton::trace(Configuration& cfg) const {
  std::vector<TraceEntry> out;
  run(cfg, [&](const Configuration& c, const Rule& r, const Match& m) {
    out.push_back({c.tick, r.name, m.binding, to_snapshot(c.tangle)});
  });
  return out;
}

}  // namespace dynca
