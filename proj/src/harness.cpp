#include "dynca/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dynca {

// ---------------------------------------------------------------------------
// Simulation

Outcome compiled_outcome(const Tangle& g) {
  auto crit = g.criticals();
  if (!crit) return Outcome::error;
  const std::string& c = g.node(*crit).color.str();
  if (c == pc::error) return Outcome::error;
  if (c == pc::clash) return Outcome::inconsistent;
  if (c == pc::halt) return Outcome::terminal;
  return Outcome::error;
}

namespace {

int cell_index(const Rule& r, const std::string& name) {
  for (std::size_t i = 0; i < r.pattern.cells.size(); ++i) {
    if (r.pattern.cells[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool is_pick(const Rule& r) {
  return r.name.rfind("choice:", 0) == 0 && r.name.find(".pick") != std::string::npos;
}

}  // namespace

SimRun simulate(const CompilationUnit& cu, const State& s0, const SimOptions& opts,
                const Automaton::Hook& hook) {
  SimRun run;
  EngineOptions eo;
  eo.mode = opts.mode;
  eo.max_ticks = opts.max_ticks;
  eo.check_invariants = opts.check_invariants;
  Automaton automaton(cu.ruleset, eo);
  Configuration cfg(encode(complete_state(cu.program, s0)), opts.seed);
  RunResult rr;
  try {
    rr = automaton.run(cfg, [&](const Configuration& c, const Rule& r, const Match& m) {
      if (is_pick(r)) run.choices.push_back(decode_node(c.tangle, m.binding[cell_index(r, "X")]));
      if (r.name == cu.end_rule) ++run.steps;
      if (hook) hook(c, r, m);
    });
    run.stats = rr.stats;
  } catch (const InvariantViolation& e) {
    run.outcome = Outcome::error;
    run.message = e.what();
    run.final = cfg.tangle;
    return run;
  }
  run.final = cfg.tangle;
  run.outcome = rr.outcome == RunOutcome::budget_exhausted ? Outcome::budget_exhausted
                                                           : compiled_outcome(cfg.tangle);
  try {
    run.state = decode(cfg.tangle);
  } catch (const MalformedTangle& e) {
    if (run.outcome != Outcome::budget_exhausted) {
      run.outcome = Outcome::error;
      run.message = std::string("undecodable final tangle: ") + e.what();
    }
  }
  return run;
}

DiffResult difftest(const CompilationUnit& cu, const State& s0, const SimOptions& opts,
                    std::uint64_t max_steps) {
  DiffResult d;
  State start = complete_state(cu.program, s0);
  d.sim = simulate(cu, start, opts);
  if (!d.sim.message.empty() && d.sim.message.rfind("invariant", 0) == 0) {
    d.detail = d.sim.message;
    return d;
  }
  Interpreter interp(cu.program);
  ScriptedChoice script(d.sim.choices);
  try {
    d.interp = interp.run(start, script, max_steps);
  } catch (const Error& e) {
    d.detail = std::string("interpreter replay failed: ") + e.what();
    return d;
  }
  std::ostringstream why;
  if (d.interp.outcome != d.sim.outcome) {
    why << "outcome: interpreter " << outcome_name(d.interp.outcome) << ", automaton "
        << outcome_name(d.sim.outcome) << (d.sim.message.empty() ? "" : " (" + d.sim.message + ")");
  } else if (d.interp.outcome != Outcome::budget_exhausted) {
    if (d.interp.state != d.sim.state) {
      why << "final states differ\n--- interpreter\n"
          << format_state(d.interp.state) << "--- automaton\n"
          << format_state(d.sim.state);
    } else if (d.interp.steps != d.sim.steps) {
      why << "steps: interpreter " << d.interp.steps << ", automaton " << d.sim.steps;
    } else if (d.interp.outcome == Outcome::terminal && script.used() != script.size()) {
      why << "interpreter used " << script.used() << " of " << script.size() << " choices";
    }
  }
  d.detail = why.str();
  d.agree = d.detail.empty();
  return d;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  std::vector<CorpusEntry> out;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (f.path().extension() != ".asml") continue;
    auto state_path = f.path();
    state_path.replace_extension(".state");
    if (!std::filesystem::exists(state_path)) continue;
    auto read = [](const std::filesystem::path& p) {
      std::ifstream in(p);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    CorpusEntry e;
    e.name = f.path().stem().string();
    e.source = read(f.path());
    e.program = asml::parse(e.source);
    e.state = parse_state(read(state_path), e.program.atoms);
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.name < b.name; });
  return out;
}

// ---------------------------------------------------------------------------
// Random programs

hf::Value random_value(std::mt19937_64& rng, const std::vector<std::string>& atoms, int depth,
                       int width) {
  auto pick = [&](std::size_t n) { return hf::pick_index(rng, n); };
  if (depth <= 0) {
    return atoms.empty() ? hf::empty() : hf::Value::atom(atoms[pick(atoms.size())]);
  }
  std::size_t roll = pick(10);
  if (roll < 2 && !atoms.empty()) return hf::Value::atom(atoms[pick(atoms.size())]);
  if (roll < 3) {
    return hf::pair(random_value(rng, atoms, depth - 1, width),
                    random_value(rng, atoms, depth - 1, width));
  }
  std::vector<hf::Value> ms;
  std::size_t n = pick(static_cast<std::size_t>(width) + 1);
  for (std::size_t i = 0; i < n; ++i) ms.push_back(random_value(rng, atoms, depth - 1, width));
  return hf::Value::set(std::move(ms));
}

namespace {

using namespace asml;

class Generator {
 public:
  Generator(std::mt19937_64& rng, const GeneratorOptions& o) : rng_(rng), opts_(o) {}

  GeneratedCase run() {
    static const char* const names[] = {"a", "b", "c", "d", "e", "f0", "g0", "h0"};
    int n_atoms = 1 + static_cast<int>(pick(static_cast<std::size_t>(opts_.max_atoms)));
    for (int i = 0; i < n_atoms && i < 8; ++i) prog_.atoms.push_back(names[i]);
    prog_.criticals = {"k", "m"};
    for (int i = 0; i < opts_.data_terms; ++i) {
      data_.push_back("v" + std::to_string(i));
      prog_.criticals.push_back(data_.back());
    }
    prog_.functions = {{"f", 1}, {"g", 2}};

    budget_ = 1 + static_cast<int>(pick(static_cast<std::size_t>(opts_.max_statements)));
    std::vector<StmtPtr> branches{assign(name_term("k"), singleton_term(name_term("k")))};
    while (budget_ > 0) branches.push_back(stmt(2));
    prog_.body = if_then(compare(CondKind::neq, name_term("k"), name_term("m")), par(branches));

    GeneratedCase out;
    int steps = 1 + static_cast<int>(pick(static_cast<std::size_t>(opts_.max_depth)));
    hf::Value m = hf::empty();
    for (int i = 0; i < steps; ++i) m = hf::singleton(m);
    out.state.terms["k"] = hf::empty();
    out.state.terms["m"] = m;
    for (const auto& v : data_) out.state.terms[v] = top_set();
    int locs = static_cast<int>(pick(3));
    for (int i = 0; i < locs; ++i) {
      out.state.locations[{"f", {element_value()}}] = top_set();
    }
    if (pick(2)) out.state.locations[{"g", {element_value(), element_value()}}] = top_set();
    out.program = std::move(prog_);
    out.state = out.state.normalized();
    return out;
  }

 private:
  std::size_t pick(std::size_t n) { return hf::pick_index(rng_, n); }

  hf::Value top_set() {
    std::vector<hf::Value> ms;
    std::size_t n = pick(4);
    for (std::size_t i = 0; i < n; ++i) ms.push_back(random_value(rng_, prog_.atoms, 2, 2));
    return hf::Value::set(std::move(ms));
  }

  hf::Value element_value() {
    // Mostly reuse values the data terms are likely to hold.
    return random_value(rng_, prog_.atoms, static_cast<int>(pick(2)), 2);
  }

  // ----- terms --------------------------------------------------------------

  std::vector<std::string> set_vars() const {
    std::vector<std::string> out = data_;
    for (const auto& [v, is_set] : scope_) {
      if (is_set) out.push_back(v);
    }
    return out;
  }

  TermPtr set_term(int depth) {
    auto vars = set_vars();
    std::size_t roll = depth <= 0 ? pick(2) : pick(9);
    if (roll == 0) return name_term(vars[pick(vars.size())]);
    if (roll == 1) return pick(3) == 0 ? empty_term() : name_term(vars[pick(vars.size())]);
    if (roll <= 3) return singleton_term(element(depth - 1));
    if (roll <= 5) return union_term(set_term(depth - 1), set_term(depth - 1));
    if (roll <= 6) return apply_term("f", {element(depth - 1)});
    if (roll <= 7) return apply_term("g", {element(depth - 1), element(depth - 1)});
    return name_term(vars[pick(vars.size())]);
  }

  TermPtr element(int depth) {
    std::vector<std::string> elems;
    for (const auto& [v, is_set] : scope_) {
      if (!is_set) elems.push_back(v);
    }
    std::size_t roll = pick(6);
    if (roll == 0 && !elems.empty()) return name_term(elems[pick(elems.size())]);
    if (roll == 1 && depth > 0) return pair_term(element(depth - 1), element(depth - 1));
    return set_term(depth);
  }

  CondPtr cond(int depth) {
    std::size_t roll = depth <= 0 ? pick(3) : pick(6);
    switch (roll) {
      case 0: return compare(CondKind::member, element(1), set_term(1));
      case 1: return compare(CondKind::eq, element(1), element(1));
      case 2: return compare(CondKind::neq, element(1), element(1));
      case 3: return negate(cond(depth - 1));
      case 4: return conj(cond(depth - 1), cond(depth - 1));
      default: return disj(cond(depth - 1), cond(depth - 1));
    }
  }

  // ----- statements ---------------------------------------------------------

  std::string fresh_var() { return "x" + std::to_string(vars_++); }

  StmtPtr assignment() {
    std::vector<std::string> free;
    for (const auto& v : data_) {
      if (!assigned_.count(v)) free.push_back(v);
    }
    if (!free.empty() && pick(4) != 0) {
      std::string v = free[pick(free.size())];
      assigned_.insert(v);
      return assign(name_term(v), set_term(2));
    }
    if (function_assignments_ < 2) {
      ++function_assignments_;
      if (pick(2)) return assign(apply_term("f", {element(1)}), set_term(1));
      return assign(apply_term("g", {element(1), element(1)}), set_term(1));
    }
    return skip();
  }

  StmtPtr stmt(int depth) {
    --budget_;
    std::size_t roll = depth <= 0 || budget_ <= 0 ? 0 : pick(10);
    if (roll <= 3) return assignment();
    if (roll <= 5) {
      CondPtr c = cond(1);
      StmtPtr then = stmt(depth - 1);
      StmtPtr otherwise = pick(2) && budget_ > 0 ? stmt(depth - 1) : nullptr;
      return if_then(c, then, otherwise);
    }
    if (roll == 6) {
      std::string x = fresh_var();
      TermPtr t = set_term(2);
      scope_.emplace_back(x, true);
      StmtPtr body = stmt(depth - 1);
      scope_.pop_back();
      return let(x, t, body);
    }
    if (roll == 7) {
      std::string x = fresh_var();
      TermPtr s = set_term(1);
      scope_.emplace_back(x, false);
      StmtPtr body = stmt(depth - 1);
      scope_.pop_back();
      return if_then(compare(CondKind::neq, s, empty_term()), let_choose(x, s, body));
    }
    std::vector<StmtPtr> branches;
    int n = 2 + static_cast<int>(pick(2));
    for (int i = 0; i < n && budget_ > 0; ++i) branches.push_back(stmt(depth - 1));
    if (branches.empty()) return skip();
    return par(branches);
  }

  std::mt19937_64& rng_;
  GeneratorOptions opts_;
  Program prog_;
  std::vector<std::string> data_;
  std::vector<std::pair<std::string, bool>> scope_;
  std::set<std::string> assigned_;
  int budget_ = 0;
  int vars_ = 0;
  int function_assignments_ = 0;
};

}  // namespace

GeneratedCase generate_case(std::mt19937_64& rng, const GeneratorOptions& opts) {
  return Generator(rng, opts).run();
}

// ---------------------------------------------------------------------------
// Benchmarks

std::string bench_name(BenchOp op) {
  switch (op) {
    case BenchOp::pair: return "pair";
    case BenchOp::choice: return "choice";
    case BenchOp::cond: return "cond";
    case BenchOp::singleton: return "singleton";
    case BenchOp::union_: return "union";
  }
  return "";
}

std::optional<BenchOp> parse_bench_op(const std::string& s) {
  for (auto op : {BenchOp::pair, BenchOp::choice, BenchOp::cond, BenchOp::singleton, BenchOp::union_}) {
    if (bench_name(op) == s) return op;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> atom_names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

hf::Value atom_set(const std::vector<std::string>& names) {
  std::vector<hf::Value> ms;
  for (const auto& n : names) ms.push_back(hf::Value::atom(n));
  return hf::Value::set(std::move(ms));
}

std::string atom_decl(const std::vector<std::string>& a, const std::vector<std::string>& b = {}) {
  std::string s = "atoms: ";
  bool first = true;
  for (const auto* list : {&a, &b}) {
    for (const auto& x : *list) {
      s += (first ? "" : ", ") + x;
      first = false;
    }
  }
  return s + ";\n";
}

}  // namespace

GeneratedCase bench_case(BenchOp op, int size) {
  // One-shot programs: the flag f turns from {} into a pair after the
  // first step, so every run is exactly one ASM step.
  GeneratedCase c;
  auto xs = atom_names("x", size);
  auto ys = atom_names("y", size);
  std::string src;
  switch (op) {
    case BenchOp::pair:
      src = atom_decl(xs, ys) + "functions: ;\ncritical: f, t, p;\n"
            "do if f = {} then par { t := <t, p> ; f := <f, f> }\n";
      c.state.terms = {{"t", atom_set(xs)}, {"p", atom_set(ys)}};
      break;
    case BenchOp::choice:
      src = atom_decl(xs, ys) + "functions: ;\ncritical: f, t, p;\n"
            "do if f = {} then let x = choose(t) in par { p := <x, p> ; f := <f, f> }\n";
      c.state.terms = {{"t", atom_set(xs)}, {"p", atom_set(ys)}};
      break;
    case BenchOp::cond:
      src = atom_decl(xs, ys) + "functions: g/2;\ncritical: f, t, p;\n"
            "do if f = {} then par { if t != p then t := g(t, p) ; f := <f, f> }\n";
      c.state.terms = {{"t", atom_set(xs)}, {"p", atom_set(ys)}};
      break;
    case BenchOp::singleton: {
      // t = a lies in `size` two-element sets and no singleton holds it.
      src = atom_decl({"a"}, ys) + "functions: ;\ncritical: f, t, p, w;\n"
            "do if f = {} then par { p := {t} ; f := <f, f> }\n";
      std::vector<hf::Value> parents;
      for (const auto& y : ys) parents.push_back(atom_set({"a", y}));
      c.state.terms = {{"t", hf::Value::atom("a")}, {"w", hf::Value::set(parents)}};
      break;
    }
    case BenchOp::union_: {
      // Disjoint s and p plus `size` near misses s U p minus one element
      // of p: each is a candidate that fails only after a full scan.
      src = atom_decl(xs, ys) + "functions: ;\ncritical: f, s, p, u, h;\n"
            "do if f = {} then par { u := s U p ; f := <f, f> }\n";
      std::vector<hf::Value> misses;
      for (int i = 0; i < size; ++i) {
        std::vector<std::string> names = xs;
        for (int j = 0; j < size; ++j) {
          if (j != i) names.push_back(ys[j]);
        }
        misses.push_back(atom_set(names));
      }
      c.state.terms = {{"s", atom_set(xs)}, {"p", atom_set(ys)}, {"h", hf::Value::set(misses)}};
      break;
    }
  }
  c.program = asml::parse(src);
  c.state = complete_state(c.program, c.state);
  return c;
}

std::uint64_t bench_ticks(BenchOp op, int size, bool negative_edges) {
  GeneratedCase c = bench_case(op, size);
  CompileOptions co;
  co.negative_edges = negative_edges;
  CompilationUnit cu = compile(c.program, co);
  SimRun r = simulate(cu, c.state, {});
  if (r.outcome != Outcome::terminal) {
    throw Error("benchmark " + bench_name(op) + " did not terminate: " + r.message);
  }
  auto phase = [&](const char* p) {
    auto it = r.stats.per_phase.find(p);
    return it == r.stats.per_phase.end() ? std::uint64_t{0} : it->second;
  };
  switch (op) {
    case BenchOp::singleton: return phase("singleton");
    case BenchOp::union_: return phase("union-check") + phase("union-build");
    default: return r.stats.total;
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double den = n * sxx - sx * sx;
  return den == 0 ? 0.0 : (n * sxy - sx * sy) / den;
}

BenchReport run_bench(BenchOp op, const std::vector<int>& sizes, bool negative_edges) {
  BenchReport r;
  r.op = op;
  r.negative_edges = negative_edges;
  std::vector<double> xs, ys;
  for (int s : sizes) {
    std::uint64_t t = bench_ticks(op, s, negative_edges);
    r.points.push_back({s, t});
    xs.push_back(s);
    ys.push_back(static_cast<double>(t));
  }
  r.exponent = loglog_slope(xs, ys);
  switch (op) {
    case BenchOp::pair:
    case BenchOp::choice:
    case BenchOp::cond:
      r.pass = std::all_of(r.points.begin(), r.points.end(),
                           [&](const BenchPoint& p) { return p.ticks == r.points.front().ticks; });
      break;
    case BenchOp::singleton:
      r.lo = 0.7;
      r.hi = 1.3;
      break;
    case BenchOp::union_:
      r.lo = negative_edges ? 0.7 : 1.6;
      r.hi = negative_edges ? 1.3 : 2.4;
      break;
  }
  if (r.hi > 0) r.pass = r.exponent >= r.lo && r.exponent <= r.hi;
  return r;
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << "bench " << bench_name(op) << (negative_edges ? " negative-edges" : "") << "\n";
  for (const auto& p : points) out << "size " << p.size << " ticks " << p.ticks << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", exponent);
  out << "exponent " << buf << "\n";
  if (hi > 0) {
    std::snprintf(buf, sizeof buf, "[%.2f, %.2f]", lo, hi);
    out << "window " << buf << "\n";
  } else {
    out << "window constant\n";
  }
  out << (pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::uint64_t overhead_ticks(int steps) {
  auto prog = asml::parse(
      "atoms: ;\nfunctions: ;\ncritical: c, m, s;\n"
      "do if c != m then par { c := {c} ; s := {c} U s }\n");
  hf::Value m = hf::empty();
  for (int i = 0; i < steps; ++i) m = hf::singleton(m);
  State s0;
  s0.terms = {{"c", hf::empty()}, {"m", m}, {"s", hf::empty()}};
  CompilationUnit cu = compile(prog);
  SimRun r = simulate(cu, s0, {});
  if (r.outcome != Outcome::terminal || r.steps != static_cast<std::uint64_t>(steps)) {
    throw Error("iterated union did not run for " + std::to_string(steps) + " steps");
  }
  return r.stats.total;
}

}  // namespace dynca
