#include "dynca/interpreter.hpp"

#include <map>

namespace dynca {

using asml::CondKind;
using asml::StmtKind;
using asml::TermKind;

hf::Value SeededChoice::choose(const hf::Value& set) { return hf::choose(set, rng_); }

hf::Value ScriptedChoice::choose(const hf::Value& set) {
  if (next_ >= script_.size()) throw Error("choice script exhausted");
  const hf::Value& v = script_[next_++];
  if (!hf::member(v, set)) {
    throw Error("scripted choice " + hf::to_string(v) + " is not in " + hf::to_string(set));
  }
  return v;
}

hf::Value PathChoice::choose(const hf::Value& set) {
  auto ms = hf::members_of(set);
  if (ms.empty()) throw EmptyChoice("choose on the empty set");
  if (next_ == path_.size()) path_.push_back(0);
  arity_.push_back(ms.size());
  return ms[path_[next_++]];
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::terminal: return "terminal";
    case Outcome::budget_exhausted: return "budget-exhausted";
    case Outcome::inconsistent: return "inconsistent";
    case Outcome::error: return "error";
  }
  return "error";
}

namespace {

using Env = std::vector<std::pair<std::string, hf::Value>>;

std::string where(int line, int column) {
  return line > 0 ? " at " + std::to_string(line) + ":" + std::to_string(column) : "";
}

class Firing {
 public:
  Firing(const asml::Program& p, const hf::Limits& limits, const State& s, ChoiceSource& choice)
      : prog_(p), limits_(limits), state_(s), choice_(choice) {}

  void exec(const asml::Stmt& st) {
    switch (st.kind) {
      case StmtKind::skip:
        return;
      case StmtKind::assign: {
        hf::Value v = eval(*st.term);
        Location loc{st.lhs->name, {}};
        for (const auto& a : st.lhs->args) loc.args.push_back(eval(*a));
        auto [it, inserted] = updates_.try_emplace(loc, v);
        if (!inserted && it->second != v) {
          clash_ = "clashing updates to " + loc.function + where(st.line, st.column);
        }
        return;
      }
      case StmtKind::if_: {
        std::vector<hf::Value> values;
        operands(*st.cond, values);
        std::size_t next = 0;
        if (test(*st.cond, values, next)) {
          exec(*st.body[0]);
        } else if (st.body.size() > 1) {
          exec(*st.body[1]);
        }
        return;
      }
      case StmtKind::let:
        env_.emplace_back(st.var, eval(*st.term));
        exec(*st.body[0]);
        env_.pop_back();
        return;
      case StmtKind::let_choose: {
        hf::Value s = eval(*st.term);
        if (!s.is_set()) throw TypeError("choose on a non-set" + where(st.line, st.column));
        if (s.members().empty()) throw EmptyChoice("choose on the empty set" + where(st.line, st.column));
        env_.emplace_back(st.var, choice_.choose(s));
        exec(*st.body[0]);
        env_.pop_back();
        return;
      }
      case StmtKind::par:
        for (const auto& b : st.body) exec(*b);
        return;
    }
  }

  const std::map<Location, hf::Value>& updates() const { return updates_; }
  const std::string& clash() const { return clash_; }

 private:
  hf::Value eval(const asml::Term& t) {
    hf::Value v = eval_raw(t);
    hf::check_limits(v, limits_);
    return v;
  }

  hf::Value eval_raw(const asml::Term& t) {
    switch (t.kind) {
      case TermKind::name: {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it) {
          if (it->first == t.name) return it->second;
        }
        auto it = state_.terms.find(t.name);
        if (it == state_.terms.end()) throw Error("critical term " + t.name + " has no value");
        return it->second;
      }
      case TermKind::empty:
        return hf::empty();
      case TermKind::singleton:
        return hf::singleton(eval(*t.args[0]));
      case TermKind::union_: {
        hf::Value a = eval(*t.args[0]);
        hf::Value b = eval(*t.args[1]);
        if (!a.is_set() || !b.is_set()) throw TypeError("union of a non-set" + where(t.line, t.column));
        return hf::set_union(a, b);
      }
      case TermKind::pair: {
        hf::Value a = eval(*t.args[0]);
        return hf::pair(a, eval(*t.args[1]));
      }
      case TermKind::apply: {
        Location loc{t.name, {}};
        for (const auto& a : t.args) loc.args.push_back(eval(*a));
        auto it = state_.locations.find(loc);
        return it == state_.locations.end() ? hf::empty() : it->second;
      }
    }
    return hf::empty();
  }

  void operands(const asml::Cond& c, std::vector<hf::Value>& out) {
    if (c.lhs) {
      out.push_back(eval(*c.lhs));
      out.push_back(eval(*c.rhs));
    }
    for (const auto& a : c.args) operands(*a, out);
  }

  // Consumes operand values in the order `operands` produced them, so
  // short-circuiting must still advance past skipped comparisons.
  static std::size_t count(const asml::Cond& c) {
    std::size_t n = c.lhs ? 2 : 0;
    for (const auto& a : c.args) n += count(*a);
    return n;
  }

  bool test(const asml::Cond& c, const std::vector<hf::Value>& v, std::size_t& next) {
    switch (c.kind) {
      case CondKind::member: {
        const hf::Value& x = v[next];
        const hf::Value& s = v[next + 1];
        next += 2;
        if (!s.is_set()) throw TypeError("membership in a non-set");
        return hf::member(x, s);
      }
      case CondKind::eq:
        next += 2;
        return v[next - 2] == v[next - 1];
      case CondKind::neq:
        next += 2;
        return v[next - 2] != v[next - 1];
      case CondKind::not_:
        return !test(*c.args[0], v, next);
      case CondKind::and_: {
        if (test(*c.args[0], v, next)) return test(*c.args[1], v, next);
        next += count(*c.args[1]);
        return false;
      }
      case CondKind::or_: {
        if (!test(*c.args[0], v, next)) return test(*c.args[1], v, next);
        next += count(*c.args[1]);
        return true;
      }
    }
    return false;
  }

  const asml::Program& prog_;
  const hf::Limits& limits_;
  const State& state_;
  ChoiceSource& choice_;
  Env env_;
  std::map<Location, hf::Value> updates_;
  std::string clash_;
};

}  // namespace

Interpreter::Interpreter(asml::Program program, hf::Limits limits)
    : program_(std::move(program)), limits_(limits) {}

FireResult Interpreter::fire(const State& s, ChoiceSource& choice) const {
  FireResult r;
  Firing f(program_, limits_, s, choice);
  try {
    f.exec(*program_.body);
  } catch (const TypeError& e) {
    r.kind = FireResult::error;
    r.message = std::string("type error: ") + e.what();
    r.state = s;
    return r;
  } catch (const EmptyChoice& e) {
    r.kind = FireResult::error;
    r.message = e.what();
    r.state = s;
    return r;
  } catch (const LimitError& e) {
    r.kind = FireResult::error;
    r.message = std::string("limit exceeded: ") + e.what();
    r.state = s;
    return r;
  }
  r.state = s;
  if (!f.clash().empty()) {
    r.kind = FireResult::inconsistent;
    r.message = f.clash();
    return r;
  }
  if (f.updates().empty()) {
    r.kind = FireResult::terminal;
    return r;
  }
  for (const auto& [loc, v] : f.updates()) {
    if (loc.args.empty() && program_.is_critical(loc.function)) {
      r.state.terms[loc.function] = v;
    } else {
      r.state.locations[loc] = v;
    }
  }
  r.state = r.state.normalized();
  r.kind = FireResult::next;
  return r;
}

InterpRun Interpreter::run(State s0, ChoiceSource& choice, std::uint64_t max_steps) const {
  InterpRun run;
  run.state = std::move(s0);
  while (true) {
    if (run.steps >= max_steps) {
      run.outcome = Outcome::budget_exhausted;
      try {
        if (fire(run.state, choice).kind == FireResult::terminal) run.outcome = Outcome::terminal;
      } catch (const Error&) {
        // a replayed script has no entry for the probe
      }
      return run;
    }
    FireResult r = fire(run.state, choice);
    switch (r.kind) {
      case FireResult::terminal:
        run.outcome = Outcome::terminal;
        return run;
      case FireResult::inconsistent:
        run.outcome = Outcome::inconsistent;
        run.message = r.message;
        return run;
      case FireResult::error:
        run.outcome = Outcome::error;
        run.message = r.message;
        return run;
      case FireResult::next:
        run.state = std::move(r.state);
        ++run.steps;
        break;
    }
  }
}

State complete_state(const asml::Program& p, const State& s) {
  State out = s.normalized();
  for (const auto& [name, v] : out.terms) {
    if (!p.is_critical(name)) throw Error("state names undeclared critical term " + name);
  }
  for (const auto& [loc, v] : out.locations) {
    if (p.arity(loc.function) != static_cast<int>(loc.args.size())) {
      throw Error("state names undeclared location of " + loc.function);
    }
  }
  for (const auto& c : p.criticals) out.terms.try_emplace(c, hf::empty());
  return out;
}

OutcomeSet enumerate_outcomes(const Interpreter& interp, const State& s0, std::uint64_t max_steps,
                              std::size_t max_paths) {
  OutcomeSet out;
  std::vector<std::size_t> prefix;
  while (true) {
    if (out.paths == max_paths) {
      throw Error("more than " + std::to_string(max_paths) + " choice paths");
    }
    PathChoice choice(prefix);
    InterpRun r = interp.run(s0, choice, max_steps);
    ++out.paths;
    bool seen = false;
    for (const auto& o : out.outcomes) {
      if (o.outcome == r.outcome && o.state == r.state) seen = true;
    }
    if (!seen) out.outcomes.push_back(r);
    // Advance to the next path in lexicographic order.
    std::vector<std::size_t> path = choice.path();
    const auto& arity = choice.arity();
    path.resize(arity.size());
    while (!path.empty() && path.back() + 1 >= arity[path.size() - 1]) path.pop_back();
    if (path.empty()) return out;
    ++path.back();
    prefix = path;
  }
}

}  // namespace dynca
