#include "dynca/compiler.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "dynca/tangle.hpp"

namespace dynca {

using asml::CondKind;
using asml::StmtKind;
using asml::TermKind;

// ---------------------------------------------------------------------------
// Alias expansion

namespace {

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

// Restricted growth strings enumerate the set partitions of n items.
void partitions(std::size_t n, std::vector<int>& cur, int max_block,
                const std::function<void(const std::vector<int>&)>& visit) {
  if (cur.size() == n) {
    visit(cur);
    return;
  }
  for (int b = 0; b <= max_block + 1; ++b) {
    cur.push_back(b);
    partitions(n, cur, std::max(max_block, b), visit);
    cur.pop_back();
  }
}

std::optional<Rule> merge(const RuleTemplate& t, const std::vector<int>& blocks) {
  std::map<std::string, std::string> rep;
  for (std::size_t i = 0; i < t.alias.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (blocks[j] == blocks[i]) {
        rep[t.alias[i]] = t.alias[j];
        break;
      }
    }
  }
  auto name = [&](const std::string& n) {
    auto it = rep.find(n);
    return it == rep.end() ? n : it->second;
  };
  for (const auto& [a, b] : t.distinct) {
    if (name(a) == name(b)) return std::nullopt;
  }
  const Rule& in = t.rule;
  Rule out;
  out.name = in.name;
  out.pattern.focus = name(in.pattern.focus);
  for (const auto& c : in.pattern.cells) {
    std::string n = name(c.name);
    auto it = std::find_if(out.pattern.cells.begin(), out.pattern.cells.end(),
                           [&](const PatternCell& x) { return x.name == n; });
    if (it == out.pattern.cells.end()) {
      out.pattern.cells.push_back({n, c.color});
    } else if (c.color) {
      if (it->color && *it->color != *c.color) return std::nullopt;
      it->color = c.color;
    }
  }
  auto rename = [&](const PatternEdge& e) { return PatternEdge{name(e.src), e.label, name(e.dst)}; };
  for (const auto& e : in.pattern.edges) {
    PatternEdge r = rename(e);
    if (r.src == r.dst) return std::nullopt;
    push_unique(out.pattern.edges, r);
  }
  for (const auto& e : in.negative_edges) {
    PatternEdge r = rename(e);
    if (std::find(out.pattern.edges.begin(), out.pattern.edges.end(), r) != out.pattern.edges.end()) {
      return std::nullopt;
    }
    push_unique(out.negative_edges, r);
  }
  if (pattern_has_cycle(out.pattern)) return std::nullopt;
  out.pattern.radius = std::max(1, pattern_radius(out.pattern));

  for (const auto& c : out.pattern.cells) out.rewrite.correspondence.emplace_back(c.name, c.name);
  out.rewrite.creations = in.rewrite.creations;
  for (const auto& rc : in.rewrite.recolorings) {
    Recoloring r{name(rc.cell), rc.color};
    for (const auto& prev : out.rewrite.recolorings) {
      if (prev.cell == r.cell && prev.color != r.color) return std::nullopt;
    }
    push_unique(out.rewrite.recolorings, r);
  }
  for (const auto& e : in.rewrite.removals) push_unique(out.rewrite.removals, rename(e));
  for (const auto& e : in.rewrite.additions) push_unique(out.rewrite.additions, rename(e));
  return out;
}

}  // namespace

std::vector<Rule> expand_aliases(const RuleTemplate& t) {
  std::vector<Rule> out;
  std::vector<int> cur;
  partitions(t.alias.size(), cur, -1, [&](const std::vector<int>& blocks) {
    if (auto r = merge(t, blocks)) {
      r->name = t.rule.name + ":" + std::to_string(out.size());
      out.push_back(std::move(*r));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Compiler

namespace {

const char* const kTested = "set.tested";
const char* const kNoUnion = "set.nounion";
const char* const kSuggestion = "scratch.sugg";
const char* const kDiscarded = "scratch.discarded";
const char* const kUnionScratch = "scratch.union";

// Fluent builder for rule templates. The focus is always the Criticals
// cell "C".
class T {
 public:
  T(std::string name, const std::string& from) {
    t_.rule.name = std::move(name);
    t_.rule.pattern.focus = "C";
    cell("C", from);
  }
  T& cell(const std::string& n, const std::string& color = "*") {
    std::optional<Symbol> c;
    if (color != "*") c = Symbol(color);
    t_.rule.pattern.cells.push_back({n, c});
    return *this;
  }
  T& edge(const std::string& s, const std::string& l, const std::string& d) {
    t_.rule.pattern.edges.push_back({s, Symbol(l), d});
    return *this;
  }
  T& neg(const std::string& s, const std::string& l, const std::string& d) {
    t_.rule.negative_edges.push_back({s, Symbol(l), d});
    return *this;
  }
  T& create(const std::string& n, const std::string& color) {
    t_.rule.rewrite.creations.push_back({n, Symbol(color)});
    return *this;
  }
  T& recolor(const std::string& n, const std::string& color) {
    t_.rule.rewrite.recolorings.push_back({n, Symbol(color)});
    return *this;
  }
  T& go(const std::string& color) { return recolor("C", color); }
  T& add(const std::string& s, const std::string& l, const std::string& d) {
    t_.rule.rewrite.additions.push_back({s, Symbol(l), d});
    return *this;
  }
  T& remove(const std::string& s, const std::string& l, const std::string& d) {
    t_.rule.rewrite.removals.push_back({s, Symbol(l), d});
    return *this;
  }
  /// Pattern edge that the rewrite relabels.
  T& relabel(const std::string& s, const std::string& from, const std::string& to,
             const std::string& d) {
    edge(s, from, d);
    remove(s, from, d);
    return add(s, to, d);
  }
  T& alias(std::vector<std::string> cells) {
    t_.alias = std::move(cells);
    return *this;
  }
  T& distinct(const std::string& a, const std::string& b) {
    t_.distinct.emplace_back(a, b);
    return *this;
  }
  const RuleTemplate& get() const { return t_; }

 private:
  RuleTemplate t_;
};

struct Instr {
  enum Op { copy, pair, apply, choose, singleton, union_, test, jump } op;
  std::string dst;
  std::vector<std::string> src;
  std::string fn;
  CondKind cmp = CondKind::eq;
  int on_true = -1;   // label ids; jump uses on_true
  int on_false = -1;
};

struct Assignment {
  std::string target;  // critical term or function symbol
  int arity = 0;       // 0 for critical terms
};

class Compiler {
 public:
  Compiler(const asml::Program& p, const CompileOptions& o) : prog_(p), opts_(o) {}

  CompilationUnit run() {
    flatten(*prog_.body);
    emit_instructions();
    emit_decide();
    emit_commits();
    emit_cleanup();
    return finish();
  }

 private:
  // ----- flattening -------------------------------------------------------

  std::string fresh() { return "@t" + std::to_string(temps_++); }

  int new_label() {
    label_pos_.push_back(-1);
    return static_cast<int>(label_pos_.size() - 1);
  }
  void place(int label) { label_pos_[label] = static_cast<int>(code_.size()); }

  void use_register(const std::string& r) { push_unique(registers_, r); }

  std::string lookup(const std::string& name) const {
    for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    return name;
  }

  // Evaluates `t` into a register and returns it. With a nonempty `dst`
  // the value always lands in `dst`.
  std::string eval(const asml::Term& t, const std::string& dst = {}) {
    auto target = [&] {
      std::string r = dst.empty() ? fresh() : dst;
      use_register(r);
      return r;
    };
    switch (t.kind) {
      case TermKind::name:
      case TermKind::empty: {
        std::string src =
            t.kind == TermKind::empty ? labels::empty_register().str() : lookup(t.name);
        if (dst.empty()) return src;
        std::string r = target();
        code_.push_back({Instr::copy, r, {src}, {}});
        return r;
      }
      case TermKind::singleton: {
        std::string a = eval(*t.args[0]);
        std::string r = target();
        code_.push_back({Instr::singleton, r, {a}, {}});
        return r;
      }
      case TermKind::union_: {
        std::string a = eval(*t.args[0]);
        std::string b = eval(*t.args[1]);
        std::string r = target();
        code_.push_back({Instr::union_, r, {a, b}, {}});
        return r;
      }
      case TermKind::pair: {
        std::string a = eval(*t.args[0]);
        std::string b = eval(*t.args[1]);
        std::string r = target();
        code_.push_back({Instr::pair, r, {a, b}, {}});
        return r;
      }
      case TermKind::apply: {
        std::vector<std::string> args;
        for (const auto& a : t.args) args.push_back(eval(*a));
        std::string r = target();
        code_.push_back({Instr::apply, r, args, t.name});
        return r;
      }
    }
    return {};
  }

  void operands(const asml::Cond& c, std::vector<std::string>& out) {
    if (c.lhs) {
      out.push_back(eval(*c.lhs));
      out.push_back(eval(*c.rhs));
    }
    for (const auto& a : c.args) operands(*a, out);
  }

  void branch(const asml::Cond& c, int on_true, int on_false,
              const std::vector<std::string>& regs, std::size_t& next) {
    switch (c.kind) {
      case CondKind::member:
      case CondKind::eq:
      case CondKind::neq: {
        Instr in{Instr::test, {}, {regs[next], regs[next + 1]}, {}};
        in.cmp = c.kind;
        in.on_true = on_true;
        in.on_false = on_false;
        next += 2;
        code_.push_back(in);
        return;
      }
      case CondKind::not_:
        branch(*c.args[0], on_false, on_true, regs, next);
        return;
      case CondKind::and_: {
        int mid = new_label();
        branch(*c.args[0], mid, on_false, regs, next);
        place(mid);
        branch(*c.args[1], on_true, on_false, regs, next);
        return;
      }
      case CondKind::or_: {
        int mid = new_label();
        branch(*c.args[0], on_true, mid, regs, next);
        place(mid);
        branch(*c.args[1], on_true, on_false, regs, next);
        return;
      }
    }
  }

  void flatten(const asml::Stmt& s) {
    switch (s.kind) {
      case StmtKind::skip:
        return;
      case StmtKind::assign: {
        int k = static_cast<int>(assignments_.size());
        assignments_.push_back({s.lhs->name, static_cast<int>(s.lhs->args.size())});
        eval(*s.term, "@v" + std::to_string(k));
        for (std::size_t i = 0; i < s.lhs->args.size(); ++i) {
          eval(*s.lhs->args[i], "@a" + std::to_string(k) + "." + std::to_string(i + 1));
        }
        return;
      }
      case StmtKind::if_: {
        std::vector<std::string> regs;
        operands(*s.cond, regs);
        int yes = new_label(), no = new_label(), end = new_label();
        std::size_t next = 0;
        branch(*s.cond, yes, no, regs, next);
        place(yes);
        flatten(*s.body[0]);
        Instr j{Instr::jump, {}, {}, {}};
        j.on_true = end;
        code_.push_back(j);
        place(no);
        if (s.body.size() > 1) flatten(*s.body[1]);
        place(end);
        return;
      }
      case StmtKind::let: {
        std::string reg;
        if (s.term->kind == TermKind::name || s.term->kind == TermKind::empty) {
          reg = eval(*s.term);
        } else {
          reg = eval(*s.term, let_register(s.var));
        }
        vars_.emplace_back(s.var, reg);
        flatten(*s.body[0]);
        vars_.pop_back();
        return;
      }
      case StmtKind::let_choose: {
        std::string set = eval(*s.term);
        std::string reg = let_register(s.var);
        use_register(reg);
        code_.push_back({Instr::choose, reg, {set}, {}});
        vars_.emplace_back(s.var, reg);
        flatten(*s.body[0]);
        vars_.pop_back();
        return;
      }
      case StmtKind::par:
        for (const auto& b : s.body) flatten(*b);
        return;
    }
  }

  std::string let_register(const std::string& var) {
    std::string reg = "@x" + std::to_string(lets_++) + "." + var;
    label_map_[var + "#" + std::to_string(lets_ - 1)] = reg;
    return reg;
  }

  // ----- program counter colors -------------------------------------------

  // Index of the instruction control reaches from `pos`, skipping jumps;
  // code_.size() stands for the decide phase.
  int resolve(int pos) const {
    while (pos < static_cast<int>(code_.size()) && code_[pos].op == Instr::jump) {
      pos = label_pos_[code_[pos].on_true];
    }
    return pos;
  }
  int resolve_label(int label) const { return resolve(label_pos_[label]); }

  std::string color(int pos) const {
    if (pos == static_cast<int>(code_.size())) return pc::decide;
    if (pos == entry_) return pc::idle;
    return "crit.e" + std::to_string(pos);
  }

  // ----- emission ---------------------------------------------------------

  void emit(const T& t) {
    for (auto& r : expand_aliases(t.get())) rules_.push_back(std::move(r));
  }

  static std::string name(const std::string& phase, int pos, const std::string& what) {
    return phase + ":e" + std::to_string(pos) + "." + what;
  }

  void emit_instructions() {
    entry_ = resolve(0);
    if (entry_ == static_cast<int>(code_.size())) {
      emit(T("control:start", pc::idle).go(pc::decide));
    }
    for (int i = 0; i < static_cast<int>(code_.size()); ++i) {
      const Instr& in = code_[i];
      if (in.op == Instr::jump) continue;
      std::string from = color(i);
      std::string next = color(resolve(i + 1));
      switch (in.op) {
        case Instr::copy:
          emit(T(name("copy", i, "copy"), from)
                   .cell("X")
                   .edge("C", in.src[0], "X")
                   .add("C", in.dst, "X")
                   .go(next));
          break;
        case Instr::pair:
          emit_pair(i, in, from, next);
          break;
        case Instr::apply:
          emit_apply(i, in, from, next);
          break;
        case Instr::choose:
          emit(T(name("choice", i, "pick"), from)
                   .cell("S")
                   .cell("X")
                   .edge("C", in.src[0], "S")
                   .edge("X", "in", "S")
                   .add("C", in.dst, "X")
                   .go(next));
          emit(T(name("choice", i, "empty"), from).cell("S").edge("C", in.src[0], "S").go(pc::error));
          break;
        case Instr::test:
          emit_test(i, in, from);
          break;
        case Instr::singleton:
          emit_singleton(i, in, from, next);
          break;
        case Instr::union_:
          emit_union(i, in, from, next);
          break;
        case Instr::jump:
          break;
      }
    }
  }

  void emit_pair(int i, const Instr& in, const std::string& from, const std::string& next) {
    emit(T(name("pairing", i, "reuse"), from)
             .cell("A")
             .cell("B")
             .cell("P", "pair")
             .edge("C", in.src[0], "A")
             .edge("C", in.src[1], "B")
             .edge("A", "p1", "P")
             .edge("B", "p2", "P")
             .add("C", in.dst, "P")
             .go(next)
             .alias({"A", "B"}));
    emit(T(name("pairing", i, "create"), from)
             .cell("A")
             .cell("B")
             .edge("C", in.src[0], "A")
             .edge("C", in.src[1], "B")
             .create("P", "pair")
             .add("A", "p1", "P")
             .add("B", "p2", "P")
             .add("C", in.dst, "P")
             .go(next)
             .alias({"A", "B"}));
  }

  // Cells A1..Ak reached from Criticals through `regs`.
  static std::vector<std::string> arg_cells(T& t, const std::vector<std::string>& regs) {
    std::vector<std::string> cells;
    for (std::size_t j = 0; j < regs.size(); ++j) {
      std::string a = "A" + std::to_string(j + 1);
      t.cell(a).edge("C", regs[j], a);
      cells.push_back(a);
    }
    return cells;
  }

  static void tuple_args(T& t, const std::vector<std::string>& cells, const std::string& tuple) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      t.edge(tuple, labels::position(static_cast<int>(j + 1)).str(), cells[j]);
    }
  }

  void emit_apply(int i, const Instr& in, const std::string& from, const std::string& next) {
    const std::string empty = labels::empty_register().str();
    {
      // E is unused here but keeps this rule's cellset a superset of the
      // fallbacks' even when V coincides with an argument.
      T t(name("apply", i, "found"), from);
      auto cells = arg_cells(t, in.src);
      t.cell("T", "tuple").cell("V").cell("E").edge("C", in.fn, "T");
      tuple_args(t, cells, "T");
      t.edge("T", "val", "V").edge("C", empty, "E").add("C", in.dst, "V").go(next);
      cells.push_back("V");
      cells.push_back("E");
      emit(t.alias(cells));
    }
    {
      T t(name("apply", i, "novalue"), from);
      auto cells = arg_cells(t, in.src);
      t.cell("T", "tuple").cell("E").edge("C", in.fn, "T");
      tuple_args(t, cells, "T");
      t.edge("C", empty, "E").add("C", in.dst, "E").go(next);
      cells.push_back("E");
      emit(t.alias(cells));
    }
    {
      T t(name("apply", i, "absent"), from);
      auto cells = arg_cells(t, in.src);
      t.cell("E").edge("C", empty, "E").add("C", in.dst, "E").go(next);
      cells.push_back("E");
      emit(t.alias(cells));
    }
  }

  void emit_test(int i, const Instr& in, const std::string& from) {
    std::string yes = color(resolve_label(in.on_true));
    std::string no = color(resolve_label(in.on_false));
    const std::string& a = in.src[0];
    const std::string& b = in.src[1];
    if (in.cmp == CondKind::member) {
      for (const char* kind : {"atom", "pair"}) {
        emit(T(name("conditional", i, std::string("typeerr_") + kind), from)
                 .cell("A")
                 .cell("B", kind)
                 .edge("C", a, "A")
                 .edge("C", b, "B")
                 .go(pc::error)
                 .alias({"A", "B"}));
      }
      emit(T(name("conditional", i, "member"), from)
               .cell("A")
               .cell("B", "set")
               .edge("C", a, "A")
               .edge("C", b, "B")
               .edge("A", "in", "B")
               .go(yes)
               .alias({"A", "B"}));
      emit(T(name("conditional", i, "nonmember"), from)
               .cell("A")
               .cell("B", "set")
               .edge("C", a, "A")
               .edge("C", b, "B")
               .go(no)
               .alias({"A", "B"}));
      return;
    }
    bool eq = in.cmp == CondKind::eq;
    emit(T(name("conditional", i, "same"), from)
             .cell("X")
             .edge("C", a, "X")
             .edge("C", b, "X")
             .go(eq ? yes : no));
    emit(T(name("conditional", i, "distinct"), from)
             .cell("X")
             .cell("Y")
             .edge("C", a, "X")
             .edge("C", b, "Y")
             .go(eq ? no : yes));
  }

  void lock(const std::string& c) { lock_colors_.insert(c); }

  void emit_singleton(int i, const Instr& in, const std::string& from, const std::string& next) {
    const std::string& a = in.src[0];
    std::string base = "crit.e" + std::to_string(i);
    std::string s1 = base + ".s1", s2 = base + ".s2";
    lock(s1);
    lock(s2);
    emit(T(name("singleton", i, "suggest"), from)
             .cell("A")
             .edge("C", a, "A")
             .create("N", kSuggestion)
             .add("C", "@sugg", "N")
             .go(s1));
    emit(T(name("singleton", i, "found"), s1)
             .cell("A")
             .cell("U", "set")
             .cell("N", kSuggestion)
             .edge("C", a, "A")
             .edge("A", "in", "U")
             .edge("C", "@sugg", "N")
             .add("C", in.dst, "U")
             .remove("C", "@sugg", "N")
             .recolor("N", kDiscarded)
             .go(s2));
    emit(T(name("singleton", i, "reject"), s1)
             .cell("A")
             .cell("U", "set")
             .cell("B")
             .cell("N", kSuggestion)
             .edge("C", a, "A")
             .edge("A", "in", "U")
             .edge("B", "in", "U")
             .edge("C", "@sugg", "N")
             .recolor("U", kTested));
    emit(T(name("singleton", i, "commit"), s1)
             .cell("A")
             .cell("N", kSuggestion)
             .edge("C", a, "A")
             .edge("C", "@sugg", "N")
             .recolor("N", "set")
             .add("A", "in", "N")
             .add("C", in.dst, "N")
             .remove("C", "@sugg", "N")
             .go(s2));
    emit(T(name("singleton", i, "unmark"), s2)
             .cell("A")
             .cell("U", kTested)
             .edge("C", a, "A")
             .edge("A", "in", "U")
             .recolor("U", "set"));
    emit(T(name("singleton", i, "done"), s2).go(next));
  }

  void emit_union(int i, const Instr& in, const std::string& from, const std::string& next) {
    const std::string& s = in.src[0];
    const std::string& p = in.src[1];
    const std::string& dst = in.dst;
    std::string base = "crit.e" + std::to_string(i) + ".u.";
    auto col = [&](const char* phase) {
      std::string c = base + phase;
      lock(c);
      return c;
    };
    std::string u0 = col("u0"), u0b = col("u0b"), sel = col("sel"), scan = col("scan"),
                unfail = col("unfail"), unpass = col("unpass"), bstart = col("bstart"),
                bcopy = col("bcopy"), bunmark = col("bunmark"), clean = col("clean");
    auto base_t = [&](const std::string& phase, const std::string& what, const std::string& c) {
      T t(name(phase, i, what), c);
      t.cell("S").cell("P").edge("C", s, "S").edge("C", p, "P");
      return t;
    };

    // Operand types.
    for (const char* side : {"S", "P"}) {
      for (const char* kind : {"atom", "pair"}) {
        T t(name("union-check", i, std::string("typeerr_") + side + "_" + kind), from);
        t.cell("S", std::string(side) == "S" ? kind : "*")
            .cell("P", std::string(side) == "P" ? kind : "*")
            .edge("C", s, "S")
            .edge("C", p, "P")
            .go(pc::error)
            .alias({"S", "P"});
        emit(t);
      }
    }
    emit(T(name("union-check", i, "typed"), from)
             .cell("S", "set")
             .cell("P", "set")
             .edge("C", s, "S")
             .edge("C", p, "P")
             .go(u0)
             .alias({"S", "P"}));

    // Shortcuts: identical or empty operands.
    emit(T(name("union-check", i, "same"), u0)
             .cell("X")
             .edge("C", s, "X")
             .edge("C", p, "X")
             .add("C", dst, "X")
             .go(next));
    emit(base_t("union-check", "left_nonempty", u0)
             .cell("E")
             .edge("E", "in", "S")
             .go(u0b)
             .alias({"E", "P"}));
    emit(base_t("union-check", "left_empty", u0).add("C", dst, "P").go(next));
    emit(base_t("union-check", "seed", u0b)
             .cell("E")
             .cell("F")
             .edge("E", "in", "S")
             .edge("F", "in", "P")
             .add("C", "@seed", "E")
             .go(sel)
             .alias({"E", "F", "S", "P"})
             .distinct("S", "P"));
    emit(base_t("union-check", "right_empty", u0b)
             .cell("E")
             .edge("E", "in", "S")
             .add("C", dst, "S")
             .go(next)
             .alias({"E", "P"}));

    // Candidates: the sets containing the seed element.
    emit(T(name("union-check", i, "select"), sel)
             .cell("E")
             .cell("U", "set")
             .edge("C", "@seed", "E")
             .edge("E", "in", "U")
             .add("C", "@check", "U")
             .go(scan));
    emit(T(name("union-check", i, "exhausted"), sel)
             .cell("E")
             .edge("C", "@seed", "E")
             .go(bstart));

    auto cand = [&](const std::string& what, const std::string& c) {
      T t = base_t("union-check", what, c);
      t.cell("U").edge("C", "@check", "U");
      return t;
    };
    const std::vector<std::string> scan_alias{"X", "S", "P", "U"};

    if (opts_.negative_edges) {
      auto fail = [&](const std::string& what) {
        T t = cand(what, scan);
        t.cell("X").recolor("U", kNoUnion).remove("C", "@check", "U").go(sel);
        return t;
      };
      emit(fail("nfail_u").edge("X", "in", "U").neg("X", "in", "S").neg("X", "in", "P")
               .alias(scan_alias).distinct("S", "P"));
      emit(fail("nfail_s").edge("X", "in", "S").neg("X", "in", "U").alias(scan_alias).distinct("S", "P"));
      emit(fail("nfail_p").edge("X", "in", "P").neg("X", "in", "U").alias(scan_alias).distinct("S", "P"));
      emit(cand("npass", scan)
               .add("C", dst, "U")
               .remove("C", "@check", "U")
               .go(clean)
               .alias({"S", "P", "U"})
               .distinct("S", "P"));
    } else {
      auto mark = [&](const std::string& what) {
        T t = cand(what, scan);
        t.cell("X");
        return t;
      };
      emit(mark("mark_usp")
               .relabel("X", "in", "in.c", "U")
               .relabel("X", "in", "in.c", "S")
               .relabel("X", "in", "in.c", "P")
               .alias(scan_alias)
               .distinct("S", "P"));
      emit(mark("mark_us")
               .relabel("X", "in", "in.c", "U")
               .relabel("X", "in", "in.c", "S")
               .alias(scan_alias)
               .distinct("S", "P"));
      emit(mark("mark_up")
               .relabel("X", "in", "in.c", "U")
               .relabel("X", "in", "in.c", "P")
               .alias(scan_alias)
               .distinct("S", "P"));
      for (const char* where : {"U", "S", "P"}) {
        emit(mark(std::string("fail_") + where)
                 .edge("X", "in", where)
                 .go(unfail)
                 .alias(scan_alias)
                 .distinct("S", "P"));
      }
      emit(cand("pass", scan).go(unpass).alias({"S", "P", "U"}).distinct("S", "P"));
      for (const auto& [c, what] : {std::pair{unfail, std::string("unfail")},
                                    std::pair{unpass, std::string("unpass")}}) {
        for (const char* where : {"U", "S", "P"}) {
          emit(cand(what + "_" + where, c)
                   .cell("X")
                   .relabel("X", "in.c", "in", where)
                   .alias(scan_alias)
                   .distinct("S", "P"));
        }
      }
      emit(cand("unfail_done", unfail)
               .recolor("U", kNoUnion)
               .remove("C", "@check", "U")
               .go(sel)
               .alias({"S", "P", "U"})
               .distinct("S", "P"));
      emit(cand("unpass_done", unpass)
               .add("C", dst, "U")
               .remove("C", "@check", "U")
               .go(clean)
               .alias({"S", "P", "U"})
               .distinct("S", "P"));
    }

    // Build a fresh union node.
    emit(base_t("union-build", "start", bstart)
             .create("N", kUnionScratch)
             .add("C", "@build", "N")
             .go(bcopy));
    auto copy = [&](const std::string& what) {
      T t = base_t("union-build", what, bcopy);
      t.cell("N", kUnionScratch).cell("X").edge("C", "@build", "N").add("X", "in", "N");
      return t;
    };
    const std::vector<std::string> copy_alias{"X", "S", "P"};
    if (opts_.negative_edges) {
      emit(copy("copy_s").edge("X", "in", "S").neg("X", "in", "N").alias(copy_alias));
      emit(copy("copy_p").edge("X", "in", "P").neg("X", "in", "N").alias(copy_alias));
    } else {
      emit(copy("copy_sp")
               .relabel("X", "in", "in.c", "S")
               .relabel("X", "in", "in.c", "P")
               .alias(copy_alias));
      emit(copy("copy_s").relabel("X", "in", "in.c", "S").alias(copy_alias));
      emit(copy("copy_p").relabel("X", "in", "in.c", "P").alias(copy_alias));
    }
    emit(base_t("union-build", "commit", bcopy)
             .cell("N", kUnionScratch)
             .edge("C", "@build", "N")
             .recolor("N", "set")
             .remove("C", "@build", "N")
             .add("C", dst, "N")
             .go(opts_.negative_edges ? clean : bunmark));
    if (!opts_.negative_edges) {
      for (const char* where : {"S", "P"}) {
        emit(base_t("union-build", std::string("unmark_") + where, bunmark)
                 .cell("X")
                 .relabel("X", "in.c", "in", where)
                 .alias(copy_alias));
      }
      emit(base_t("union-build", "unmarked", bunmark).go(clean));
    }

    // Release the rejected candidates and the seed.
    emit(T(name("cleanup", i, "restore"), clean)
             .cell("E")
             .cell("U", kNoUnion)
             .edge("C", "@seed", "E")
             .edge("E", "in", "U")
             .recolor("U", "set"));
    emit(T(name("cleanup", i, "release"), clean)
             .cell("E")
             .edge("C", "@seed", "E")
             .remove("C", "@seed", "E")
             .go(next));
  }

  void emit_decide() {
    // Clashing function updates: same location, different values.
    for (std::size_t j = 0; j < assignments_.size(); ++j) {
      for (std::size_t k = j + 1; k < assignments_.size(); ++k) {
        const auto& a = assignments_[j];
        const auto& b = assignments_[k];
        if (a.arity == 0 || a.target != b.target) continue;
        T t("commit:decide.clash" + std::to_string(j) + "_" + std::to_string(k), pc::decide);
        std::vector<std::string> cells;
        for (int x = 1; x <= a.arity; ++x) {
          std::string c = "A" + std::to_string(x);
          t.cell(c)
              .edge("C", "@a" + std::to_string(j) + "." + std::to_string(x), c)
              .edge("C", "@a" + std::to_string(k) + "." + std::to_string(x), c);
          cells.push_back(c);
        }
        t.cell("V").cell("W").edge("C", "@v" + std::to_string(j), "V").edge("C", "@v" + std::to_string(k), "W");
        cells.push_back("V");
        cells.push_back("W");
        emit(t.go(pc::clash).alias(cells).distinct("V", "W"));
      }
    }
    for (std::size_t k = 0; k < assignments_.size(); ++k) {
      emit(T("commit:decide.update" + std::to_string(k), pc::decide)
               .cell("V")
               .edge("C", "@v" + std::to_string(k), "V")
               .go("crit.c0"));
    }
    emit(T("commit:decide.none", pc::decide).go(pc::halting));
  }

  void emit_commits() {
    for (std::size_t k = 0; k < assignments_.size(); ++k) {
      const auto& a = assignments_[k];
      std::string from = "crit.c" + std::to_string(k);
      std::string next = k + 1 < assignments_.size() ? "crit.c" + std::to_string(k + 1) : pc::clean;
      std::string v = "@v" + std::to_string(k);
      std::string base = "commit:c" + std::to_string(k) + ".";
      if (a.arity == 0) {
        emit(T(base + "retarget", from)
                 .cell("V")
                 .cell("O")
                 .edge("C", v, "V")
                 .edge("C", a.target, "O")
                 .remove("C", a.target, "O")
                 .add("C", a.target, "V")
                 .go(next)
                 .alias({"V", "O"}));
      } else {
        std::vector<std::string> regs;
        for (int x = 1; x <= a.arity; ++x) regs.push_back("@a" + std::to_string(k) + "." + std::to_string(x));
        {
          T t(base + "overwrite", from);
          auto cells = arg_cells(t, regs);
          t.cell("T", "tuple").cell("O").cell("V").edge("C", a.target, "T").edge("C", v, "V");
          tuple_args(t, cells, "T");
          t.edge("T", "val", "O").remove("T", "val", "O").add("T", "val", "V").go(next);
          cells.push_back("O");
          cells.push_back("V");
          emit(t.alias(cells));
        }
        {
          T t(base + "fill", from);
          auto cells = arg_cells(t, regs);
          t.cell("T", "tuple").cell("V").edge("C", a.target, "T").edge("C", v, "V");
          tuple_args(t, cells, "T");
          t.add("T", "val", "V").go(next);
          cells.push_back("V");
          emit(t.alias(cells));
        }
        {
          T t(base + "create", from);
          auto cells = arg_cells(t, regs);
          t.cell("V").edge("C", v, "V").create("T", "tuple").add("C", a.target, "T");
          for (std::size_t x = 0; x < cells.size(); ++x) {
            t.add("T", labels::position(static_cast<int>(x + 1)).str(), cells[x]);
          }
          t.add("T", "val", "V").go(next);
          cells.push_back("V");
          emit(t.alias(cells));
        }
      }
      emit(T(base + "disabled", from).go(next));
    }
  }

  void emit_cleanup() {
    for (const char* c : {pc::clean, pc::halting}) {
      std::string phase = std::string(c) == pc::clean ? "step" : "halt";
      for (const auto& r : registers_) {
        emit(T("cleanup:" + phase + ".drop" + r, c).cell("X").edge("C", r, "X").remove("C", r, "X"));
      }
    }
    emit(T("control:end", pc::clean).go(pc::idle));
    emit(T("control:halt", pc::halting).go(pc::halt));
  }

  CompilationUnit finish() {
    CompilationUnit cu;
    cu.program = prog_;
    cu.end_rule = "control:end:0";
    RuleSet& rs = cu.ruleset;
    rs.negative_edges = opts_.negative_edges;
    rs.lock_colors = lock_colors_;
    for (const char* c : {"atom", "set", "pair", "tuple", pc::idle, pc::decide, pc::clean,
                          pc::halting, pc::halt, pc::error, pc::clash, kTested, kNoUnion,
                          kSuggestion, kDiscarded, kUnionScratch}) {
      rs.palette.insert(c);
    }
    for (const char* l : {"in", "in.c", "p1", "p2", "val", "@empty"}) rs.labels.insert(l);
    for (const auto& c : prog_.criticals) {
      rs.labels.insert(c);
      cu.label_map[c] = c;
    }
    for (const auto& [f, k] : prog_.functions) {
      rs.labels.insert(f);
      cu.label_map[f] = f;
      for (int x = 1; x <= k; ++x) rs.labels.insert(labels::position(x).str());
    }
    for (const auto& [k, v] : label_map_) cu.label_map[k] = v;
    for (const char* mark : {"@empty", "@sugg", "@seed", "@check", "@build", "in.c"}) {
      cu.label_map[mark] = mark;
    }
    for (const auto& r : registers_) cu.label_map[r] = r;
    int radius = 1;
    for (const auto& r : rules_) {
      for (const auto& c : r.pattern.cells) {
        if (c.color) rs.palette.insert(c.color->str());
      }
      for (const auto& c : r.rewrite.creations) rs.palette.insert(c.color.str());
      for (const auto& c : r.rewrite.recolorings) rs.palette.insert(c.color.str());
      for (const auto* list : {&r.pattern.edges, &r.negative_edges, &r.rewrite.additions,
                               &r.rewrite.removals}) {
        for (const auto& e : *list) rs.labels.insert(e.label.str());
      }
      radius = std::max(radius, r.pattern.radius);
      std::string phase = r.phase();
      if (std::find(cu.phase_tags.begin(), cu.phase_tags.end(), phase) == cu.phase_tags.end()) {
        cu.phase_tags.push_back(phase);
      }
    }
    rs.radius_bound = radius;
    rs.rules = std::move(rules_);
    return cu;
  }

  const asml::Program& prog_;
  CompileOptions opts_;
  std::vector<Instr> code_;
  std::vector<int> label_pos_;
  std::vector<std::pair<std::string, std::string>> vars_;
  std::vector<Assignment> assignments_;
  std::vector<std::string> registers_;
  std::map<std::string, std::string> label_map_;
  std::set<std::string> lock_colors_;
  std::vector<Rule> rules_;
  int temps_ = 0;
  int lets_ = 0;
  int entry_ = 0;
};

}  // namespace

CompilationUnit compile(const asml::Program& p, const CompileOptions& options) {
  auto problems = asml::validate(p);
  if (!problems.empty()) throw Error("program does not validate: " + problems.front());
  return Compiler(p, options).run();
}

}  // namespace dynca
