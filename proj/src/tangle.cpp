#include "dynca/tangle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace dynca {

NodeKind kind_of_color(std::string_view color) {
  std::string_view prefix = color.substr(0, color.find('.'));
  if (prefix == "atom") return NodeKind::atom;
  if (prefix == "set") return NodeKind::set;
  if (prefix == "pair") return NodeKind::pair;
  if (prefix == "tuple") return NodeKind::tuple;
  if (prefix == "crit") return NodeKind::criticals;
  return NodeKind::scratch;
}

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::atom: return "atom";
    case NodeKind::set: return "set";
    case NodeKind::pair: return "pair";
    case NodeKind::tuple: return "tuple";
    case NodeKind::criticals: return "criticals";
    case NodeKind::scratch: return "scratch";
  }
  return "scratch";
}

namespace colors {
Symbol atom() { static const Symbol s("atom"); return s; }
Symbol set() { static const Symbol s("set"); return s; }
Symbol pair() { static const Symbol s("pair"); return s; }
Symbol tuple() { static const Symbol s("tuple"); return s; }
Symbol criticals() { static const Symbol s("crit"); return s; }
}  // namespace colors

namespace labels {
Symbol member() { static const Symbol s("in"); return s; }
Symbol member_marked() { static const Symbol s("in.c"); return s; }
Symbol first() { static const Symbol s("p1"); return s; }
Symbol second() { static const Symbol s("p2"); return s; }
Symbol value() { static const Symbol s("val"); return s; }
Symbol position(int i) { return Symbol("#" + std::to_string(i)); }
Symbol empty_register() { static const Symbol s("@empty"); return s; }
bool is_internal(Symbol label) {
  const auto& s = label.str();
  return !s.empty() && s[0] == '@';
}
bool is_containment(Symbol label) {
  return label == member() || label == member_marked() || label == first() || label == second();
}
}  // namespace labels

// ---------------------------------------------------------------------------
// Tangle

NodeId Tangle::add_node(Symbol color, std::string atom) {
  Node n;
  n.color = color;
  n.kind = kind_of_color(color.str());
  n.atom = std::move(atom);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

bool Tangle::has_edge(NodeId src, Symbol label, NodeId dst) const {
  const auto& out = nodes_.at(src).out;
  const auto& in = nodes_.at(dst).in;
  if (out.size() <= in.size()) {
    return std::any_of(out.begin(), out.end(),
                       [&](const HalfEdge& e) { return e.label == label && e.node == dst; });
  }
  return std::any_of(in.begin(), in.end(),
                     [&](const HalfEdge& e) { return e.label == label && e.node == src; });
}

bool Tangle::add_edge(NodeId src, Symbol label, NodeId dst) {
  if (has_edge(src, label, dst)) return false;
  nodes_.at(src).out.push_back({label, dst});
  nodes_.at(dst).in.push_back({label, src});
  ++edge_count_;
  return true;
}

bool Tangle::remove_edge(NodeId src, Symbol label, NodeId dst) {
  auto& out = nodes_.at(src).out;
  auto it = std::find_if(out.begin(), out.end(),
                         [&](const HalfEdge& e) { return e.label == label && e.node == dst; });
  if (it == out.end()) return false;
  out.erase(it);
  auto& in = nodes_.at(dst).in;
  in.erase(std::find_if(in.begin(), in.end(),
                        [&](const HalfEdge& e) { return e.label == label && e.node == src; }));
  --edge_count_;
  return true;
}

void Tangle::recolor(NodeId id, Symbol color) {
  auto& n = nodes_.at(id);
  n.color = color;
  n.kind = kind_of_color(color.str());
}

std::optional<NodeId> Tangle::criticals() const {
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::criticals) return i;
  }
  return std::nullopt;
}

std::optional<NodeId> Tangle::target(NodeId src, Symbol label) const {
  for (const auto& e : nodes_.at(src).out) {
    if (e.label == label) return e.node;
  }
  return std::nullopt;
}

std::vector<Edge> Tangle::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    for (const auto& e : nodes_[i].out) out.push_back({i, e.label, e.node});
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.label != b.label) return a.label.str() < b.label.str();
    return a.dst < b.dst;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

Tangle encode(const State& state) {
  State s = state.normalized();
  Tangle g;
  NodeId crit = g.add_node(colors::criticals());
  g.set_active(crit);
  std::unordered_map<hf::Value, NodeId, hf::ValueHash> ids;

  std::function<NodeId(const hf::Value&)> intern = [&](const hf::Value& v) -> NodeId {
    if (auto it = ids.find(v); it != ids.end()) return it->second;
    NodeId id = 0;
    switch (v.kind()) {
      case hf::Kind::atom:
        id = g.add_node(colors::atom(), v.atom_name());
        break;
      case hf::Kind::set: {
        std::vector<NodeId> ms;
        for (const auto& m : v.members()) ms.push_back(intern(m));
        id = g.add_node(colors::set());
        for (NodeId m : ms) g.add_edge(m, labels::member(), id);
        break;
      }
      case hf::Kind::pair: {
        NodeId a = intern(v.first());
        NodeId b = intern(v.second());
        id = g.add_node(colors::pair());
        g.add_edge(a, labels::first(), id);
        g.add_edge(b, labels::second(), id);
        break;
      }
    }
    ids.emplace(v, id);
    return id;
  };

  g.add_edge(crit, labels::empty_register(), intern(hf::empty()));
  for (const auto& [name, v] : s.terms) g.add_edge(crit, Symbol(name), intern(v));
  for (const auto& [loc, v] : s.locations) {
    std::vector<NodeId> args;
    for (const auto& a : loc.args) args.push_back(intern(a));
    NodeId val = intern(v);
    NodeId tuple = g.add_node(colors::tuple());
    g.add_edge(crit, Symbol(loc.function), tuple);
    for (std::size_t i = 0; i < args.size(); ++i) {
      g.add_edge(tuple, labels::position(static_cast<int>(i + 1)), args[i]);
    }
    g.add_edge(tuple, labels::value(), val);
  }
  return g;
}

namespace {

class Decoder {
 public:
  explicit Decoder(const Tangle& g) : g_(g), state_(g.node_count(), 0) {}

  const hf::Value& value(NodeId id) {
    if (state_[id] == 2) return memo_.at(id);
    if (state_[id] == 1) throw MalformedTangle("containment cycle at node " + std::to_string(id));
    state_[id] = 1;
    const Node& n = g_.node(id);
    hf::Value v;
    switch (n.kind) {
      case NodeKind::atom:
        v = hf::Value::atom(n.atom);
        break;
      case NodeKind::set: {
        std::vector<hf::Value> ms;
        for (const auto& e : n.in) {
          if (e.label == labels::member()) ms.push_back(value(e.node));
        }
        v = hf::Value::set(std::move(ms));
        break;
      }
      case NodeKind::pair: {
        std::optional<NodeId> a, b;
        for (const auto& e : n.in) {
          if (e.label == labels::first()) {
            if (a) throw MalformedTangle("pair node " + std::to_string(id) + " has two firsts");
            a = e.node;
          } else if (e.label == labels::second()) {
            if (b) throw MalformedTangle("pair node " + std::to_string(id) + " has two seconds");
            b = e.node;
          }
        }
        if (!a || !b) throw MalformedTangle("pair node " + std::to_string(id) + " is incomplete");
        hf::Value first = value(*a);
        v = hf::Value::pair(first, value(*b));
        break;
      }
      default:
        throw MalformedTangle("node " + std::to_string(id) + " of kind " +
                              std::string(kind_name(n.kind)) + " does not hold a value");
    }
    auto [it, inserted] = owner_.try_emplace(v, id);
    if (!inserted && it->second != id) {
      throw MalformedTangle("duplicate value nodes " + std::to_string(it->second) + " and " +
                            std::to_string(id) + " for " + hf::to_string(v));
    }
    state_[id] = 2;
    return memo_.emplace(id, std::move(v)).first->second;
  }

 private:
  const Tangle& g_;
  std::vector<std::uint8_t> state_;
  std::unordered_map<NodeId, hf::Value> memo_;
  std::unordered_map<hf::Value, NodeId, hf::ValueHash> owner_;
};

}  // namespace

hf::Value decode_node(const Tangle& g, NodeId id) {
  Decoder d(g);
  return d.value(id);
}

State decode(const Tangle& g) {
  auto crit = g.criticals();
  if (!crit) throw MalformedTangle("no criticals node");
  Decoder d(g);
  State s;
  for (const auto& e : g.node(*crit).out) {
    if (labels::is_internal(e.label)) continue;
    const Node& target = g.node(e.node);
    if (target.kind == NodeKind::tuple) {
      Location loc{e.label.str(), {}};
      std::map<int, NodeId> args;
      std::optional<NodeId> val;
      for (const auto& te : target.out) {
        const auto& l = te.label.str();
        if (te.label == labels::value()) {
          val = te.node;
        } else if (!l.empty() && l[0] == '#') {
          args[std::stoi(l.substr(1))] = te.node;
        }
      }
      int expect = 1;
      for (const auto& [pos, node] : args) {
        if (pos != expect++) throw MalformedTangle("tuple with a gap in its positions");
        loc.args.push_back(d.value(node));
      }
      hf::Value v = val ? d.value(*val) : hf::empty();
      if (!s.locations.emplace(std::move(loc), v).second) {
        throw MalformedTangle("two tuples for one location of " + e.label.str());
      }
    } else if (target.kind == NodeKind::atom || target.kind == NodeKind::set ||
               target.kind == NodeKind::pair) {
      if (!s.terms.emplace(e.label.str(), d.value(e.node)).second) {
        throw MalformedTangle("critical term " + e.label.str() + " has two values");
      }
    } else {
      throw MalformedTangle("dangling critical edge " + e.label.str());
    }
  }
  return s.normalized();
}

std::optional<NodeId> find_value_node(const Tangle& g, const hf::Value& v) {
  Decoder d(g);
  std::optional<NodeId> found;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto k = g.node(i).kind;
    if (k != NodeKind::atom && k != NodeKind::set && k != NodeKind::pair) continue;
    if (d.value(i) == v) {
      if (found) throw MalformedTangle("duplicate value nodes for " + hf::to_string(v));
      found = i;
    }
  }
  return found;
}

// ---------------------------------------------------------------------------
// Invariants

namespace {

bool has_containment_cycle(const Tangle& g) {
  // Kahn's algorithm over containment edges only.
  std::vector<std::uint32_t> indeg(g.node_count(), 0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (const auto& e : g.node(i).out) {
      if (labels::is_containment(e.label)) ++indeg[e.node];
    }
  }
  std::vector<NodeId> ready;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    NodeId n = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& e : g.node(n).out) {
      if (labels::is_containment(e.label) && --indeg[e.node] == 0) ready.push_back(e.node);
    }
  }
  return seen != g.node_count();
}

// Bottom-up structural ids for committed nodes; equal ids <=> equal values.
class Canonicalizer {
 public:
  explicit Canonicalizer(const Tangle& g) : g_(g), ids_(g.node_count(), kUnset) {}

  std::uint32_t id(NodeId n, std::vector<std::string>& problems) {
    if (ids_[n] != kUnset) return ids_[n];
    const Node& node = g_.node(n);
    std::vector<std::uint32_t> key;
    switch (node.kind) {
      case NodeKind::atom: {
        auto [it, _] = atoms_.try_emplace(node.atom, atoms_.size());
        key = {0, it->second};
        break;
      }
      case NodeKind::set: {
        key.push_back(1);
        std::vector<std::uint32_t> ms;
        for (const auto& e : node.in) {
          if (e.label != labels::member()) continue;
          auto k = g_.node(e.node).kind;
          if (k != NodeKind::atom && k != NodeKind::set && k != NodeKind::pair) {
            problems.push_back("set " + std::to_string(n) + " has a non-value member " +
                               std::to_string(e.node));
            continue;
          }
          ms.push_back(id(e.node, problems));
        }
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
        key.insert(key.end(), ms.begin(), ms.end());
        break;
      }
      case NodeKind::pair: {
        std::vector<NodeId> a, b;
        for (const auto& e : node.in) {
          if (e.label == labels::first()) a.push_back(e.node);
          if (e.label == labels::second()) b.push_back(e.node);
        }
        if (a.size() != 1 || b.size() != 1) {
          problems.push_back("malformed pair " + std::to_string(n));
          key = {3, n};
        } else {
          key = {2, id(a[0], problems), id(b[0], problems)};
        }
        break;
      }
      default:
        key = {4, n};
        break;
    }
    auto [it, _] = table_.try_emplace(std::move(key), table_.size());
    ids_[n] = it->second;
    return it->second;
  }

 private:
  static constexpr std::uint32_t kUnset = UINT32_MAX;
  const Tangle& g_;
  std::vector<std::uint32_t> ids_;
  std::map<std::string, std::uint32_t> atoms_;
  std::map<std::vector<std::uint32_t>, std::uint32_t> table_;
};

}  // namespace

std::vector<std::string> check_invariants(const Tangle& g, InvariantLevel level) {
  std::vector<std::string> out;
  std::size_t crit_count = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.node(i).kind == NodeKind::criticals) ++crit_count;
  }
  if (crit_count == 0) out.push_back("no criticals");
  if (crit_count > 1) out.push_back("multiple criticals");
  if (g.node_count() > 0 && g.node(g.active()).kind != NodeKind::criticals) {
    out.push_back("active node is not criticals");
  }
  if (has_containment_cycle(g)) {
    out.push_back("containment cycle");
    return out;  // value ids are undefined on cyclic structure
  }
  if (level == InvariantLevel::structural) return out;

  Canonicalizer canon(g);
  std::map<std::uint32_t, NodeId> owner;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto k = g.node(i).kind;
    if (k != NodeKind::atom && k != NodeKind::set && k != NodeKind::pair) continue;
    auto id = canon.id(i, out);
    auto [it, inserted] = owner.try_emplace(id, i);
    if (!inserted) {
      out.push_back("duplicate value nodes " + std::to_string(it->second) + " and " +
                    std::to_string(i));
    }
  }
  // One tuple per (function, argument nodes).
  std::map<std::pair<std::string, std::vector<NodeId>>, NodeId> tuples;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.node(i).kind != NodeKind::tuple) continue;
    std::vector<std::pair<int, NodeId>> args;
    int vals = 0;
    for (const auto& e : g.node(i).out) {
      const auto& l = e.label.str();
      if (e.label == labels::value()) ++vals;
      else if (!l.empty() && l[0] == '#') args.emplace_back(std::stoi(l.substr(1)), e.node);
    }
    if (vals > 1) out.push_back("tuple " + std::to_string(i) + " has several values");
    std::sort(args.begin(), args.end());
    std::vector<NodeId> arg_nodes;
    for (auto& [p, n] : args) arg_nodes.push_back(n);
    for (const auto& e : g.node(i).in) {
      if (g.node(e.node).kind != NodeKind::criticals) continue;
      auto [it, inserted] = tuples.try_emplace({e.label.str(), arg_nodes}, i);
      if (!inserted) {
        out.push_back("duplicate tuples " + std::to_string(it->second) + " and " +
                      std::to_string(i));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text formats

std::string to_snapshot(const Tangle& g) {
  std::ostringstream out;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const Node& n = g.node(i);
    out << "node " << i << " " << n.color.str() << " " << kind_name(n.kind);
    if (n.kind == NodeKind::atom) out << " " << n.atom;
    out << "\n";
  }
  for (const auto& e : g.edges()) {
    out << "edge " << e.src << " " << e.label.str() << " " << e.dst << "\n";
  }
  out << "active " << g.active() << "\n";
  return out.str();
}

Tangle parse_snapshot(std::string_view text) {
  Tangle g;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "node") {
      NodeId id;
      std::string color, kind, atom;
      if (!(ls >> id >> color >> kind)) throw ParseError("malformed node line", lineno, 1);
      ls >> atom;
      if (id != g.node_count()) throw ParseError("node ids must be dense and sorted", lineno, 1);
      g.add_node(Symbol(color), atom);
    } else if (kw == "edge") {
      NodeId s, d;
      std::string label;
      if (!(ls >> s >> label >> d)) throw ParseError("malformed edge line", lineno, 1);
      if (s >= g.node_count() || d >= g.node_count()) {
        throw ParseError("edge to unknown node", lineno, 1);
      }
      g.add_edge(s, Symbol(label), d);
    } else if (kw == "active") {
      NodeId a;
      if (!(ls >> a) || a >= g.node_count()) throw ParseError("malformed active line", lineno, 1);
      g.set_active(a);
    } else {
      throw ParseError("unknown keyword '" + kw + "'", lineno, 1);
    }
  }
  return g;
}

std::string to_dot(const Tangle& g) {
  std::ostringstream out;
  out << "digraph tangle {\n";
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const Node& n = g.node(i);
    out << "  n" << i << " [label=\"" << i << ":" << n.color.str();
    if (n.kind == NodeKind::atom) out << "(" << n.atom << ")";
    out << "\"";
    if (i == g.active()) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& e : g.edges()) {
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.label.str() << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace dynca
