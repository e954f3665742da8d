#pragma once

// The automaton's state: a colored directed graph holding one node per
// distinct value, with containment edges reversed (member -> set) and a
// distinguished Criticals node whose labeled out-edges give the values of
// the critical terms.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynca/error.hpp"
#include "dynca/hfset.hpp"
#include "dynca/state.hpp"
#include "dynca/symbol.hpp"

namespace dynca {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { atom, set, pair, tuple, criticals, scratch };

/// Kind is the color's prefix up to the first '.': `set.tested` is still a
/// set, `crit.e3` is the Criticals node. Unknown prefixes are scratch.
NodeKind kind_of_color(std::string_view color);
std::string_view kind_name(NodeKind kind);

/// Built-in colors and labels of the encoding.
namespace colors {
Symbol atom();
Symbol set();
Symbol pair();
Symbol tuple();
Symbol criticals();
}  // namespace colors

namespace labels {
/// Element edge, member -> set.
Symbol member();
/// Element edge temporarily marked by a multi-tick protocol.
Symbol member_marked();
/// Pair components, component -> pair.
Symbol first();
Symbol second();
/// tuple -> value of the location.
Symbol value();
/// tuple -> i-th argument (1-based).
Symbol position(int i);
/// Criticals -> the empty-set node. Always present so that {} is reachable.
Symbol empty_register();
/// Labels starting with '@' are internal registers, not critical terms.
bool is_internal(Symbol label);
bool is_containment(Symbol label);
}  // namespace labels

struct HalfEdge {
  Symbol label;
  NodeId node;
};

struct Node {
  Symbol color;
  NodeKind kind = NodeKind::scratch;
  /// Atom identity; inert payload that patterns never see.
  std::string atom;
  std::vector<HalfEdge> out;
  std::vector<HalfEdge> in;
};

struct Edge {
  NodeId src;
  Symbol label;
  NodeId dst;
};

class MalformedTangle : public Error {
 public:
  using Error::Error;
};

class Tangle {
 public:
  NodeId add_node(Symbol color, std::string atom = {});
  /// Edge sets are sets: returns false when the edge already exists.
  bool add_edge(NodeId src, Symbol label, NodeId dst);
  bool remove_edge(NodeId src, Symbol label, NodeId dst);
  bool has_edge(NodeId src, Symbol label, NodeId dst) const;
  void recolor(NodeId id, Symbol color);

  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  NodeId active() const { return active_; }
  void set_active(NodeId id) { active_ = id; }

  /// First node of kind criticals, if any.
  std::optional<NodeId> criticals() const;
  /// Target of `src`'s unique out-edge with `label`, if any.
  std::optional<NodeId> target(NodeId src, Symbol label) const;

  /// All edges sorted by (src, label text, dst).
  std::vector<Edge> edges() const;

 private:
  std::vector<Node> nodes_;
  std::size_t edge_count_ = 0;
  NodeId active_ = 0;
};

Tangle encode(const State& state);

/// Values of the critical terms and locations. Throws MalformedTangle on a
/// dangling critical edge, a containment cycle, or two reachable nodes
/// holding the same value.
State decode(const Tangle& g);

/// Value held by a committed node. Throws MalformedTangle.
hf::Value decode_node(const Tangle& g, NodeId id);

/// The committed node holding `v`, if any.
std::optional<NodeId> find_value_node(const Tangle& g, const hf::Value& v);

enum class InvariantLevel {
  /// Single Criticals, containment acyclicity.
  structural,
  /// Structural plus node-per-value uniqueness and well-formed pairs/tuples.
  full,
};

/// Empty iff every invariant at `level` holds.
std::vector<std::string> check_invariants(const Tangle& g,
                                          InvariantLevel level = InvariantLevel::full);

/// `node <id> <color> <kind> [atom]` and `edge <src> <label> <dst>` lines,
/// then `active <id>`, sorted for diffable output.
std::string to_snapshot(const Tangle& g);
Tangle parse_snapshot(std::string_view text);

std::string to_dot(const Tangle& g);

}  // namespace dynca
