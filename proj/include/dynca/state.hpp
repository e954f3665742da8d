#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dynca/hfset.hpp"

namespace dynca {

/// A function location f(a1, ..., ak).
struct Location {
  std::string function;
  std::vector<hf::Value> args;

  friend bool operator==(const Location&, const Location&) = default;
  friend auto operator<=>(const Location& a, const Location& b) {
    if (auto c = a.function <=> b.function; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }
};

/// Values of the critical terms plus the non-default function locations.
///
/// Locations whose value is the empty set are indistinguishable from
/// unassigned ones; `normalized()` drops them so states compare by meaning.
struct State {
  std::map<std::string, hf::Value> terms;
  std::map<Location, hf::Value> locations;

  State normalized() const;
  friend bool operator==(const State&, const State&) = default;
};

/// Reads `term <name> = <value>` and `loc <f>(<values>) = <value>` lines.
/// Blank lines and `#` comments are ignored.
State parse_state(std::string_view text, std::span<const std::string> atoms = {});

/// Canonical text: terms sorted by name, locations sorted, members in
/// canonical order.
std::string format_state(const State& s);

State rename_atoms(const State& s, const std::unordered_map<std::string, std::string>& perm);

}  // namespace dynca
