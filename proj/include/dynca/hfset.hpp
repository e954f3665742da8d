#pragma once

// Hereditarily finite values over a finite set of atoms: the unordered
// domain the automaton simulates, and the oracle every encoding is checked
// against.

#include <compare>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dynca/error.hpp"

namespace dynca::hf {

enum class Kind : std::uint8_t { atom, set, pair };

/// Immutable HF value with structural equality.
///
/// Set members are kept deduplicated and sorted by the structural order, so
/// two sets built from the same members in any order share one canonical
/// representation.
class Value {
 public:
  /// The empty set.
  Value();

  static Value atom(std::string name);
  static Value set(std::vector<Value> members);
  static Value pair(Value first, Value second);

  Kind kind() const { return rep_->kind; }
  bool is_atom() const { return kind() == Kind::atom; }
  bool is_set() const { return kind() == Kind::set; }
  bool is_pair() const { return kind() == Kind::pair; }

  const std::string& atom_name() const;
  std::span<const Value> members() const;
  const Value& first() const;
  const Value& second() const;

  std::size_t hash() const { return rep_->hash; }
  /// atoms: 0; sets and pairs: 1 + deepest child (the empty set has depth 1).
  std::size_t depth() const { return rep_->depth; }
  /// Largest member count of any set inside this value, itself included.
  std::size_t max_width() const { return rep_->max_width; }

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  struct Rep {
    Kind kind = Kind::set;
    std::string name;
    std::vector<Value> children;
    std::size_t hash = 0;
    std::size_t depth = 1;
    std::size_t max_width = 0;
  };
  explicit Value(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  static Value finish(Rep rep);

  std::shared_ptr<const Rep> rep_;
};

struct ValueHash {
  std::size_t operator()(const Value& v) const noexcept { return v.hash(); }
};

Value empty();
Value singleton(const Value& v);
/// Throws TypeError unless both arguments are sets.
Value set_union(const Value& s, const Value& t);
/// Throws TypeError unless `s` is a set.
bool member(const Value& v, const Value& s);
Value pair(const Value& first, const Value& second);

/// Members of `s` in canonical order. Throws TypeError for non-sets.
std::span<const Value> members_of(const Value& s);

/// Picks a member of `s` using `rng`. Throws EmptyChoice / TypeError.
Value choose(const Value& s, std::mt19937_64& rng);
/// Deterministic in `seed`.
Value choose(const Value& s, std::uint64_t seed);

/// Uniform index in [0, n) that does not depend on the standard library's
/// distribution implementation.
std::size_t pick_index(std::mt19937_64& rng, std::size_t n);

struct Limits {
  std::size_t max_depth = 16;
  std::size_t max_width = 1024;
};

/// Throws LimitError when `v` exceeds `limits`.
void check_limits(const Value& v, const Limits& limits);

/// Opaque identity: equal values get equal ids within one Universe.
struct CanonicalId {
  std::uint64_t value = 0;
  friend auto operator<=>(const CanonicalId&, const CanonicalId&) = default;
};

/// Hash-consing table. Ids are dense and assigned in first-seen order.
class Universe {
 public:
  CanonicalId canonical_id(const Value& v);
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<Value, std::uint64_t, ValueHash> ids_;
};

/// `{}`, `{a, {b}}`, `<a, b>`; members printed in canonical order.
std::string to_string(const Value& v);

/// Parses the textual value syntax. Bare identifiers are atoms; when
/// `atoms` is non-empty every atom must be listed there.
Value parse_value(std::string_view text, std::span<const std::string> atoms = {});

/// Parses one value starting at `pos` (leading blanks skipped) and leaves
/// `pos` just past it. `line` is only used for error positions.
Value parse_value_prefix(std::string_view text, std::size_t& pos,
                         std::span<const std::string> atoms = {}, int line = 1);

/// Applies an atom renaming; atoms missing from `perm` are left unchanged.
Value rename_atoms(const Value& v, const std::unordered_map<std::string, std::string>& perm);

}  // namespace dynca::hf
