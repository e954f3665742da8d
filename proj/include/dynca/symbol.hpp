#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace dynca {

/// Interned string used for node colors and edge labels.
///
/// Equality is an integer compare. Interning is process-wide and
/// thread-safe; ids depend on interning order, so anything that must be
/// reproducible sorts by `str()` rather than by `id()`.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view text);

  const std::string& str() const;
  std::uint32_t id() const { return id_; }
  bool empty() const { return id_ == 0; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }

 private:
  std::uint32_t id_ = 0;
};

/// Orders symbols by their text.
struct SymbolTextLess {
  bool operator()(Symbol a, Symbol b) const { return a.str() < b.str(); }
};

}  // namespace dynca

template <>
struct std::hash<dynca::Symbol> {
  std::size_t operator()(dynca::Symbol s) const noexcept { return s.id(); }
};
