#include "dynca/symbol.hpp"

#include <deque>
#include <mutex>
#include <unordered_map>

namespace dynca {
namespace {

struct InternTable {
  std::mutex mu;
  std::deque<std::string> texts{std::string{}};
  std::unordered_map<std::string_view, std::uint32_t> index{{std::string_view{}, 0}};
};

InternTable& table() {
  static InternTable t;
  return t;
}

}  // namespace

Symbol::Symbol(std::string_view text) {
  auto& t = table();
  std::lock_guard lock(t.mu);
  if (auto it = t.index.find(text); it != t.index.end()) {
    id_ = it->second;
    return;
  }
  id_ = static_cast<std::uint32_t>(t.texts.size());
  t.texts.emplace_back(text);
  t.index.emplace(t.texts.back(), id_);
}

const std::string& Symbol::str() const {
  auto& t = table();
  std::lock_guard lock(t.mu);
  return t.texts[id_];
}

}  // namespace dynca
