#include "dynca/hfset.hpp"

#include <algorithm>
#include <cctype>

namespace dynca::hf {
namespace {

constexpr std::size_t kAtomSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::size_t kSetSeed = 0xc2b2ae3d27d4eb4fULL;
constexpr std::size_t kPairSeed = 0x165667b19e3779f9ULL;

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

const Value& empty_value() {
  static const Value v = Value::set({});
  return v;
}

}  // namespace

Value::Value() : rep_(empty_value().rep_) {}

Value Value::finish(Rep rep) {
  std::size_t h = 0;
  switch (rep.kind) {
    case Kind::atom:
      h = mix(kAtomSeed, std::hash<std::string>{}(rep.name));
      rep.depth = 0;
      rep.max_width = 0;
      break;
    case Kind::set: {
      h = kSetSeed;
      std::size_t depth = 0;
      std::size_t width = rep.children.size();
      for (const auto& c : rep.children) {
        h = mix(h, c.hash());
        depth = std::max(depth, c.depth());
        width = std::max(width, c.max_width());
      }
      rep.depth = depth + 1;
      rep.max_width = width;
      break;
    }
    case Kind::pair: {
      h = mix(mix(kPairSeed, rep.children[0].hash()), rep.children[1].hash());
      rep.depth = std::max(rep.children[0].depth(), rep.children[1].depth()) + 1;
      rep.max_width = std::max(rep.children[0].max_width(), rep.children[1].max_width());
      break;
    }
  }
  rep.hash = h;
  return Value(std::make_shared<const Rep>(std::move(rep)));
}

Value Value::atom(std::string name) {
  Rep r;
  r.kind = Kind::atom;
  r.name = std::move(name);
  return finish(std::move(r));
}

Value Value::set(std::vector<Value> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  Rep r;
  r.kind = Kind::set;
  r.children = std::move(members);
  return finish(std::move(r));
}

Value Value::pair(Value first, Value second) {
  Rep r;
  r.kind = Kind::pair;
  r.children = {std::move(first), std::move(second)};
  return finish(std::move(r));
}

const std::string& Value::atom_name() const {
  if (!is_atom()) throw TypeError("atom_name() on a non-atom");
  return rep_->name;
}

std::span<const Value> Value::members() const {
  if (!is_set()) throw TypeError("members() on a non-set: " + to_string(*this));
  return rep_->children;
}

const Value& Value::first() const {
  if (!is_pair()) throw TypeError("first() on a non-pair");
  return rep_->children[0];
}

const Value& Value::second() const {
  if (!is_pair()) throw TypeError("second() on a non-pair");
  return rep_->children[1];
}

bool operator==(const Value& a, const Value& b) {
  if (a.rep_ == b.rep_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  if (a.is_atom()) return a.rep_->name == b.rep_->name;
  return a.rep_->children == b.rep_->children;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.rep_ == b.rep_) return std::strong_ordering::equal;
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  if (a.is_atom()) return a.rep_->name <=> b.rep_->name;
  const auto& x = a.rep_->children;
  const auto& y = b.rep_->children;
  return std::lexicographical_compare_three_way(x.begin(), x.end(), y.begin(), y.end());
}

Value empty() { return Value(); }

Value singleton(const Value& v) { return Value::set({v}); }

Value set_union(const Value& s, const Value& t) {
  if (!s.is_set() || !t.is_set()) {
    throw TypeError("union of non-sets: " + to_string(s) + " U " + to_string(t));
  }
  std::vector<Value> out;
  out.reserve(s.members().size() + t.members().size());
  std::set_union(s.members().begin(), s.members().end(), t.members().begin(),
                 t.members().end(), std::back_inserter(out));
  return Value::set(std::move(out));
}

bool member(const Value& v, const Value& s) {
  if (!s.is_set()) throw TypeError("membership in a non-set: " + to_string(s));
  return std::binary_search(s.members().begin(), s.members().end(), v);
}

Value pair(const Value& first, const Value& second) { return Value::pair(first, second); }

std::span<const Value> members_of(const Value& s) {
  if (!s.is_set()) throw TypeError("expected a set, got " + to_string(s));
  return s.members();
}

std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
  // Rejection sampling keeps the draw unbiased and portable.
  const std::uint64_t range = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

Value choose(const Value& s, std::mt19937_64& rng) {
  if (!s.is_set()) throw TypeError("choose from a non-set: " + to_string(s));
  if (s.members().empty()) throw EmptyChoice("choose from the empty set");
  return s.members()[pick_index(rng, s.members().size())];
}

Value choose(const Value& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return choose(s, rng);
}

void check_limits(const Value& v, const Limits& limits) {
  if (v.depth() > limits.max_depth) {
    throw LimitError("value depth " + std::to_string(v.depth()) + " exceeds limit " +
                     std::to_string(limits.max_depth));
  }
  if (v.max_width() > limits.max_width) {
    throw LimitError("set width " + std::to_string(v.max_width()) + " exceeds limit " +
                     std::to_string(limits.max_width));
  }
}

CanonicalId Universe::canonical_id(const Value& v) {
  auto [it, inserted] = ids_.try_emplace(v, ids_.size());
  return CanonicalId{it->second};
}

namespace {

void print(const Value& v, std::string& out) {
  switch (v.kind()) {
    case Kind::atom:
      out += v.atom_name();
      break;
    case Kind::set: {
      out += '{';
      bool first = true;
      for (const auto& m : v.members()) {
        if (!first) out += ", ";
        first = false;
        print(m, out);
      }
      out += '}';
      break;
    }
    case Kind::pair:
      out += '<';
      print(v.first(), out);
      out += ", ";
      print(v.second(), out);
      out += '>';
      break;
  }
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t pos, std::span<const std::string> atoms, int line)
      : text_(text), pos_(pos), atoms_(atoms), line_(line) {}

  Value parse() {
    skip_blank();
    if (pos_ >= text_.size()) fail("expected a value");
    char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      std::vector<Value> members;
      skip_blank();
      if (peek('}')) {
        ++pos_;
        return Value::set({});
      }
      while (true) {
        members.push_back(parse());
        skip_blank();
        if (peek(',')) {
          ++pos_;
          continue;
        }
        expect('}');
        break;
      }
      return Value::set(std::move(members));
    }
    if (c == '<') {
      ++pos_;
      Value a = parse();
      skip_blank();
      expect(',');
      Value b = parse();
      skip_blank();
      expect('>');
      return Value::pair(std::move(a), std::move(b));
    }
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (!atoms_.empty() && std::find(atoms_.begin(), atoms_.end(), name) == atoms_.end()) {
        pos_ = start;
        fail("undeclared atom '" + name + "'");
      }
      return Value::atom(std::move(name));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::size_t pos() const { return pos_; }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
  }
  void skip_blank() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_;
  std::span<const std::string> atoms_;
  int line_;
};

}  // namespace

std::string to_string(const Value& v) {
  std::string out;
  print(v, out);
  return out;
}

Value parse_value_prefix(std::string_view text, std::size_t& pos,
                         std::span<const std::string> atoms, int line) {
  ValueParser p(text, pos, atoms, line);
  Value v = p.parse();
  pos = p.pos();
  return v;
}

Value parse_value(std::string_view text, std::span<const std::string> atoms) {
  std::size_t pos = 0;
  Value v = parse_value_prefix(text, pos, atoms);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) {
    throw ParseError("trailing input after value", 1, static_cast<int>(pos) + 1);
  }
  return v;
}

Value rename_atoms(const Value& v, const std::unordered_map<std::string, std::string>& perm) {
  switch (v.kind()) {
    case Kind::atom: {
      auto it = perm.find(v.atom_name());
      return it == perm.end() ? v : Value::atom(it->second);
    }
    case Kind::set: {
      std::vector<Value> ms;
      ms.reserve(v.members().size());
      for (const auto& m : v.members()) ms.push_back(rename_atoms(m, perm));
      return Value::set(std::move(ms));
    }
    case Kind::pair:
      return Value::pair(rename_atoms(v.first(), perm), rename_atoms(v.second(), perm));
  }
  return v;
}

}  // namespace dynca::hf
