#include "dynca/state.hpp"

#include <cctype>
#include <sstream>

namespace dynca {
namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

void skip_blank(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
}

std::string read_ident(std::string_view line, std::size_t& pos, int lineno) {
  skip_blank(line, pos);
  std::size_t start = pos;
  while (pos < line.size() && is_ident_char(line[pos])) ++pos;
  if (start == pos) throw ParseError("expected an identifier", lineno, static_cast<int>(pos) + 1);
  return std::string(line.substr(start, pos - start));
}

void expect(std::string_view line, std::size_t& pos, char c, int lineno) {
  skip_blank(line, pos);
  if (pos >= line.size() || line[pos] != c) {
    throw ParseError(std::string("expected '") + c + "'", lineno, static_cast<int>(pos) + 1);
  }
  ++pos;
}

}  // namespace

State State::normalized() const {
  State out;
  out.terms = terms;
  for (const auto& [loc, v] : locations) {
    if (!(v == hf::empty())) out.locations.emplace(loc, v);
  }
  return out;
}

State parse_state(std::string_view text, std::span<const std::string> atoms) {
  State s;
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t pos = 0;
    skip_blank(line, pos);
    if (pos == line.size()) continue;
    std::string keyword = read_ident(line, pos, lineno);
    if (keyword == "term") {
      std::string name = read_ident(line, pos, lineno);
      expect(line, pos, '=', lineno);
      hf::Value v = hf::parse_value_prefix(line, pos, atoms, lineno);
      if (!s.terms.emplace(name, v).second) {
        throw ParseError("duplicate term '" + name + "'", lineno, 1);
      }
    } else if (keyword == "loc") {
      Location loc;
      loc.function = read_ident(line, pos, lineno);
      expect(line, pos, '(', lineno);
      skip_blank(line, pos);
      if (pos < line.size() && line[pos] == ')') {
        ++pos;
      } else {
        while (true) {
          loc.args.push_back(hf::parse_value_prefix(line, pos, atoms, lineno));
          skip_blank(line, pos);
          if (pos < line.size() && line[pos] == ',') {
            ++pos;
            continue;
          }
          expect(line, pos, ')', lineno);
          break;
        }
      }
      expect(line, pos, '=', lineno);
      hf::Value v = hf::parse_value_prefix(line, pos, atoms, lineno);
      if (!s.locations.emplace(std::move(loc), v).second) {
        throw ParseError("duplicate location", lineno, 1);
      }
    } else {
      throw ParseError("expected 'term' or 'loc'", lineno, 1);
    }
    skip_blank(line, pos);
    if (pos != line.size()) {
      throw ParseError("trailing input", lineno, static_cast<int>(pos) + 1);
    }
    if (end == text.size()) break;
  }
  return s;
}

std::string format_state(const State& s) {
  std::ostringstream out;
  for (const auto& [name, v] : s.terms) out << "term " << name << " = " << hf::to_string(v) << "\n";
  for (const auto& [loc, v] : s.locations) {
    out << "loc " << loc.function << "(";
    for (std::size_t i = 0; i < loc.args.size(); ++i) {
      if (i) out << ", ";
      out << hf::to_string(loc.args[i]);
    }
    out << ") = " << hf::to_string(v) << "\n";
  }
  return out.str();
}

State rename_atoms(const State& s, const std::unordered_map<std::string, std::string>& perm) {
  State out;
  for (const auto& [name, v] : s.terms) out.terms.emplace(name, hf::rename_atoms(v, perm));
  for (const auto& [loc, v] : s.locations) {
    Location l{loc.function, {}};
    for (const auto& a : loc.args) l.args.push_back(hf::rename_atoms(a, perm));
    out.locations.emplace(std::move(l), hf::rename_atoms(v, perm));
  }
  return out;
}

}  // namespace dynca
