#include "campaign_cli/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "campaign/errors.hpp"

namespace campaign::cli::toml {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool is_bare_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

// Removes a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

std::string parse_string(std::string_view v, std::size_t line) {
  if (v.size() < 2 || v.back() != '"') throw ParseError(line, "unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    char c = v[i];
    if (c == '"') throw ParseError(line, "unexpected quote inside string");
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i + 1 > v.size() - 1) throw ParseError(line, "dangling escape");
    switch (v[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: throw ParseError(line, std::string("unsupported escape \\") + v[i]);
    }
  }
  return out;
}

Value parse_value(std::string_view v, std::size_t line) {
  if (v.empty()) throw ParseError(line, "missing value");
  if (v.front() == '"') return parse_string(v, line);
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[' || v.front() == '{')
    throw ParseError(line, "arrays and inline tables are not supported");

  std::string digits;
  for (char c : v)
    if (c != '_') digits += c;
  std::string_view d = digits;
  if (!d.empty() && d.front() == '+') d.remove_prefix(1);
  const bool looks_float = d.find_first_of(".eE") != std::string_view::npos || d == "inf" ||
                           d == "-inf" || d == "nan";
  if (!looks_float) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), i);
    if (ec == std::errc() && p == d.data() + d.size()) return i;
    throw ParseError(line, "invalid value '" + std::string(v) + "'");
  }
  double x = 0.0;
  auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), x);
  if (ec == std::errc() && p == d.data() + d.size()) return x;
  throw ParseError(line, "invalid value '" + std::string(v) + "'");
}

}  // namespace

Document Document::parse(std::istream& in) {
  Document doc;
  doc.tables_[""];
  std::string current;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.size() < 3 || s.back() != ']' || s[1] == '[')
        throw ParseError(line, "malformed table header");
      auto name = trim(s.substr(1, s.size() - 2));
      if (!is_bare_key(name)) throw ParseError(line, "unsupported table name");
      if (doc.tables_.count(name) && !name.empty())
        throw ParseError(line, "table [" + std::string(name) + "] defined twice");
      current = std::string(name);
      doc.tables_[current];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "expected key = value");
    auto key = trim(s.substr(0, eq));
    if (!is_bare_key(key)) throw ParseError(line, "unsupported key '" + std::string(key) + "'");
    auto& table = doc.tables_[current];
    if (table.count(key)) throw ParseError(line, "duplicate key '" + std::string(key) + "'");
    table.emplace(std::string(key), Entry{parse_value(trim(s.substr(eq + 1)), line), line});
  }
  return doc;
}

Document Document::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

const Entry* Document::find(std::string_view table, std::string_view key) const {
  auto t = tables_.find(table);
  if (t == tables_.end()) return nullptr;
  used_.emplace(std::string(table), std::string());
  auto e = t->second.find(key);
  if (e == t->second.end()) return nullptr;
  used_.emplace(std::string(table), std::string(key));
  return &e->second;
}

bool Document::has(std::string_view table, std::string_view key) const {
  auto t = tables_.find(table);
  return t != tables_.end() && t->second.count(key);
}

namespace {

std::string where(std::string_view table, std::string_view key, std::size_t line) {
  std::string name = table.empty() ? std::string(key) : std::string(table) + "." + std::string(key);
  return "line " + std::to_string(line) + ": '" + name + "'";
}

}  // namespace

std::optional<std::int64_t> Document::get_int(std::string_view table, std::string_view key) const {
  const auto* e = find(table, key);
  if (!e) return std::nullopt;
  if (auto p = std::get_if<std::int64_t>(&e->value)) return *p;
  throw InputError(where(table, key, e->line) + " must be an integer");
}

std::optional<double> Document::get_double(std::string_view table, std::string_view key) const {
  const auto* e = find(table, key);
  if (!e) return std::nullopt;
  if (auto p = std::get_if<double>(&e->value)) return *p;
  if (auto p = std::get_if<std::int64_t>(&e->value)) return static_cast<double>(*p);
  throw InputError(where(table, key, e->line) + " must be a number");
}

std::optional<bool> Document::get_bool(std::string_view table, std::string_view key) const {
  const auto* e = find(table, key);
  if (!e) return std::nullopt;
  if (auto p = std::get_if<bool>(&e->value)) return *p;
  throw InputError(where(table, key, e->line) + " must be true or false");
}

std::optional<std::string> Document::get_string(std::string_view table,
                                                std::string_view key) const {
  const auto* e = find(table, key);
  if (!e) return std::nullopt;
  if (auto p = std::get_if<std::string>(&e->value)) return *p;
  throw InputError(where(table, key, e->line) + " must be a string");
}

void Document::reject_unused() const {
  for (const auto& [table, entries] : tables_) {
    if (!table.empty() && !used_.count({table, std::string()}))
      throw InputError("unknown table [" + table + "]");
    for (const auto& [key, entry] : entries)
      if (!used_.count({table, key})) throw InputError(where(table, key, entry.line) + " is not a recognised setting");
  }
}

}  // namespace campaign::cli::toml
