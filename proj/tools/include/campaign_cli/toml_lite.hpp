#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace campaign::cli::toml {

// Reader for the subset of TOML used by campaign config files: [table]
// headers (one level), bare keys, and scalar values (basic strings, integers,
// floats, booleans). Arrays, inline tables, dotted keys and dates are
// rejected with a ParseError.

using Value = std::variant<bool, std::int64_t, double, std::string>;

struct Entry {
  Value value;
  std::size_t line = 0;
};

class Document {
 public:
  static Document parse(std::istream& in);
  static Document parse(std::string_view text);

  bool has(std::string_view table, std::string_view key) const;

  /// Typed lookups; std::nullopt when absent, InputError (with the source
  /// line) when present with the wrong type. Integers are accepted where a
  /// float is requested.
  std::optional<std::int64_t> get_int(std::string_view table, std::string_view key) const;
  std::optional<double> get_double(std::string_view table, std::string_view key) const;
  std::optional<bool> get_bool(std::string_view table, std::string_view key) const;
  std::optional<std::string> get_string(std::string_view table, std::string_view key) const;

  /// Throws InputError naming the first table or key that no lookup touched.
  void reject_unused() const;

 private:
  const Entry* find(std::string_view table, std::string_view key) const;

  // Top-level keys live under the empty table name.
  std::map<std::string, std::map<std::string, Entry, std::less<>>, std::less<>> tables_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace campaign::cli::toml
