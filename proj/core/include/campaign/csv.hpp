#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace campaign::csv {

// Minimal comma-separated reader/writer. Fields never contain commas or
// quotes in any of the formats this project produces, so no quoting is
// supported. Numbers are written in shortest round-trip form and parsed
// without locale dependence.

std::string format_double(double value);

double parse_double(std::string_view field, std::size_t line);
std::int64_t parse_int(std::string_view field, std::size_t line);

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

class Table {
 public:
  static Table read(std::istream& in);
  static Table read_file(const std::string& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  /// Index of a named column; throws InputError naming the column if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(std::int64_t value);
  Writer& field(int value) { return field(static_cast<std::int64_t>(value)); }
  Writer& field(std::size_t value) {
    return field(static_cast<std::int64_t>(value));
  }
  void end_row();

  void row(std::initializer_list<std::string_view> fields);

 private:
  std::ostream& out_;
  bool first_ = true;
};

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace campaign::csv
