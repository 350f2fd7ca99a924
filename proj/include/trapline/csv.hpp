#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace trapline::csv {

using Row = std::vector<std::string>;

/// Splits one CSV record. Handles RFC 4180 quoting ("" escapes a quote);
/// embedded newlines are not supported.
Row split(std::string_view line);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string quote(std::string_view field);

std::string join(const Row& row);

/// Sequential reader that tracks 1-based line numbers and maps header names
/// to column positions.
class Reader {
 public:
  explicit Reader(std::istream& in);

  /// Reads the header and checks every required column is present.
  void expect_header(const std::vector<std::string>& required);

  /// Next non-blank record, or nullopt at end of input.
  std::optional<Row> next();

  std::size_t line() const { return line_; }
  const Row& header() const { return header_; }

  /// Value of a named column in a row read from this reader.
  const std::string& field(const Row& row, std::string_view name) const;
  bool has_column(std::string_view name) const;

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  Row header_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void write(const Row& row);

 private:
  std::ostream& out_;
};

/// Strict integer / real parsing; throws ParseError naming the line.
long long to_int(std::string_view text, std::string_view what, std::size_t line);
double to_real(std::string_view text, std::string_view what, std::size_t line);

}  // namespace trapline::csv
