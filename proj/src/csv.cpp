#include "trapline/csv.hpp"

#include <charconv>
#include <cmath>

#include "trapline/error.hpp"

namespace trapline::csv {

Row split(std::string_view line) {
  Row fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(row[i]);
  }
  return out;
}

Reader::Reader(std::istream& in) : in_(in) {}

void Reader::expect_header(const std::vector<std::string>& required) {
  auto row = next();
  if (!row) throw ParseError("missing CSV header", line_ ? line_ : 1);
  header_ = *row;
  index_.clear();
  for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
  for (const auto& name : required) {
    if (!index_.count(name)) throw ParseError("missing column '" + name + "'", line_);
  }
}

std::optional<Row> Reader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    return split(text);
  }
  return std::nullopt;
}

bool Reader::has_column(std::string_view name) const { return index_.find(name) != index_.end(); }

const std::string& Reader::field(const Row& row, std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParseError("missing column '" + std::string(name) + "'", line_);
  if (it->second >= row.size()) {
    throw ParseError("missing column '" + std::string(name) + "'", line_);
  }
  return row[it->second];
}

void Writer::write(const Row& row) { out_ << join(row) << '\n'; }

long long to_int(std::string_view text, std::string_view what, std::size_t line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("non-integer " + std::string(what) + " '" + std::string(text) + "'", line);
  }
  return value;
}

double to_real(std::string_view text, std::string_view what, std::size_t line) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace trapline::csv
