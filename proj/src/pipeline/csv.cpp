// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>

#include "selnet/errors.hpp"

namespace selnet::pipeline {

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable table;
  std::size_t i = 0, line = 1;
  bool have_header = false;
  while (i < text.size()) {
    const std::size_t record_line = line;
    // Comment and blank lines are only recognized at the start of a record.
    if (text[i] == '#') {
      const std::size_t end = text.find('\n', i);
      std::string_view c = text.substr(i + 1, end == std::string_view::npos ? std::string_view::npos : end - i - 1);
      if (!c.empty() && c.back() == '\r') c.remove_suffix(1);
      table.comments.emplace_back(c);
      i = end == std::string_view::npos ? text.size() : end + 1;
      ++line;
      continue;
    }
    if (text[i] == '\n' || text[i] == '\r') {
      if (text[i] == '\n') ++line;
      ++i;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    bool quoted_field = false;
    bool done = false;
    while (!done) {
      if (i >= text.size()) {
        fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (quoted_field) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            quoted_field = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (quoted_field && i >= text.size()) {
          throw DataError(source + ":" + std::to_string(record_line) + ": unterminated quoted field");
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty()) {
            throw DataError(source + ":" + std::to_string(line) + ": quote inside an unquoted field");
          }
          quoted_field = true;
          ++i;
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          fields.push_back(std::move(field));
          ++i;
          ++line;
          done = true;
          break;
        default:
          field.push_back(c);
          ++i;
      }
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(source + ":" + std::to_string(record_line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(record_line);
  }
  if (!have_header) throw DataError(source + ": no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text, path.string());
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos && (value.empty() || value.front() != '#')) {
    return std::string(value);
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& source, std::size_t row, std::string_view column) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  if (begin < end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (begin == end || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw DataError(source + ": row " + std::to_string(row) + ", column '" + std::string(column) +
                    "': not a finite number: '" + cell + "'");
  }
  return v;
}

}  // namespace selnet::pipeline
