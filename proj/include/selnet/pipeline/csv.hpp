// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace selnet::pipeline {

/// Parsed CSV: '#' lines are collected as comments, blank lines skipped.
/// Quoted fields follow RFC 4180 (doubled quotes, embedded commas and newlines).
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  /// Index of a header column, or DataError naming it.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_field(std::string_view value);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest text that round-trips to the same double.
std::string format_double(double v);

/// Strict full-cell parse; DataError names source, row and column on failure.
double parse_double(const std::string& cell, const std::string& source, std::size_t row, std::string_view column);

}  // namespace selnet::pipeline
