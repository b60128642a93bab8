#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hgm::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

// Comma separated, '\n' line ends, fields quoted only when they contain a
// comma, quote or line break. Every row must match the header width.
std::string to_csv(const CsvTable& table);

// Inverse of to_csv. Throws ParseError with the 1-based line number on
// unterminated quotes or ragged rows.
CsvTable parse_csv(std::string_view text);

// Shortest decimal form that reads back to the same double.
std::string format_real(double value);
std::string format_optional(const std::optional<double>& value);

}  // namespace hgm::cli
