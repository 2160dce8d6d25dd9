#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flowvs {

/// Decimal text with 9 significant digits ("%.9g"); NaN prints as "nan".
std::string format_number(double v);

/// Comma-separated table with one header row. Lines starting with '#' are
/// kept as comments and may only precede the header.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// Throws FormatError (offset = 1-based line number) on ragged rows or a
/// missing header.
CsvTable parse_csv(std::string_view text);

/// Strict number parse; accepts "nan"/"inf". Throws FormatError.
double parse_number(std::string_view s, std::size_t line = 0);

}  // namespace flowvs
