#include "flowvs/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "flowvs/errors.hpp"

namespace flowvs {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!t.header.empty()) throw FormatError("csv: comment after header", line_no);
      t.comments.emplace_back(line.substr(1));
      continue;
    }
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw FormatError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(t.header.size()),
                        line_no);
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw FormatError("csv: missing header row", line_no);
  return t;
}

double parse_number(std::string_view s, std::size_t line) {
  const std::string str(s);
  if (str == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size())
    throw FormatError("csv: not a number '" + str + "'", line);
  return v;
}

}  // namespace flowvs
