#pragma once

// Minimal numeric CSV I/O for the run artifacts. Numbers are written with 17
// significant digits so files round-trip doubles exactly.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibt::csv {

inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << number(values[i]);
  }
  out << '\n';
}

/// A leading value followed by a series, e.g. t_fs then density values.
inline void write_row(std::ostream& out, double lead, std::span<const double> values) {
  out << number(lead);
  for (double v : values) out << ',' << number(v);
  out << '\n';
}

inline void write_header(std::ostream& out, std::span<const std::string> names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
}

inline std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    // strtod rather than stod: subnormal values set ERANGE but parse fine.
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || !std::isfinite(v)) throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
    while (*end == ' ' || *end == '\r') ++end;
    if (*end != '\0') throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::vector<double>> read_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_row(line));
  }
  return rows;
}

}  // namespace ibt::csv
