#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

namespace detail {

// Shortest round-trip decimal representation; keeps emitted files
// deterministic across runs.
inline std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
  if (begin < end && *begin == '+') ++begin;  // from_chars rejects a leading plus
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

}  // namespace detail

// One row per time point, one column per panel, comma separated.
inline void write_panel_csv(const Matrix& y, const std::string& path, bool header = false) {
  auto f = detail::open_out(path);
  if (header) {
    for (int k = 0; k < y.cols(); ++k) f << (k ? "," : "") << "panel" << (k + 1);
    f << "\n";
  }
  for (int i = 0; i < y.rows(); ++i) {
    for (int k = 0; k < y.cols(); ++k) {
      if (k) f << ",";
      f << detail::format_double(y(i, k));
    }
    f << "\n";
  }
  if (!f) throw IoError("write failed: " + path);
}

// Accepts an optional single header row; decimals in plain or scientific
// notation.
inline Matrix read_panel_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto toks = detail::split(line, ',');
    std::vector<double> row(toks.size());
    bool ok = true;
    for (std::size_t j = 0; j < toks.size(); ++j)
      if (!detail::parse_double(toks[j], row[j])) { ok = false; break; }
    if (!ok) {
      if (first) { first = false; continue; }  // header row
      throw InvalidSpec("read_panel_csv: non-numeric entry in " + path);
    }
    first = false;
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw InvalidSpec("read_panel_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidSpec("read_panel_csv: no data rows in " + path);
  Matrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return y;
}

inline void write_vector_csv(const Vector& v, const std::string& path) {
  auto f = detail::open_out(path);
  for (int i = 0; i < v.size(); ++i) f << detail::format_double(v[i]) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

inline Vector read_vector_csv(const std::string& path) {
  Matrix m = read_panel_csv(path);
  if (m.cols() != 1)
    throw InvalidSpec("read_vector_csv: expected a single column in " + path);
  return m.col(0);
}

inline void write_matrix_csv(const Matrix& m, const std::string& path) {
  write_panel_csv(m, path, false);
}

// (index, value) pairs, e.g. a CUSUM profile t(i) or a weight vector keyed
// by i.
inline void write_profile_csv(const Vector& values, const std::string& path,
                              const std::string& value_name = "t") {
  auto f = detail::open_out(path);
  f << "i," << value_name << "\n";
  for (int i = 0; i < values.size(); ++i)
    f << (i + 1) << "," << detail::format_double(values[i]) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

// One line of space-separated integers.
inline void write_change_set(const std::vector<int>& set, const std::string& path) {
  auto f = detail::open_out(path);
  for (std::size_t j = 0; j < set.size(); ++j) f << (j ? " " : "") << set[j];
  f << "\n";
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace panelseg
