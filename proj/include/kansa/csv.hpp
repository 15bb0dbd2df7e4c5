#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <system_error>

namespace kansa::csv {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Matrix dump: one row per line, space separated, shortest round-trip values.
template <class Matrix>
void write_matrix(std::ostream& os, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

inline void write_vector(std::ostream& os, std::span<const double> v, const char* header) {
  os << "index," << header << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) os << i << ',' << format_double(v[i]) << '\n';
}

}  // namespace kansa::csv
