#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace kansa {

/// A point (or displacement) in R^D.
template <std::size_t D>
struct Point {
  static_assert(D >= 1, "dimension must be at least 1");
  static constexpr std::size_t dimension = D;

  std::array<double, D> x{};

  constexpr double& operator[](std::size_t i) { return x[i]; }
  constexpr double operator[](std::size_t i) const { return x[i]; }

  friend constexpr bool operator==(const Point&, const Point&) = default;

  friend constexpr Point operator-(const Point& a, const Point& b) {
    Point out;
    for (std::size_t i = 0; i < D; ++i) out.x[i] = a.x[i] - b.x[i];
    return out;
  }
  friend constexpr Point operator+(const Point& a, const Point& b) {
    Point out;
    for (std::size_t i = 0; i < D; ++i) out.x[i] = a.x[i] + b.x[i];
    return out;
  }
  friend constexpr Point operator*(double s, const Point& a) {
    Point out;
    for (std::size_t i = 0; i < D; ++i) out.x[i] = s * a.x[i];
    return out;
  }
};

using Point2 = Point<2>;

template <std::size_t D>
constexpr double dot(const Point<D>& a, const Point<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) s += a.x[i] * b.x[i];
  return s;
}

template <std::size_t D>
constexpr double squared_norm(const Point<D>& a) {
  return dot(a, a);
}

template <std::size_t D>
double norm(const Point<D>& a) {
  return std::sqrt(squared_norm(a));
}

template <std::size_t D>
bool is_finite(const Point<D>& a) {
  for (double c : a.x)
    if (!std::isfinite(c)) return false;
  return true;
}

}  // namespace kansa
