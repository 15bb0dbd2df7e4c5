#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <variant>

#include "kansa/errors.hpp"
#include "kansa/mq_kernel.hpp"
#include "kansa/point.hpp"

namespace kansa {

/// Convective velocity v(P): either a constant vector or a position-dependent
/// callable. Callables must be safe to invoke concurrently.
template <std::size_t D>
class VelocityField {
 public:
  using Vector = Point<D>;
  using Function = std::function<Vector(const Point<D>&)>;

  VelocityField() = default;
  VelocityField(Vector constant) : field_(constant) {}  // NOLINT(implicit)
  VelocityField(Function fn) : field_(std::move(fn)) {}  // NOLINT(implicit)

  Vector at(const Point<D>& p) const {
    if (const auto* c = std::get_if<Vector>(&field_)) return *c;
    Vector v = std::get<Function>(field_)(p);
    if (!is_finite(v)) throw DomainError("VelocityField: non-finite velocity");
    return v;
  }

  bool is_constant() const noexcept { return std::holds_alternative<Vector>(field_); }

 private:
  std::variant<Vector, Function> field_{Vector{}};
};

enum class BoundaryTag { dirichlet, neumann };

inline const char* to_string(BoundaryTag t) {
  return t == BoundaryTag::dirichlet ? "dirichlet" : "neumann";
}

struct BoundaryInfo {
  BoundaryTag tag;
  Point2 normal;  // outward unit normal
};

/// L phi_C(P) = phi''(r) + (d - 1 + <P - C, v(P)>) phi'(r)/r
/// (Laplacian plus convection, unit diffusion).
template <std::size_t D>
double interior_operator_phi(const MQKernel& k, const Point<D>& center, const Point<D>& p,
                             const VelocityField<D>& v) {
  const Point<D> diff = p - center;
  const RadialValues rv = k.radial(squared_norm(diff));
  return rv.phi_second +
         (static_cast<double>(D - 1) + dot(diff, v.at(p))) * rv.phi_prime_over_r;
}

/// B phi_C(P): phi(r) on Dirichlet points, <P - C, nu> phi'(r)/r on Neumann points.
template <std::size_t D>
double boundary_operator_phi(const MQKernel& k, const Point<D>& center, const Point<D>& p,
                             BoundaryTag tag, const Point<D>& normal) {
  const Point<D> diff = p - center;
  const RadialValues rv = k.radial(squared_norm(diff));
  if (tag == BoundaryTag::dirichlet) return rv.phi;
  if (std::abs(squared_norm(normal) - 1.0) > 1e-12)
    throw ContractViolation("boundary_operator_phi: Neumann normal is not a unit vector");
  return dot(diff, normal) * rv.phi_prime_over_r;
}

/**
 * The fixed domain (0,1)^2 with the mixed boundary split
 *   Gamma1 (Dirichlet) = closed vertical edges x1 = 0 and x1 = 1, corners included,
 *   Gamma2 (Neumann)   = open horizontal edges x2 = 0 and x2 = 1.
 * Boundary membership tolerates |x - edge| <= tolerance for user-supplied points;
 * grid points land exactly on 0 and 1.
 */
class UnitSquareDomain {
 public:
  static constexpr double tolerance = 1e-12;

  static bool contains_interior(const Point2& p) {
    return p[0] > tolerance && p[0] < 1.0 - tolerance && p[1] > tolerance &&
           p[1] < 1.0 - tolerance;
  }

  static bool on_boundary(const Point2& p) {
    const bool in_closure = p[0] >= -tolerance && p[0] <= 1.0 + tolerance &&
                            p[1] >= -tolerance && p[1] <= 1.0 + tolerance;
    return in_closure && !contains_interior(p);
  }

  static BoundaryInfo classify(const Point2& p) {
    if (!on_boundary(p))
      throw ContractViolation("classify_boundary_point: (" + std::to_string(p[0]) + ", " +
                              std::to_string(p[1]) + ") is not on the unit-square boundary");
    if (std::abs(p[0]) <= tolerance) return {BoundaryTag::dirichlet, Point2{{-1.0, 0.0}}};
    if (std::abs(p[0] - 1.0) <= tolerance) return {BoundaryTag::dirichlet, Point2{{1.0, 0.0}}};
    if (std::abs(p[1]) <= tolerance) return {BoundaryTag::neumann, Point2{{0.0, -1.0}}};
    return {BoundaryTag::neumann, Point2{{0.0, 1.0}}};
  }
};

inline BoundaryInfo classify_boundary_point(const Point2& p) {
  return UnitSquareDomain::classify(p);
}

// Manufactured problem built from u(x1, x2) = sin(2 pi x1) + cos(2 pi x2).

inline double reference_solution(const Point2& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::sin(two_pi * p[0]) + std::cos(two_pi * p[1]);
}

inline Point2 reference_gradient(const Point2& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return Point2{{two_pi * std::cos(two_pi * p[0]), -two_pi * std::sin(two_pi * p[1])}};
}

/// f = Laplacian u + <grad u, v>.
inline double manufactured_f(const Point2& p, const VelocityField<2>& v) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return -two_pi * two_pi * reference_solution(p) + dot(reference_gradient(p), v.at(p));
}

/// g = u on Dirichlet points, du/dnu on Neumann points.
inline double manufactured_g(const Point2& p, BoundaryTag tag, const Point2& normal) {
  if (tag == BoundaryTag::dirichlet) return reference_solution(p);
  return dot(reference_gradient(p), normal);
}

/// Stationary convection-diffusion problem on the unit square:
///   Laplacian u + <grad u, v> = f in the interior,  B u = g on the boundary.
struct ProblemSpec {
  static constexpr std::size_t dimension = 2;

  UnitSquareDomain domain;
  VelocityField<2> velocity;
  std::function<double(const Point2&)> source;
  std::function<double(const Point2&, const BoundaryInfo&)> boundary_data;
  MQKernel kernel;

  /// Problem whose data come from the sin/cos reference solution.
  static ProblemSpec manufactured(const MQKernel& kernel, VelocityField<2> velocity) {
    ProblemSpec spec{UnitSquareDomain{}, velocity, {}, {}, kernel};
    spec.source = [velocity](const Point2& p) { return manufactured_f(p, velocity); };
    spec.boundary_data = [](const Point2& p, const BoundaryInfo& b) {
      return manufactured_g(p, b.tag, b.normal);
    };
    return spec;
  }
};

}  // namespace kansa
