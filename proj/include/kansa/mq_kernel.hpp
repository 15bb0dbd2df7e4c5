#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "kansa/errors.hpp"
#include "kansa/point.hpp"

namespace kansa {

/// Radial quantities of the MultiQuadric at one distance, evaluated together
/// from t = (eps r)^2 so that no division by r ever occurs.
struct RadialValues {
  double phi;               // sqrt(1 + t)
  double phi_prime_over_r;  // eps^2 (1 + t)^(-1/2)
  double phi_second;        // eps^2 (1 + t)^(-3/2)
};

/**
 * MultiQuadric radial basis function phi(r) = sqrt(1 + (eps r)^2).
 *
 * The derivative quantities phi'(r)/r and phi''(r) are smooth at r = 0 and are
 * always evaluated in closed form. phi'' is usually written as
 *   -eps^4 r^2 (1+t)^(-3/2) + eps^2 (1+t)^(-1/2),
 * which collapses to eps^2 (1+t)^(-3/2); the collapsed form has no cancellation.
 */
class MQKernel {
 public:
  explicit MQKernel(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw DomainError("MQKernel: shape parameter must be positive and finite, got " +
                        std::to_string(epsilon));
  }

  double epsilon() const noexcept { return eps_; }

  double phi(double r) const {
    check_radius(r, "phi");
    return std::sqrt(1.0 + square(eps_ * r));
  }

  double phi_prime_over_r(double r) const {
    check_radius(r, "phi_prime_over_r");
    return eps_ * eps_ / std::sqrt(1.0 + square(eps_ * r));
  }

  double phi_second(double r) const {
    check_radius(r, "phi_second");
    const double s = 1.0 + square(eps_ * r);
    return eps_ * eps_ / (s * std::sqrt(s));
  }

  /// All three radial quantities from the squared distance. Unchecked: the
  /// caller passes a squared norm, which is nonnegative by construction.
  RadialValues radial(double r_squared) const noexcept {
    const double eps2 = eps_ * eps_;
    const double s = 1.0 + eps2 * r_squared;
    const double root = std::sqrt(s);
    const double ppr = eps2 / root;
    return {root, ppr, ppr / s};
  }

 private:
  static double square(double v) noexcept { return v * v; }

  static void check_radius(double r, const char* op) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw DomainError(std::string("MQKernel::") + op +
                        ": radius must be finite and nonnegative, got " + std::to_string(r));
  }

  double eps_;
};

/// grad_P phi(||P - C||) = (P - C) phi'(r)/r.
template <std::size_t D>
Point<D> gradient_phi(const MQKernel& k, const Point<D>& center, const Point<D>& p) {
  const Point<D> diff = p - center;
  return k.radial(squared_norm(diff)).phi_prime_over_r * diff;
}

/// Laplacian in P of phi(||P - C||): phi''(r) + (D - 1) phi'(r)/r.
template <std::size_t D>
double laplacian_phi(const MQKernel& k, const Point<D>& center, const Point<D>& p) {
  const RadialValues rv = k.radial(squared_norm(p - center));
  return rv.phi_second + static_cast<double>(D - 1) * rv.phi_prime_over_r;
}

/// Overload carrying the dimension explicitly; it must agree with D.
template <std::size_t D>
double laplacian_phi(const MQKernel& k, const Point<D>& center, const Point<D>& p,
                     std::size_t dimension) {
  if (dimension != D)
    throw ContractViolation("laplacian_phi: dimension " + std::to_string(dimension) +
                            " does not match point dimension " + std::to_string(D));
  return laplacian_phi(k, center, p);
}

}  // namespace kansa
