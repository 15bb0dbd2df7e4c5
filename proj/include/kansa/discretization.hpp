#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kansa/csv.hpp"
#include "kansa/dense_matrix.hpp"
#include "kansa/errors.hpp"
#include "kansa/mq_kernel.hpp"
#include "kansa/operators.hpp"
#include "kansa/point.hpp"
#include "kansa/random.hpp"

namespace kansa {

/**
 * Collocation nodes in system row order: all interior points first, then all
 * boundary points with their tag and outward normal. `grid_index[k]` is the
 * lexicographic index of node k in the generating grid.
 */
struct CollocationSet {
  std::vector<Point2> interior;
  std::vector<Point2> boundary;
  std::vector<BoundaryInfo> boundary_info;
  std::vector<std::size_t> grid_index;

  std::size_t size() const noexcept { return interior.size() + boundary.size(); }
  std::size_t interior_count() const noexcept { return interior.size(); }
  std::size_t boundary_count() const noexcept { return boundary.size(); }

  const Point2& point(std::size_t k) const {
    return k < interior.size() ? interior[k] : boundary[k - interior.size()];
  }
  bool is_interior(std::size_t k) const noexcept { return k < interior.size(); }

  /// Builds a set from explicit points; boundary tags and normals are classified.
  static CollocationSet from_points(std::vector<Point2> interior_pts,
                                    std::vector<Point2> boundary_pts) {
    CollocationSet set;
    for (const auto& p : interior_pts)
      if (!UnitSquareDomain::contains_interior(p))
        throw ContractViolation("CollocationSet: interior point lies outside (0,1)^2");
    set.boundary_info.reserve(boundary_pts.size());
    for (const auto& p : boundary_pts) set.boundary_info.push_back(classify_boundary_point(p));
    set.interior = std::move(interior_pts);
    set.boundary = std::move(boundary_pts);
    set.grid_index.resize(set.size());
    for (std::size_t k = 0; k < set.size(); ++k) set.grid_index[k] = k;
    return set;
  }
};

/// n x n uniform grid on [0,1]^2, spacing 1/(n-1), lexicographic in (x1, x2)
/// with x1 the slow index: lexicographic index = i * n + j for (i h, j h).
inline CollocationSet make_uniform_grid(std::size_t n) {
  if (n < 2) throw DomainError("make_uniform_grid: need at least 2 points per side");
  CollocationSet set;
  const double h = 1.0 / static_cast<double>(n - 1);
  const std::size_t inner = (n - 2) * (n - 2);
  set.interior.reserve(inner);
  set.boundary.reserve(n * n - inner);
  set.boundary_info.reserve(n * n - inner);
  std::vector<std::size_t> interior_idx, boundary_idx;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // Edge coordinates are set exactly so classification needs no tolerance.
      const double x1 = i == n - 1 ? 1.0 : static_cast<double>(i) * h;
      const double x2 = j == n - 1 ? 1.0 : static_cast<double>(j) * h;
      const Point2 p{{x1, x2}};
      const bool on_edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
      if (on_edge) {
        set.boundary.push_back(p);
        set.boundary_info.push_back(classify_boundary_point(p));
        boundary_idx.push_back(i * n + j);
      } else {
        set.interior.push_back(p);
        interior_idx.push_back(i * n + j);
      }
    }
  }
  set.grid_index = std::move(interior_idx);
  set.grid_index.insert(set.grid_index.end(), boundary_idx.begin(), boundary_idx.end());
  return set;
}

/// Fictitious centers; centers[k] belongs to collocation node k.
struct CenterSet {
  std::vector<Point2> centers;
  double delta = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return centers.size(); }
};

/**
 * Centers as independent uniform perturbations of the collocation nodes in the
 * box (-delta, delta)^2. Draws are taken in lexicographic grid order, x1 then
 * x2, two per node, from a stream seeded with `seed`. Centers are not clamped
 * to the square.
 */
inline CenterSet perturb_centers(const CollocationSet& colloc, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw DomainError("perturb_centers: delta must be finite and nonnegative");
  const std::size_t n = colloc.size();
  if (colloc.grid_index.size() != n)
    throw ContractViolation("perturb_centers: grid_index size mismatch");

  std::vector<Point2> offsets(n);
  UniformStream stream(seed);
  for (auto& off : offsets) {
    off[0] = stream.next_symmetric(delta);
    off[1] = stream.next_symmetric(delta);
  }

  CenterSet out;
  out.delta = delta;
  out.seed = seed;
  out.centers.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = colloc.grid_index[k];
    if (g >= n) throw ContractViolation("perturb_centers: grid_index out of range");
    out.centers[k] = colloc.point(k) + offsets[g];
  }
  return out;
}

/// Centers equal to the collocation nodes (classical Kansa).
inline CenterSet coincident_centers(const CollocationSet& colloc) {
  CenterSet out;
  out.centers.reserve(colloc.size());
  for (std::size_t k = 0; k < colloc.size(); ++k) out.centers.push_back(colloc.point(k));
  return out;
}

struct RowMeta {
  Point2 point;
  bool interior;
  BoundaryTag tag;  // meaningful only when !interior
};

/// The square collocation system K a = rhs. Column j belongs to center j.
struct KansaSystem {
  DenseMatrix matrix;
  std::vector<double> rhs;
  std::vector<RowMeta> row_meta;
  std::vector<std::size_t> col_center;
  std::size_t interior_count = 0;

  std::size_t size() const noexcept { return rhs.size(); }
};

/// Interior rows hold L phi_{C_j}(P_i) with rhs f(P_i); boundary rows hold
/// B phi_{C_j}(P_k) with rhs g(P_k).
inline KansaSystem assemble_system(const ProblemSpec& spec, const CollocationSet& colloc,
                                   const CenterSet& centers) {
  const std::size_t n = colloc.size();
  if (centers.size() != n)
    throw ContractViolation("assemble_system: " + std::to_string(n) + " collocation nodes but " +
                            std::to_string(centers.size()) + " centers");
  if (colloc.boundary_info.size() != colloc.boundary.size())
    throw ContractViolation("assemble_system: boundary metadata size mismatch");

  KansaSystem sys;
  sys.matrix = DenseMatrix(n, n);
  sys.rhs.resize(n);
  sys.row_meta.resize(n);
  sys.col_center.resize(n);
  sys.interior_count = colloc.interior_count();
  for (std::size_t j = 0; j < n; ++j) sys.col_center[j] = j;

  const MQKernel& k = spec.kernel;
  const std::span<const Point2> c = centers.centers;
  const double dim_term = static_cast<double>(ProblemSpec::dimension - 1);

  for (std::size_t i = 0; i < colloc.interior_count(); ++i) {
    const Point2& p = colloc.interior[i];
    const Point2 v = spec.velocity.at(p);
    auto row = sys.matrix.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 diff = p - c[j];
      const RadialValues rv = k.radial(squared_norm(diff));
      row[j] = rv.phi_second + (dim_term + dot(diff, v)) * rv.phi_prime_over_r;
    }
    sys.rhs[i] = spec.source(p);
    sys.row_meta[i] = {p, true, BoundaryTag::dirichlet};
  }

  for (std::size_t b = 0; b < colloc.boundary_count(); ++b) {
    const std::size_t i = colloc.interior_count() + b;
    const Point2& p = colloc.boundary[b];
    const BoundaryInfo& info = colloc.boundary_info[b];
    auto row = sys.matrix.row(i);
    if (info.tag == BoundaryTag::dirichlet) {
      for (std::size_t j = 0; j < n; ++j) row[j] = k.radial(squared_norm(p - c[j])).phi;
    } else {
      if (std::abs(squared_norm(info.normal) - 1.0) > 1e-12)
        throw ContractViolation("assemble_system: Neumann normal is not a unit vector");
      for (std::size_t j = 0; j < n; ++j) {
        const Point2 diff = p - c[j];
        row[j] = dot(diff, info.normal) * k.radial(squared_norm(diff)).phi_prime_over_r;
      }
    }
    sys.rhs[i] = spec.boundary_data(p, info);
    sys.row_meta[i] = {p, false, info.tag};
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = sys.matrix.row(i);
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(row[j])) throw AssemblyError(i, j, "is not finite");
    if (!std::isfinite(sys.rhs[i])) throw AssemblyError(i, n, "right-hand side is not finite");
  }
  return sys;
}

/// u_N(P) = sum_j a_j phi(||P - C_j||).
inline double evaluate_solution(const CenterSet& centers, std::span<const double> coefficients,
                                const Point2& p, const MQKernel& k) {
  if (coefficients.size() != centers.size())
    throw ContractViolation("evaluate_solution: " + std::to_string(coefficients.size()) +
                            " coefficients for " + std::to_string(centers.size()) + " centers");
  double s = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j)
    s += coefficients[j] * k.radial(squared_norm(p - centers.centers[j])).phi;
  return s;
}

/// Grid export for scatter plots: index,x1,x2,role,tag with index the
/// lexicographic grid index. Rows follow collocation (system) order.
inline void write_points_csv(std::ostream& os, const CollocationSet& colloc) {
  os << "index,x1,x2,role,tag\n";
  for (std::size_t k = 0; k < colloc.size(); ++k) {
    const Point2& p = colloc.point(k);
    const bool inner = colloc.is_interior(k);
    os << colloc.grid_index[k] << ',' << csv::format_double(p[0]) << ','
       << csv::format_double(p[1]) << ',' << (inner ? "interior" : "boundary") << ','
       << (inner ? "none" : to_string(colloc.boundary_info[k - colloc.interior_count()].tag))
       << '\n';
  }
}

/// Centers in the same layout; role and tag are those of the owning node.
inline void write_centers_csv(std::ostream& os, const CollocationSet& colloc,
                              const CenterSet& centers) {
  if (centers.size() != colloc.size())
    throw ContractViolation("write_centers_csv: size mismatch");
  os << "index,x1,x2,role,tag\n";
  for (std::size_t k = 0; k < colloc.size(); ++k) {
    const Point2& c = centers.centers[k];
    const bool inner = colloc.is_interior(k);
    os << colloc.grid_index[k] << ',' << csv::format_double(c[0]) << ','
       << csv::format_double(c[1]) << ',' << (inner ? "interior" : "boundary") << ','
       << (inner ? "none" : to_string(colloc.boundary_info[k - colloc.interior_count()].tag))
       << '\n';
  }
}

}  // namespace kansa
