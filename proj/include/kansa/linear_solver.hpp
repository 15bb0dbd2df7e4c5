#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kansa/dense_matrix.hpp"
#include "kansa/errors.hpp"

namespace kansa {

/**
 * Row-pivoted LU factorization P A = L U in double precision.
 *
 * L (unit lower) and U are packed in `lu`; `perm[i]` is the row of A that ends
 * up in position i. A copy of A is kept for residual computation. An exact
 * zero pivot marks the factorization singular; elimination continues past it
 * so that pivot statistics for the remaining columns are still reported.
 */
struct LUFactorization {
  DenseMatrix lu;
  std::vector<std::size_t> perm;
  DenseMatrix original;
  double min_abs_pivot = std::numeric_limits<double>::infinity();
  double max_abs_pivot = 0.0;
  double norm_one = 0.0;
  bool singular = false;

  std::size_t size() const noexcept { return perm.size(); }
};

struct SolveReport {
  std::vector<double> solution;
  double condition_estimate = 0.0;
  double min_abs_pivot = 0.0;
  double residual_norm = 0.0;  // ||A x - b||_2 / ||b||_2
  bool singular_flag = false;
};

namespace detail {

inline constexpr std::size_t lu_block = 64;
inline constexpr std::size_t lu_col_tile = 256;

inline void swap_rows(DenseMatrix& a, std::size_t r1, std::size_t r2) {
  if (r1 == r2) return;
  auto x = a.row(r1);
  auto y = a.row(r2);
  std::swap_ranges(x.begin(), x.end(), y.begin());
}

// Unblocked elimination of columns [k0, k1) over rows [k0, n). Row swaps are
// applied to full rows; the trailing update is restricted to columns < k1.
inline void factor_panel(LUFactorization& f, std::size_t k0, std::size_t k1) {
  DenseMatrix& a = f.lu;
  const std::size_t n = a.rows();
  for (std::size_t k = k0; k < k1; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      swap_rows(a, k, piv);
      std::swap(f.perm[k], f.perm[piv]);
    }
    f.min_abs_pivot = std::min(f.min_abs_pivot, best);
    f.max_abs_pivot = std::max(f.max_abs_pivot, best);
    if (best == 0.0) {
      f.singular = true;
      continue;
    }
    const double inv = 1.0 / a(k, k);
    const double* prow = &a(k, 0);
    for (std::size_t i = k + 1; i < n; ++i) {
      double* row = &a(i, 0);
      const double l = row[k] * inv;
      row[k] = l;
      for (std::size_t j = k + 1; j < k1; ++j) row[j] -= l * prow[j];
    }
  }
}

}  // namespace detail

/// Blocked right-looking LU with partial pivoting.
inline LUFactorization lu_factor(const DenseMatrix& a) {
  if (!a.is_square()) throw ContractViolation("lu_factor: matrix is not square");
  if (!a.all_finite()) throw DomainError("lu_factor: matrix has non-finite entries");

  const std::size_t n = a.rows();
  LUFactorization f;
  f.lu = a;
  f.original = a;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  f.norm_one = a.norm_one();
  if (n == 0) {
    f.min_abs_pivot = 0.0;
    return f;
  }

  DenseMatrix& m = f.lu;
  for (std::size_t k0 = 0; k0 < n; k0 += detail::lu_block) {
    const std::size_t k1 = std::min(n, k0 + detail::lu_block);
    detail::factor_panel(f, k0, k1);
    if (k1 == n) break;

    // U12 = L11^{-1} A12.
    for (std::size_t k = k0; k < k1; ++k) {
      const double* src = &m(k, 0);
      for (std::size_t i = k + 1; i < k1; ++i) {
        double* dst = &m(i, 0);
        const double l = dst[k];
        for (std::size_t j = k1; j < n; ++j) dst[j] -= l * src[j];
      }
    }

    // A22 -= L21 U12, tiled over columns so the U12 tile stays in cache.
    for (std::size_t j0 = k1; j0 < n; j0 += detail::lu_col_tile) {
      const std::size_t j1 = std::min(n, j0 + detail::lu_col_tile);
      for (std::size_t i = k1; i < n; ++i) {
        double* row = &m(i, 0);
        for (std::size_t p = k0; p < k1; ++p) {
          const double l = row[p];
          if (l == 0.0) continue;
          const double* u = &m(p, 0);
          for (std::size_t j = j0; j < j1; ++j) row[j] -= l * u[j];
        }
      }
    }
  }
  return f;
}

namespace detail {

// x <- A^{-1} b using the packed factors.
inline std::vector<double> lu_apply_inverse(const LUFactorization& f, std::span<const double> b) {
  const std::size_t n = f.size();
  const DenseMatrix& m = f.lu;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = m.row(i).data();
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const double* row = m.row(i).data();
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= row[j] * x[j];
    x[i] = s / row[i];
  }
  return x;
}

// x <- A^{-T} c. With P A = L U: U^T w = c, L^T y = w, x[perm[i]] = y[i].
inline std::vector<double> lu_apply_inverse_transpose(const LUFactorization& f,
                                                      std::span<const double> c) {
  const std::size_t n = f.size();
  const DenseMatrix& m = f.lu;
  std::vector<double> w(c.begin(), c.end());
  for (std::size_t i = 0; i < n; ++i) {
    w[i] /= m(i, i);
    const double wi = w[i];
    const double* row = m.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) w[j] -= row[j] * wi;
  }
  for (std::size_t i = n; i-- > 0;) {
    const double wi = w[i];
    const double* row = m.row(i).data();
    for (std::size_t j = 0; j < i; ++j) w[j] -= row[j] * wi;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[f.perm[i]] = w[i];
  return x;
}

}  // namespace detail

/**
 * Estimate of ||A^{-1}||_1 by Hager's power-iteration on the factorization
 * (at most `iterations` pairs of solves), combined with Higham's alternating
 * test vector.
 */
inline double inverse_norm_one_estimate(const LUFactorization& f, int iterations = 5) {
  const std::size_t n = f.size();
  if (n == 0) return 0.0;
  if (f.singular) return std::numeric_limits<double>::infinity();

  auto norm1 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };

  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  std::size_t last_j = n;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> y = detail::lu_apply_inverse(f, x);
    estimate = std::max(estimate, norm1(y));
    std::vector<double> xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    const std::vector<double> z = detail::lu_apply_inverse_transpose(f, xi);
    std::size_t j = 0;
    double zmax = -1.0, ztx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ztx += z[i] * x[i];
      if (std::abs(z[i]) > zmax) {
        zmax = std::abs(z[i]);
        j = i;
      }
    }
    if (zmax <= ztx || j == last_j) break;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
    last_j = j;
  }

  std::vector<double> alt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = n > 1 ? 1.0 + static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
    alt[i] = (i % 2 == 0) ? mag : -mag;
  }
  const double alt_est =
      2.0 * norm1(detail::lu_apply_inverse(f, alt)) / (3.0 * static_cast<double>(n));
  return std::max(estimate, alt_est);
}

/// Estimated 1-norm condition number ||A||_1 ||A^{-1}||_1.
inline double condition_estimate(const LUFactorization& f) {
  return f.norm_one * inverse_norm_one_estimate(f);
}

inline SolveReport solve(const LUFactorization& f, std::span<const double> b) {
  if (b.size() != f.size())
    throw ContractViolation("solve: right-hand side length " + std::to_string(b.size()) +
                            " != " + std::to_string(f.size()));
  if (f.singular)
    throw SolveError("solve: factorization is exactly singular (zero pivot)", f.min_abs_pivot);

  SolveReport rep;
  rep.solution = detail::lu_apply_inverse(f, b);
  rep.min_abs_pivot = f.min_abs_pivot;
  rep.condition_estimate = condition_estimate(f);
  std::vector<double> r = f.original.multiply(rep.solution);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double bn = norm2(b);
  rep.residual_norm = bn > 0.0 ? norm2(r) / bn : norm2(r);
  return rep;
}

/**
 * Smallest singular value by inverse iteration on A^T A through the LU
 * factors: x <- A^{-1} A^{-T} x. For unit x, 1/||A^{-T} x|| bounds sigma_min
 * from above and converges to it. Returns 0 for an exactly singular matrix.
 */
inline double smallest_singular_value(const LUFactorization& f, double rel_tol = 1e-10,
                                      int max_iterations = 2000) {
  const std::size_t n = f.size();
  if (n == 0) throw ContractViolation("smallest_singular_value: empty matrix");
  if (f.singular) return 0.0;

  // Deterministic start with no special alignment to the coordinate axes.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  double xn = norm2(x);
  for (double& v : x) v /= xn;

  double sigma = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const std::vector<double> z = detail::lu_apply_inverse_transpose(f, x);
    const double zn = norm2(z);
    if (!(zn > 0.0) || !std::isfinite(zn))
      throw ConvergenceError("smallest_singular_value: iterate lost finiteness", sigma);
    const double next = 1.0 / zn;
    const bool converged = std::abs(sigma - next) <= rel_tol * next;
    sigma = next;
    if (converged) return sigma;
    x = detail::lu_apply_inverse(f, z);
    xn = norm2(x);
    if (!(xn > 0.0) || !std::isfinite(xn))
      throw ConvergenceError("smallest_singular_value: iterate lost finiteness", sigma);
    for (double& v : x) v /= xn;
  }
  throw ConvergenceError("smallest_singular_value: no convergence after " +
                             std::to_string(max_iterations) + " iterations",
                         sigma);
}

inline double smallest_singular_value(const DenseMatrix& a) {
  return smallest_singular_value(lu_factor(a));
}

}  // namespace kansa
