#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kansa {

/// Argument outside the mathematical domain of an operation (negative radius,
/// nonpositive shape parameter, n < 2, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (size mismatch, interior point passed
/// where a boundary point is required, non-unit normal).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(std::size_t row, std::size_t col, const std::string& what)
      : std::runtime_error("assembly: entry (" + std::to_string(row) + ", " +
                           std::to_string(col) + ") " + what),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Raised when a solve is attempted on an exactly singular factorization.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double min_abs_pivot)
      : std::runtime_error(what), min_abs_pivot_(min_abs_pivot) {}

  double min_abs_pivot() const noexcept { return min_abs_pivot_; }

 private:
  double min_abs_pivot_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_iterate)
      : std::runtime_error(what), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

}  // namespace kansa
