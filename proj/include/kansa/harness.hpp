#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kansa/csv.hpp"
#include "kansa/discretization.hpp"
#include "kansa/errors.hpp"
#include "kansa/linear_solver.hpp"
#include "kansa/operators.hpp"
#include "kansa/random.hpp"

namespace kansa {

struct ExperimentConfig {
  std::size_t n_per_side = 21;
  double epsilon = 2.5;
  double delta = 0.01;
  std::array<double, 2> velocity{0.0, 0.0};
  std::size_t trials = 100;
  std::uint64_t base_seed = 42;
  std::string output_path;
  unsigned threads = 0;  // 0: hardware concurrency
  bool record_timing = false;

  void validate() const {
    if (n_per_side < 3) throw DomainError("n must be at least 3 (got " + std::to_string(n_per_side) + ")");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delta must be nonnegative");
    if (trials < 1) throw DomainError("trials must be at least 1");
    if (!std::isfinite(velocity[0]) || !std::isfinite(velocity[1]))
      throw DomainError("velocity must be finite");
  }

  std::size_t node_count() const noexcept { return n_per_side * n_per_side; }
};

struct TrialResult {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  std::optional<double> rmse;  // empty when the system was singular
  double condition_estimate = 0.0;
  double min_abs_pivot = 0.0;
  double residual_norm = 0.0;
  bool singular_flag = false;
  double wall_seconds = 0.0;
};

struct AggregateResult {
  ExperimentConfig config;
  double rmse_geomean = std::numeric_limits<double>::quiet_NaN();
  double rmse_min = std::numeric_limits<double>::quiet_NaN();
  double rmse_max = std::numeric_limits<double>::quiet_NaN();
  std::size_t singular_count = 0;
  double cond_median = std::numeric_limits<double>::quiet_NaN();
  double seconds_total = 0.0;
  std::vector<TrialResult> trials;
};

/// Coefficients and diagnostics of one collocation solve.
struct CollocationSolution {
  KansaSystem system;
  LUFactorization factorization;
  std::optional<SolveReport> report;  // empty when singular
};

inline CollocationSolution solve_collocation(const ProblemSpec& spec, const CollocationSet& colloc,
                                             const CenterSet& centers) {
  CollocationSolution out;
  out.system = assemble_system(spec, colloc, centers);
  out.factorization = lu_factor(out.system.matrix);
  if (!out.factorization.singular) out.report = solve(out.factorization, out.system.rhs);
  return out;
}

/// sqrt(sum_j (u(P_j) - u_N(P_j))^2 / N) over every collocation node.
inline double rmse_at_nodes(const CollocationSet& colloc, const CenterSet& centers,
                            std::span<const double> coefficients, const MQKernel& k,
                            const std::function<double(const Point2&)>& exact) {
  double sum = 0.0;
  for (std::size_t j = 0; j < colloc.size(); ++j) {
    const Point2& p = colloc.point(j);
    const double e = exact(p) - evaluate_solution(centers, coefficients, p, k);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(colloc.size()));
}

inline ProblemSpec manufactured_problem(const ExperimentConfig& cfg) {
  return ProblemSpec::manufactured(MQKernel(cfg.epsilon),
                                   VelocityField<2>(Point2{{cfg.velocity[0], cfg.velocity[1]}}));
}

/// One randomized Kansa solve of the manufactured problem.
inline TrialResult run_single_trial(const ExperimentConfig& cfg, std::uint64_t seed,
                                    std::size_t trial_index = 0) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const CollocationSet colloc = make_uniform_grid(cfg.n_per_side);
  const CenterSet centers = perturb_centers(colloc, cfg.delta, seed);
  const ProblemSpec spec = manufactured_problem(cfg);
  const CollocationSolution sol = solve_collocation(spec, colloc, centers);

  TrialResult r;
  r.trial_index = trial_index;
  r.seed = seed;
  r.min_abs_pivot = sol.factorization.min_abs_pivot;
  r.singular_flag = sol.factorization.singular;
  if (sol.report) {
    r.condition_estimate = sol.report->condition_estimate;
    r.residual_norm = sol.report->residual_norm;
    r.rmse = rmse_at_nodes(colloc, centers, sol.report->solution, spec.kernel, reference_solution);
  } else {
    r.condition_estimate = std::numeric_limits<double>::infinity();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// 10^(mean of log10): the base-10 geometric mean.
inline double geometric_mean_rmse(std::span<const double> rmses) {
  if (rmses.empty()) throw DomainError("geometric_mean_rmse: empty input");
  double acc = 0.0;
  for (double r : rmses) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw DomainError("geometric_mean_rmse: entries must be positive and finite");
    acc += std::log10(r);
  }
  return std::pow(10.0, acc / static_cast<double>(rmses.size()));
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
/// be written to per-index slots; the first exception is rethrown.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Reduction over trials in index order; independent of completion order.
inline AggregateResult aggregate_trials(const ExperimentConfig& cfg, std::vector<TrialResult> trials) {
  AggregateResult agg;
  agg.config = cfg;
  std::vector<double> rmses, conds;
  for (const TrialResult& t : trials) {
    agg.seconds_total += t.wall_seconds;
    if (t.singular_flag || !t.rmse) {
      ++agg.singular_count;
      continue;
    }
    rmses.push_back(*t.rmse);
    conds.push_back(t.condition_estimate);
  }
  agg.trials = std::move(trials);
  if (rmses.empty()) throw std::runtime_error("run_benchmark: every trial was singular");
  agg.rmse_geomean = geometric_mean_rmse(rmses);
  agg.rmse_min = *std::min_element(rmses.begin(), rmses.end());
  agg.rmse_max = *std::max_element(rmses.begin(), rmses.end());
  // Clamp rounding of pow/log10 so the mean never leaves [min, max].
  agg.rmse_geomean = std::clamp(agg.rmse_geomean, agg.rmse_min, agg.rmse_max);
  agg.cond_median = median(conds);
  return agg;
}

inline void write_benchmark_header(std::ostream& os) {
  os << "N,n,epsilon,vx,vy,delta,m,rmse_geomean,rmse_min,rmse_max,singular_count,cond_median,"
        "seconds_total\n";
}

/// seconds_total is left empty unless timing was requested, so that output
/// files from identical runs compare equal.
inline void write_benchmark_row(std::ostream& os, const AggregateResult& a) {
  using csv::format_double;
  const ExperimentConfig& c = a.config;
  os << c.node_count() << ',' << c.n_per_side << ',' << format_double(c.epsilon) << ','
     << format_double(c.velocity[0]) << ',' << format_double(c.velocity[1]) << ','
     << format_double(c.delta) << ',' << c.trials << ',' << format_double(a.rmse_geomean) << ','
     << format_double(a.rmse_min) << ',' << format_double(a.rmse_max) << ',' << a.singular_count
     << ',' << format_double(a.cond_median) << ','
     << (c.record_timing ? format_double(a.seconds_total) : std::string{}) << '\n';
}

/**
 * m trials with seeds trial_seed(base_seed, l). With delta = 0 every trial is
 * the same deterministic solve, so it is computed once and replicated.
 */
inline AggregateResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialResult> trials(cfg.trials);
  if (cfg.delta == 0.0) {
    const TrialResult once = run_single_trial(cfg, trial_seed(cfg.base_seed, 0), 0);
    for (std::size_t l = 0; l < cfg.trials; ++l) {
      trials[l] = once;
      trials[l].trial_index = l;
      trials[l].seed = trial_seed(cfg.base_seed, l);
      if (l > 0) trials[l].wall_seconds = 0.0;
    }
  } else {
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t l) {
      trials[l] = run_single_trial(cfg, trial_seed(cfg.base_seed, l), l);
    });
  }
  return aggregate_trials(cfg, std::move(trials));
}

// Table of randomized Kansa results over velocities x grid sizes x deltas.

struct Table1Options {
  double epsilon = 2.5;
  std::size_t trials = 100;
  std::uint64_t base_seed = 42;
  unsigned threads = 0;
  bool record_timing = false;
  std::vector<std::array<double, 2>> velocities{{0, 0}, {1, 1}, {1, 100}, {100, 100}};
  std::vector<std::size_t> sizes{11, 21, 31, 41};
  std::vector<double> deltas{0.1, 0.01, 0.001, 0.0};
};

struct Table1Cell {
  ExperimentConfig config;
  std::optional<AggregateResult> result;
  std::string error;  // set when the cell failed
};

/// Rows ordered by velocity, then N, then delta. Each cell uses base_seed
/// directly, so `run_benchmark` on the same config reproduces it in isolation.
inline std::vector<Table1Cell> run_table1(const Table1Options& opt,
                                          const std::function<void(const Table1Cell&)>& progress = {}) {
  std::vector<Table1Cell> cells;
  for (const auto& v : opt.velocities)
    for (std::size_t n : opt.sizes)
      for (double d : opt.deltas) {
        Table1Cell cell;
        cell.config.n_per_side = n;
        cell.config.epsilon = opt.epsilon;
        cell.config.delta = d;
        cell.config.velocity = v;
        cell.config.trials = opt.trials;
        cell.config.base_seed = opt.base_seed;
        cell.config.threads = opt.threads;
        cell.config.record_timing = opt.record_timing;
        cells.push_back(std::move(cell));
      }
  for (Table1Cell& cell : cells) {
    try {
      cell.result = run_benchmark(cell.config);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    if (progress) progress(cell);
  }
  return cells;
}

inline void write_table1_csv(std::ostream& os, const std::vector<Table1Cell>& cells) {
  write_benchmark_header(os);
  for (const Table1Cell& cell : cells) {
    if (cell.result) {
      write_benchmark_row(os, *cell.result);
    } else {
      AggregateResult failed;
      failed.config = cell.config;
      failed.singular_count = cell.config.trials;
      write_benchmark_row(os, failed);
    }
  }
}

// Empirical nonsingularity probe for randomized collocation matrices.

struct ProbeTrial {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  double min_abs_pivot = 0.0;
  double sigma_min = 0.0;
  bool sigma_converged = true;
  bool singular_flag = false;
};

struct ProbeReport {
  ExperimentConfig config;
  std::size_t singular_count = 0;
  std::size_t unconverged_count = 0;
  double sigma_min_min = 0.0;
  double sigma_min_median = 0.0;
  double sigma_min_max = 0.0;
  double min_abs_pivot_min = 0.0;
  std::vector<ProbeTrial> trials;
};

inline ProbeTrial probe_matrix(const DenseMatrix& k, std::size_t trial_index, std::uint64_t seed) {
  ProbeTrial t;
  t.trial_index = trial_index;
  t.seed = seed;
  const LUFactorization f = lu_factor(k);
  t.min_abs_pivot = f.min_abs_pivot;
  t.singular_flag = f.singular;
  try {
    t.sigma_min = smallest_singular_value(f, 1e-8, 1000);
  } catch (const ConvergenceError& e) {
    t.sigma_min = e.last_iterate();
    t.sigma_converged = false;
  }
  return t;
}

/// Assembles K_N for `trials` fresh center draws and records exact zero
/// pivots and the smallest singular value of each draw.
inline ProbeReport unisolvence_probe(const ExperimentConfig& cfg, std::size_t trials) {
  cfg.validate();
  if (cfg.node_count() > 2000) throw DomainError("unisolvence_probe: N must not exceed 2000");
  if (trials < 1) throw DomainError("unisolvence_probe: need at least one trial");
  const CollocationSet colloc = make_uniform_grid(cfg.n_per_side);
  const ProblemSpec spec = manufactured_problem(cfg);

  ProbeReport rep;
  rep.config = cfg;
  rep.trials.resize(trials);
  parallel_for(trials, cfg.threads, [&](std::size_t l) {
    const std::uint64_t seed = trial_seed(cfg.base_seed, l);
    const CenterSet centers = perturb_centers(colloc, cfg.delta, seed);
    rep.trials[l] = probe_matrix(assemble_system(spec, colloc, centers).matrix, l, seed);
  });

  std::vector<double> sigmas;
  rep.min_abs_pivot_min = std::numeric_limits<double>::infinity();
  for (const ProbeTrial& t : rep.trials) {
    if (t.singular_flag) ++rep.singular_count;
    if (!t.sigma_converged) ++rep.unconverged_count;
    sigmas.push_back(t.sigma_min);
    rep.min_abs_pivot_min = std::min(rep.min_abs_pivot_min, t.min_abs_pivot);
  }
  rep.sigma_min_min = *std::min_element(sigmas.begin(), sigmas.end());
  rep.sigma_min_max = *std::max_element(sigmas.begin(), sigmas.end());
  rep.sigma_min_median = median(sigmas);
  return rep;
}

inline void write_probe_csv(std::ostream& os, const ProbeReport& rep) {
  os << "trial,seed,min_abs_pivot,sigma_min,sigma_converged,singular\n";
  for (const ProbeTrial& t : rep.trials)
    os << t.trial_index << ',' << t.seed << ',' << csv::format_double(t.min_abs_pivot) << ','
       << csv::format_double(t.sigma_min) << ',' << (t.sigma_converged ? 1 : 0) << ','
       << (t.singular_flag ? 1 : 0) << '\n';
}

}  // namespace kansa
