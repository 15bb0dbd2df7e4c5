#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kansa/harness.hpp"

namespace kansa {
namespace {

TEST(GeometricMean, Examples) {
  EXPECT_NEAR(geometric_mean_rmse(std::vector<double>{1e-2, 1e-4}), 1e-3, 1e-18);
  EXPECT_NEAR(geometric_mean_rmse(std::vector<double>{0.37}), 0.37, 1e-15);
  EXPECT_NEAR(geometric_mean_rmse(std::vector<double>{2.0, 8.0}), 4.0, 1e-14);
}

TEST(GeometricMean, RejectsEmptyAndNonpositive) {
  EXPECT_THROW(geometric_mean_rmse(std::vector<double>{}), DomainError);
  EXPECT_THROW(geometric_mean_rmse(std::vector<double>{1.0, 0.0}), DomainError);
  EXPECT_THROW(geometric_mean_rmse(std::vector<double>{-1.0}), DomainError);
}

TEST(TrialSeeds, StableAndDistinct) {
  EXPECT_EQ(trial_seed(42, 3), trial_seed(42, 3));
  EXPECT_NE(trial_seed(42, 3), trial_seed(42, 4));
  EXPECT_NE(trial_seed(42, 3), trial_seed(43, 3));
}

ExperimentConfig config(std::size_t n, double delta, double vx, double vy, std::size_t m = 1) {
  ExperimentConfig c;
  c.n_per_side = n;
  c.delta = delta;
  c.velocity = {vx, vy};
  c.trials = m;
  c.threads = 1;
  return c;
}

TEST(SingleTrial, ClassicalKansaN121) {
  const TrialResult r = run_single_trial(config(11, 0.0, 0, 0), 0);
  ASSERT_TRUE(r.rmse.has_value());
  EXPECT_FALSE(r.singular_flag);
  // Published value 6.9e-02; the delta = 0 solve is deterministic.
  EXPECT_NEAR(*r.rmse, 6.9e-2, 0.05 * 6.9e-2);
}

TEST(SingleTrial, ClassicalKansaN441WithConvection) {
  const TrialResult r = run_single_trial(config(21, 0.0, 1, 1), 0);
  ASSERT_TRUE(r.rmse.has_value());
  EXPECT_NEAR(*r.rmse, 1.5e-3, 0.1 * 1.5e-3);
}

TEST(SingleTrial, RepresentableSolutionIsRecoveredExactly) {
  // u = phi_{C1} with a single Dirichlet node: u_N reproduces u at the node.
  const MQKernel k(2.5);
  const Point2 center{{0.02, -0.03}};
  const auto u = [&](const Point2& p) { return k.phi(norm(p - center)); };
  ProblemSpec spec{UnitSquareDomain{}, VelocityField<2>{}, [](const Point2&) { return 0.0; },
                   [&](const Point2& p, const BoundaryInfo&) { return u(p); }, k};
  const CollocationSet g = CollocationSet::from_points({}, {Point2{{0, 0}}});
  CenterSet c;
  c.centers = {center};
  const CollocationSolution sol = solve_collocation(spec, g, c);
  ASSERT_TRUE(sol.report.has_value());
  EXPECT_NEAR(sol.report->solution[0], 1.0, 1e-15);
  EXPECT_LT(rmse_at_nodes(g, c, sol.report->solution, k, u), 1e-15);
}

TEST(SingleTrial, InvalidConfigRejected) {
  EXPECT_THROW(run_single_trial(config(2, 0.0, 0, 0), 0), DomainError);
  ExperimentConfig c = config(11, -1.0, 0, 0);
  EXPECT_THROW(run_single_trial(c, 0), DomainError);
}

TEST(SingleTrial, DeltaContinuityAtZero) {
  const TrialResult r0 = run_single_trial(config(11, 0.0, 0, 0), 5);
  const TrialResult r1 = run_single_trial(config(11, 1e-12, 0, 0), 5);
  ASSERT_TRUE(r0.rmse && r1.rmse);
  EXPECT_NEAR(*r1.rmse, *r0.rmse, 1e-6 * *r0.rmse);
}

TEST(Benchmark, DeltaZeroSingleTrialEqualsDeterministicTrial) {
  const ExperimentConfig c = config(11, 0.0, 1, 1, 1);
  const AggregateResult a = run_benchmark(c);
  const TrialResult r = run_single_trial(c, trial_seed(c.base_seed, 0));
  EXPECT_EQ(a.rmse_geomean, *r.rmse);
  EXPECT_EQ(a.singular_count, 0u);
}

TEST(Benchmark, GeometricMeanBetweenExtremes) {
  const AggregateResult a = run_benchmark(config(11, 0.05, 1, 1, 12));
  EXPECT_EQ(a.trials.size(), 12u);
  EXPECT_LE(a.rmse_min, a.rmse_geomean);
  EXPECT_LE(a.rmse_geomean, a.rmse_max);
  EXPECT_LT(a.rmse_min, a.rmse_max);
  for (std::size_t l = 0; l < a.trials.size(); ++l) {
    EXPECT_EQ(a.trials[l].trial_index, l);
    EXPECT_EQ(a.trials[l].seed, trial_seed(42, l));
  }
}

TEST(Benchmark, ReproducibleAcrossThreadCounts) {
  ExperimentConfig c = config(11, 0.01, 0, 0, 6);
  const AggregateResult a = run_benchmark(c);
  c.threads = 3;
  const AggregateResult b = run_benchmark(c);
  EXPECT_EQ(a.rmse_geomean, b.rmse_geomean);
  EXPECT_EQ(a.rmse_min, b.rmse_min);
  EXPECT_EQ(a.rmse_max, b.rmse_max);
  EXPECT_EQ(a.cond_median, b.cond_median);
  for (std::size_t l = 0; l < 6; ++l) EXPECT_EQ(*a.trials[l].rmse, *b.trials[l].rmse);
}

TEST(Benchmark, SingleTrialIsReplayable) {
  const ExperimentConfig c = config(11, 0.01, 0, 0, 4);
  const AggregateResult a = run_benchmark(c);
  const TrialResult third = run_single_trial(c, trial_seed(c.base_seed, 2), 2);
  EXPECT_EQ(*a.trials[2].rmse, *third.rmse);
}

TEST(Benchmark, AllSingularTrialsIsAnError) {
  ExperimentConfig c = config(11, 0.0, 0, 0, 2);
  std::vector<TrialResult> trials(2);
  trials[0].singular_flag = trials[1].singular_flag = true;
  EXPECT_THROW(aggregate_trials(c, trials), std::runtime_error);
  trials[1] = TrialResult{1, 0, 0.25, 10.0, 1.0, 0.0, false, 0.0};
  const AggregateResult a = aggregate_trials(c, trials);
  EXPECT_EQ(a.singular_count, 1u);
  EXPECT_EQ(a.rmse_geomean, 0.25);
}

TEST(Benchmark, CsvRow) {
  const AggregateResult a = run_benchmark(config(11, 0.0, 1, 1, 3));
  std::ostringstream os;
  write_benchmark_header(os);
  write_benchmark_row(os, a);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("N,n,epsilon,vx,vy,delta,m,rmse_geomean,rmse_min,rmse_max,singular_count,"
                    "cond_median,seconds_total\n121,11,2.5,1,1,0,3,",
                    0),
            0u);
  EXPECT_EQ(s.back(), '\n');
  EXPECT_EQ(s[s.size() - 2], ',');  // timing column empty unless requested
}

TEST(Convergence, ClassicalKansaErrorDecreasesWithN) {
  double prev = INFINITY;
  for (std::size_t n : {11u, 21u, 31u, 41u}) {
    const TrialResult r = run_single_trial(config(n, 0.0, 0, 0), 0);
    ASSERT_TRUE(r.rmse.has_value());
    EXPECT_LT(*r.rmse, prev) << "n=" << n;
    prev = *r.rmse;
  }
}

TEST(Table1, SubsetShapeAndOrder) {
  Table1Options opt;
  opt.trials = 1;
  opt.threads = 1;
  opt.velocities = {{1, 1}};
  opt.sizes = {5, 7};
  const auto cells = run_table1(opt);
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells[0].config.n_per_side, 5u);
  EXPECT_EQ(cells[0].config.delta, 0.1);
  EXPECT_EQ(cells[3].config.delta, 0.0);
  EXPECT_EQ(cells[4].config.n_per_side, 7u);
  for (const auto& c : cells) EXPECT_TRUE(c.result.has_value()) << c.error;
  std::ostringstream a, b;
  write_table1_csv(a, cells);
  write_table1_csv(b, run_table1(opt));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Table1, DefaultSweepHas64Cells) {
  const Table1Options opt;
  EXPECT_EQ(opt.velocities.size() * opt.sizes.size() * opt.deltas.size(), 64u);
}

TEST(Table1, FailedCellIsRecordedWithoutAbortingSweep) {
  Table1Options opt;
  opt.trials = 1;
  opt.velocities = {{0, 0}};
  opt.sizes = {2, 5};  // n = 2 violates the harness minimum
  opt.deltas = {0.0};
  const auto cells = run_table1(opt);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_FALSE(cells[0].result.has_value());
  EXPECT_FALSE(cells[0].error.empty());
  EXPECT_TRUE(cells[1].result.has_value());
  std::ostringstream os;
  write_table1_csv(os, cells);
  EXPECT_NE(os.str().find("4,2,2.5,0,0,0,1,nan,nan,nan,1,nan,"), std::string::npos);
}

TEST(Probe, NoSingularDrawsOnSmallGrid) {
  ExperimentConfig c = config(11, 0.1, 0, 0);
  const ProbeReport rep = unisolvence_probe(c, 40);
  EXPECT_EQ(rep.singular_count, 0u);
  EXPECT_EQ(rep.trials.size(), 40u);
  for (const ProbeTrial& t : rep.trials) {
    EXPECT_GT(t.sigma_min, 0.0);
    EXPECT_TRUE(std::isfinite(t.sigma_min));
  }
  EXPECT_LE(rep.sigma_min_min, rep.sigma_min_median);
  EXPECT_LE(rep.sigma_min_median, rep.sigma_min_max);
}

TEST(Probe, OneByOneDirichletSigmaIsPhi) {
  const MQKernel k(2.5);
  DenseMatrix m(1, 1);
  m(0, 0) = k.phi(0.37);
  const ProbeTrial t = probe_matrix(m, 0, 0);
  EXPECT_FALSE(t.singular_flag);
  EXPECT_NEAR(t.sigma_min, k.phi(0.37), 1e-15);
  EXPECT_GE(t.sigma_min, 1.0);
}

TEST(Probe, RejectsOversizedGrid) {
  EXPECT_THROW(unisolvence_probe(config(45, 0.01, 0, 0), 1), DomainError);
}

}  // namespace
}  // namespace kansa
