#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kansa_cli.hpp"

namespace kansa::cli {
namespace {

namespace fs = std::filesystem;

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const char* name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup no_env = env_of({});

CliConfig parse(const std::vector<std::string>& args, const EnvLookup& env = no_env) {
  const ParseOutcome o = parse_config(args, env);
  EXPECT_TRUE(o.config.has_value());
  return *o.config;
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(const std::vector<std::string>& args, const EnvLookup& env = no_env) {
  std::ostringstream out, err;
  const int code = run(args, out, err, env);
  return {code, out.str(), err.str()};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kansa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(CliParse, BenchFlagsMapToExperiment) {
  const CliConfig c = parse({"bench", "--n", "21", "--delta", "0.01", "--velocity", "1,1"});
  EXPECT_EQ(c.subcommand, Subcommand::bench);
  EXPECT_EQ(c.experiment.n_per_side, 21u);
  EXPECT_EQ(c.experiment.node_count(), 441u);
  EXPECT_EQ(c.experiment.delta, 0.01);
  EXPECT_EQ(c.experiment.velocity[0], 1.0);
  EXPECT_EQ(c.experiment.velocity[1], 1.0);
  EXPECT_EQ(c.experiment.trials, 100u);
  EXPECT_EQ(c.experiment.epsilon, 2.5);
}

TEST(CliParse, Table1Defaults) {
  const CliConfig c = parse({"table1"});
  EXPECT_EQ(c.subcommand, Subcommand::table1);
  EXPECT_EQ(c.experiment.trials, 100u);
  EXPECT_EQ(c.experiment.epsilon, 2.5);
  EXPECT_FALSE(c.velocity_given);
}

TEST(CliParse, AllSubcommandsRecognized) {
  EXPECT_EQ(parse({"solve"}).subcommand, Subcommand::solve);
  EXPECT_EQ(parse({"probe"}).subcommand, Subcommand::probe);
  EXPECT_EQ(parse({"grid-dump"}).subcommand, Subcommand::grid_dump);
}

TEST(CliParse, VerbosityFlags) {
  EXPECT_EQ(parse({"solve", "-q"}).verbosity, 0);
  EXPECT_EQ(parse({"solve"}).verbosity, 1);
  EXPECT_EQ(parse({"solve", "-v"}).verbosity, 2);
}

TEST(CliParse, InvalidValuesAreUsageErrors) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"bench", "--delta", "-0.1"},
           {"solve", "--n", "2"},
           {"solve", "--epsilon", "0"},
           {"solve", "--epsilon", "abc"},
           {"solve", "--velocity", "1"},
           {"bench", "--trials", "0"},
           {"bench", "--bogus", "1"},
           {},
           {"frobnicate"},
       }) {
    const Outcome r = run_cli(args);
    EXPECT_EQ(r.code, 2) << (args.empty() ? std::string("<none>") : args.back());
    EXPECT_NE(r.err.find("usage error"), std::string::npos);
  }
}

TEST(CliParse, HelpExitsZero) {
  const Outcome r = run_cli({"bench", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--delta"), std::string::npos);
}

TEST_F(TempDir, ConfigFileUnknownKeyIsRejectedByName) {
  std::ofstream(path("bad.cfg")) << "n = 11\nshape = 3\n";
  const Outcome r = run_cli({"solve", "--config", path("bad.cfg")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'shape'"), std::string::npos) << r.err;
}

TEST_F(TempDir, ConfigFilePrecedence) {
  std::ofstream(path("run.cfg")) << "# comment line\n"
                                    "n = 11\n"
                                    "delta = 0.05   # trailing comment\n"
                                    "velocity = 1,100\n"
                                    "threads = 2\n";
  const CliConfig c = parse({"bench", "--config", path("run.cfg"), "--delta", "0.001"},
                            env_of({{"KANSA_RFC_THREADS", "5"}}));
  EXPECT_EQ(c.experiment.n_per_side, 11u);
  EXPECT_EQ(c.experiment.delta, 0.001);  // flag beats file
  EXPECT_EQ(c.experiment.velocity[1], 100.0);
  EXPECT_EQ(c.experiment.threads, 2u);  // file beats environment
  EXPECT_EQ(*c.config_file, path("run.cfg"));
}

TEST(CliParse, ThreadsFromEnvironment) {
  EXPECT_EQ(parse({"bench"}, env_of({{"KANSA_RFC_THREADS", "3"}})).experiment.threads, 3u);
  EXPECT_EQ(parse({"bench", "--threads", "1"}, env_of({{"KANSA_RFC_THREADS", "3"}})).experiment.threads,
            1u);
  EXPECT_EQ(run_cli({"bench"}, env_of({{"KANSA_RFC_THREADS", "x"}})).code, 2);
}

TEST_F(TempDir, MissingConfigFileIsIoError) {
  EXPECT_EQ(run_cli({"solve", "--config", path("nope.cfg")}).code, 4);
}

TEST_F(TempDir, SolveDumpsCoefficientsAndMatrix) {
  const Outcome r = run_cli({"solve", "--n", "5", "--delta", "0.01", "--dump-coeffs", path("c.csv"),
                         "--dump-matrix", path("k.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("N=25"), std::string::npos);
  EXPECT_NE(r.out.find("rmse="), std::string::npos);
  EXPECT_NE(r.out.find("condition_estimate="), std::string::npos);
  EXPECT_NE(r.out.find("min_abs_pivot="), std::string::npos);
  const auto coeffs = lines_of(slurp(path("c.csv")));
  ASSERT_EQ(coeffs.size(), 26u);
  EXPECT_EQ(coeffs[0], "index,coefficient");
  EXPECT_EQ(coeffs[25].rfind("24,", 0), 0u);
  const auto rows = lines_of(slurp(path("k.txt")));
  ASSERT_EQ(rows.size(), 25u);
  EXPECT_EQ(std::count(rows[0].begin(), rows[0].end(), ' '), 24);
}

TEST(CliRun, SolveIsDeterministic) {
  const Outcome a = run_cli({"solve", "--n", "7", "--delta", "0.1", "--base-seed", "9"});
  const Outcome b = run_cli({"solve", "--n", "7", "--delta", "0.1", "--base-seed", "9"});
  const Outcome c = run_cli({"solve", "--n", "7", "--delta", "0.1", "--base-seed", "10"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(CliRun, BenchWritesCsvToStdout) {
  const Outcome r = run_cli({"bench", "--n", "5", "--delta", "0.01", "--trials", "3", "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rfind("N,n,epsilon,", 0), 0u);
  EXPECT_EQ(rows[1].rfind("25,5,2.5,0,0,0.01,3,", 0), 0u);
}

TEST_F(TempDir, Table1RepeatedSeedGivesIdenticalFile) {
  const std::vector<std::string> base{"table1", "--trials", "2",     "--base-seed",
                                      "7",      "--threads", "1",    "--velocity",
                                      "1,1"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.csv")});
  b.insert(b.end(), {"--out", path("b.csv")});
  ASSERT_EQ(run_cli(a).code, 0);
  ASSERT_EQ(run_cli(b).code, 0);
  const std::string ta = slurp(path("a.csv"));
  EXPECT_EQ(ta, slurp(path("b.csv")));
  EXPECT_EQ(lines_of(ta).size(), 17u);  // header + 4 sizes x 4 deltas
}

TEST_F(TempDir, GridDumpWritesPointsAndCenters) {
  const Outcome r = run_cli({"grid-dump", "--n", "3", "--delta", "0", "--out", path("g")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pts = lines_of(slurp(path("g_points.csv")));
  const auto ctr = lines_of(slurp(path("g_centers.csv")));
  ASSERT_EQ(pts.size(), 10u);
  ASSERT_EQ(ctr.size(), 10u);
  EXPECT_EQ(pts[0], "index,x1,x2,role,tag");
  EXPECT_EQ(pts, ctr);  // delta = 0: centers coincide with points
  EXPECT_EQ(pts[1], "4,0.5,0.5,interior,none");
  EXPECT_EQ(std::count_if(pts.begin(), pts.end(),
                          [](const std::string& l) { return l.find("dirichlet") != std::string::npos; }),
            6);
  EXPECT_EQ(std::count_if(pts.begin(), pts.end(),
                          [](const std::string& l) { return l.find("neumann") != std::string::npos; }),
            2);
}

TEST_F(TempDir, GridDumpPerturbedCentersDiffer) {
  ASSERT_EQ(run_cli({"grid-dump", "--n", "3", "--delta", "0.1", "--out", path("g")}).code, 0);
  EXPECT_NE(slurp(path("g_points.csv")), slurp(path("g_centers.csv")));
}

TEST(CliRun, UnwritableOutputIsIoError) {
  const Outcome r = run_cli({"grid-dump", "--n", "3", "--out", "/nonexistent-dir/sub/g"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("io error"), std::string::npos);
}

TEST(CliRun, ProbeReportsNoSingularDraws) {
  const Outcome r = run_cli({"probe", "--n", "5", "--delta", "0.1", "--trials", "20"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("singular_count=0"), std::string::npos);
}

}  // namespace
}  // namespace kansa::cli
