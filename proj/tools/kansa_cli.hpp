#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "kansa/kansa.hpp"

namespace kansa::cli {

enum class ExitCode : int { success = 0, usage = 2, singular = 3, io = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subcommand { solve, bench, table1, probe, grid_dump };

struct CliConfig {
  Subcommand subcommand = Subcommand::solve;
  ExperimentConfig experiment;
  std::optional<std::string> config_file;
  bool velocity_given = false;
  std::string dump_coeffs;
  std::string dump_matrix;
  int verbosity = 1;  // 0 quiet, 1 normal, 2 verbose
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty())
    throw UsageError("invalid value for " + key + ": '" + text + "'");
  return value;
}

inline std::array<double, 2> parse_velocity(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw UsageError("invalid value for velocity: '" + text + "' (expected vx,vy)");
  return {parse_number<double>("velocity", text.substr(0, comma)),
          parse_number<double>("velocity", text.substr(comma + 1))};
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{"n",       "epsilon",     "delta",       "velocity",
                                             "trials",  "base-seed",   "threads",     "out",
                                             "timing",  "dump-coeffs", "dump-matrix"};
  return keys;
}

// Applies one key=value setting; flags and config files share this path.
inline void apply_setting(CliConfig& cfg, const std::string& key, const std::string& value) {
  ExperimentConfig& e = cfg.experiment;
  if (key == "n") {
    const long long n = parse_number<long long>(key, value);
    if (n < 3) throw UsageError("n must be at least 3 (got " + value + ")");
    e.n_per_side = static_cast<std::size_t>(n);
  } else if (key == "epsilon") {
    e.epsilon = parse_number<double>(key, value);
    if (!(e.epsilon > 0.0) || !std::isfinite(e.epsilon))
      throw UsageError("epsilon must be positive (got " + value + ")");
  } else if (key == "delta") {
    e.delta = parse_number<double>(key, value);
    if (!(e.delta >= 0.0) || !std::isfinite(e.delta))
      throw UsageError("delta must be nonnegative (got " + value + ")");
  } else if (key == "velocity") {
    e.velocity = parse_velocity(value);
    if (!std::isfinite(e.velocity[0]) || !std::isfinite(e.velocity[1]))
      throw UsageError("velocity must be finite");
    cfg.velocity_given = true;
  } else if (key == "trials") {
    const long long m = parse_number<long long>(key, value);
    if (m < 1) throw UsageError("trials must be at least 1 (got " + value + ")");
    e.trials = static_cast<std::size_t>(m);
  } else if (key == "base-seed") {
    e.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    const long long t = parse_number<long long>(key, value);
    if (t < 0) throw UsageError("threads must be nonnegative (got " + value + ")");
    e.threads = static_cast<unsigned>(t);
  } else if (key == "out") {
    e.output_path = trim(value);
  } else if (key == "timing") {
    const std::string v = trim(value);
    if (v == "1" || v == "true") e.record_timing = true;
    else if (v == "0" || v == "false") e.record_timing = false;
    else throw UsageError("invalid value for timing: '" + value + "'");
  } else if (key == "dump-coeffs") {
    cfg.dump_coeffs = trim(value);
  } else if (key == "dump-matrix") {
    cfg.dump_matrix = trim(value);
  } else {
    throw UsageError("unknown configuration key '" + key + "'");
  }
}

}  // namespace detail

/// Flat key=value text; '#' starts a comment. Keys are the long flag names.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(line.substr(0, eq));
    const auto& keys = detail::known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError("unknown configuration key '" + key + "'");
    out.emplace_back(std::move(key), detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ParseOutcome {
  std::optional<CliConfig> config;  // empty when help was printed
  std::string help;
};

/**
 * Precedence: command-line flags, then the --config file, then
 * KANSA_RFC_THREADS (threads only), then built-in defaults.
 */
inline ParseOutcome parse_config(const std::vector<std::string>& args,
                                 const EnvLookup& env = process_env) {
  CLI::App app{"Kansa collocation with MultiQuadric RBFs and random fictitious centers",
               "kansa_rfc"};
  app.require_subcommand(1);

  std::map<std::string, std::string> flags;
  std::optional<std::string> config_path;
  int verbose = 0;
  bool quiet = false;

  struct Sub {
    Subcommand kind;
    const char* name;
    const char* description;
  };
  const Sub subs[] = {
      {Subcommand::solve, "solve", "Solve one randomized collocation system and report errors"},
      {Subcommand::bench, "bench", "Run m trials of one configuration and write a CSV row"},
      {Subcommand::table1, "table1", "Sweep velocities x grid sizes x deltas"},
      {Subcommand::probe, "probe", "Nonsingularity statistics over random center draws"},
      {Subcommand::grid_dump, "grid-dump", "Write collocation points and one center draw as CSV"},
  };

  std::vector<std::pair<CLI::App*, Subcommand>> registered;
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.description);
    auto add = [&](const std::string& key, const std::string& desc) {
      sc->add_option_function<std::string>(
          "--" + key, [&flags, key](const std::string& v) { flags[key] = v; }, desc);
    };
    add("n", "Grid points per side (N = n^2), default 21");
    add("epsilon", "MultiQuadric shape parameter, default 2.5");
    add("delta", "Center perturbation half-width, default 0.01");
    add("velocity", "Constant velocity vx,vy, default 0,0");
    add("trials", "Number of random trials m, default 100");
    add("base-seed", "Base seed for per-trial seeds, default 42");
    add("threads", "Worker threads (0 = all cores)");
    add("out", "Output path (CSV; grid-dump uses it as a file prefix)");
    if (s.kind == Subcommand::solve) {
      add("dump-coeffs", "Write the coefficient vector to this CSV file");
      add("dump-matrix", "Write K_N as text, one row per line");
    }
    sc->add_flag_callback("--timing", [&flags] { flags["timing"] = "1"; },
                          "Record wall time in the seconds_total column");
    sc->add_option("--config", config_path, "key=value configuration file");
    sc->add_flag_function("-v,--verbose", [&verbose](std::int64_t c) { verbose += static_cast<int>(c); },
                          "More output");
    sc->add_flag_callback("-q,--quiet", [&quiet] { quiet = true; }, "Less output");
    registered.emplace_back(sc, s.kind);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (auto& [sc, kind] : registered)
      if (sc->parsed()) return {std::nullopt, sc->help()};
    return {std::nullopt, app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return {std::nullopt, app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliConfig cfg;
  for (auto& [sc, kind] : registered)
    if (sc->parsed()) cfg.subcommand = kind;
  cfg.verbosity = quiet ? 0 : 1 + verbose;

  if (const auto t = env("KANSA_RFC_THREADS"); t && !t->empty()) {
    try {
      detail::apply_setting(cfg, "threads", *t);
    } catch (const UsageError& e) {
      throw UsageError(std::string("KANSA_RFC_THREADS: ") + e.what());
    }
  }
  if (config_path) {
    cfg.config_file = config_path;
    for (const auto& [k, v] : parse_config_text(read_file(*config_path)))
      detail::apply_setting(cfg, k, v);
  }
  for (const auto& [k, v] : flags) detail::apply_setting(cfg, k, v);
  return {cfg, {}};
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

inline void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

// Writes via `emit` to the configured path, or to `out` when no path is set.
template <class Emit>
void emit_csv(const std::string& path, std::ostream& out, Emit emit) {
  if (path.empty()) {
    emit(out);
    return;
  }
  auto f = open_output(path);
  emit(f);
  finish(f, path);
}

inline int cmd_solve(const CliConfig& cfg, std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  const std::uint64_t seed = trial_seed(e.base_seed, 0);
  const CollocationSet colloc = make_uniform_grid(e.n_per_side);
  const CenterSet centers = perturb_centers(colloc, e.delta, seed);
  const ProblemSpec spec = manufactured_problem(e);
  const CollocationSolution sol = solve_collocation(spec, colloc, centers);

  if (!cfg.dump_matrix.empty()) {
    auto f = open_output(cfg.dump_matrix);
    csv::write_matrix(f, sol.system.matrix);
    finish(f, cfg.dump_matrix);
  }
  out << "N=" << colloc.size() << " n=" << e.n_per_side
      << " epsilon=" << csv::format_double(e.epsilon) << " delta=" << csv::format_double(e.delta)
      << " velocity=" << csv::format_double(e.velocity[0]) << ','
      << csv::format_double(e.velocity[1]) << " seed=" << seed << '\n';
  if (!sol.report) {
    out << "singular system: exact zero pivot (min_abs_pivot="
        << csv::format_double(sol.factorization.min_abs_pivot) << ")\n";
    return static_cast<int>(ExitCode::singular);
  }
  const double rmse =
      rmse_at_nodes(colloc, centers, sol.report->solution, spec.kernel, reference_solution);
  out << "rmse=" << csv::format_double(rmse) << '\n'
      << "condition_estimate=" << csv::format_double(sol.report->condition_estimate) << '\n'
      << "min_abs_pivot=" << csv::format_double(sol.report->min_abs_pivot) << '\n';
  if (cfg.verbosity > 1)
    out << "relative_residual=" << csv::format_double(sol.report->residual_norm) << '\n';
  if (!cfg.dump_coeffs.empty()) {
    auto f = open_output(cfg.dump_coeffs);
    csv::write_vector(f, sol.report->solution, "coefficient");
    finish(f, cfg.dump_coeffs);
  }
  return static_cast<int>(ExitCode::success);
}

inline int cmd_bench(const CliConfig& cfg, std::ostream& out) {
  const AggregateResult agg = run_benchmark(cfg.experiment);
  emit_csv(cfg.experiment.output_path, out, [&](std::ostream& os) {
    write_benchmark_header(os);
    write_benchmark_row(os, agg);
  });
  if (!cfg.experiment.output_path.empty() && cfg.verbosity > 0)
    out << "rmse_geomean=" << csv::format_double(agg.rmse_geomean)
        << " singular_count=" << agg.singular_count << '\n';
  return static_cast<int>(ExitCode::success);
}

inline int cmd_table1(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const ExperimentConfig& e = cfg.experiment;
  Table1Options opt;
  opt.epsilon = e.epsilon;
  opt.trials = e.trials;
  opt.base_seed = e.base_seed;
  opt.threads = e.threads;
  opt.record_timing = e.record_timing;
  if (cfg.velocity_given) opt.velocities = {e.velocity};
  auto progress = [&](const Table1Cell& c) {
    if (cfg.verbosity < 2) return;
    err << "cell N=" << c.config.node_count() << " v=(" << c.config.velocity[0] << ','
        << c.config.velocity[1] << ") delta=" << c.config.delta << ": "
        << (c.result ? csv::format_double(c.result->rmse_geomean) : "failed: " + c.error) << '\n';
  };
  const auto cells = run_table1(opt, progress);
  emit_csv(e.output_path, out, [&](std::ostream& os) { write_table1_csv(os, cells); });
  return static_cast<int>(ExitCode::success);
}

inline int cmd_probe(const CliConfig& cfg, std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  const ProbeReport rep = unisolvence_probe(e, e.trials);
  if (!e.output_path.empty()) {
    auto f = open_output(e.output_path);
    write_probe_csv(f, rep);
    finish(f, e.output_path);
  }
  out << "N=" << e.node_count() << " delta=" << csv::format_double(e.delta)
      << " trials=" << rep.trials.size() << '\n'
      << "singular_count=" << rep.singular_count << '\n'
      << "sigma_min min/median/max=" << csv::format_double(rep.sigma_min_min) << ' '
      << csv::format_double(rep.sigma_min_median) << ' '
      << csv::format_double(rep.sigma_min_max) << '\n'
      << "min_abs_pivot_min=" << csv::format_double(rep.min_abs_pivot_min) << '\n';
  if (rep.unconverged_count > 0)
    out << "sigma_min_unconverged=" << rep.unconverged_count << '\n';
  return rep.singular_count > 0 ? static_cast<int>(ExitCode::singular)
                                : static_cast<int>(ExitCode::success);
}

inline int cmd_grid_dump(const CliConfig& cfg, std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  const std::string prefix = e.output_path.empty() ? std::string("grid") : e.output_path;
  const CollocationSet colloc = make_uniform_grid(e.n_per_side);
  const CenterSet centers = perturb_centers(colloc, e.delta, trial_seed(e.base_seed, 0));
  const std::string points_path = prefix + "_points.csv";
  const std::string centers_path = prefix + "_centers.csv";
  {
    auto f = open_output(points_path);
    write_points_csv(f, colloc);
    finish(f, points_path);
  }
  {
    auto f = open_output(centers_path);
    write_centers_csv(f, colloc, centers);
    finish(f, centers_path);
  }
  if (cfg.verbosity > 0) out << "wrote " << points_path << " and " << centers_path << '\n';
  return static_cast<int>(ExitCode::success);
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const EnvLookup& env = process_env) {
  try {
    const ParseOutcome parsed = parse_config(args, env);
    if (!parsed.config) {
      out << parsed.help;
      return static_cast<int>(ExitCode::success);
    }
    const CliConfig& cfg = *parsed.config;
    switch (cfg.subcommand) {
      case Subcommand::solve: return detail::cmd_solve(cfg, out);
      case Subcommand::bench: return detail::cmd_bench(cfg, out);
      case Subcommand::table1: return detail::cmd_table1(cfg, out, err);
      case Subcommand::probe: return detail::cmd_probe(cfg, out);
      case Subcommand::grid_dump: return detail::cmd_grid_dump(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::io);
  } catch (const SolveError& e) {
    err << "singular system: " << e.what() << '\n';
    return static_cast<int>(ExitCode::singular);
  }
  return static_cast<int>(ExitCode::usage);
}

}  // namespace kansa::cli
