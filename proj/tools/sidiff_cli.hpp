#pragma once

// Command-line front end: simulate | estimate | experiment | analyze.
// Kept in a header so the test suite can drive it in-process.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sidiff/sidiff.hpp"

namespace sidiff::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  ok = 0,
  usage = 2,
  config_error = 3,
  data_error = 4,
  io_error = 5,
  numerical_error = 6,
};

inline int exit_code_for(const Error &e) {
  const auto &c = e.category();
  if (c == "config")
    return config_error;
  if (c == "data")
    return data_error;
  if (c == "io")
    return io_error;
  return numerical_error;
}

/// Output location: the flag value if given, else `fallback` inside
/// $SIDIFF_OUT_DIR (or the working directory).
inline fs::path output_path(const std::string &flag, const std::string &fallback) {
  if (!flag.empty())
    return flag;
  if (const char *dir = std::getenv("SIDIFF_OUT_DIR"); dir && *dir)
    return fs::path(dir) / fallback;
  return fallback;
}

inline fs::path sidecar_path(const fs::path &csv) {
  auto p = csv;
  p += ".json";
  return p;
}

inline std::string dump_json(const json &j) { return j.dump(2) + "\n"; }

/// Seed recorded in a CSV's metadata line, if any.
inline std::optional<std::uint64_t> read_metadata_seed(const fs::path &path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#", 0) != 0)
    return std::nullopt;
  const auto pos = line.find("seed=");
  if (pos == std::string::npos)
    return std::nullopt;
  try {
    return std::stoull(line.substr(pos + 5));
  } catch (...) {
    return std::nullopt;
  }
}

inline json diagnostics_json(const EstimateResult &r) {
  json lc = json::array();
  for (auto k : r.diagnostics.low_confidence)
    lc.push_back(r.times[k]);
  return {{"negative_sigma2_fraction", r.diagnostics.negative_sigma2_fraction},
          {"boundary_clips", r.diagnostics.boundary_clips},
          {"saturated", r.diagnostics.saturated},
          {"low_confidence_times", lc}};
}

struct SimulateArgs {
  std::string config, out, scheme = "exact", drift = "transform";
  double x0 = 0, K = 0, t0 = 0, T = 0, delta = 0;
  std::size_t paths = 50, refine = 10;
  std::uint64_t seed = 1;
};

inline int run_simulate(const SimulateArgs &a, std::ostream &out) {
  const json rates_json = read_json_file(a.config);
  const RatePair rates = rates_from_json(rates_json, a.K);
  const TimeGrid grid = TimeGrid::covering(a.t0, a.T, a.delta);
  rates.validate(grid.t0(), grid.t_end(), grid.size());

  json cfg = {{"rates", rates_json}, {"x0", a.x0},         {"K", a.K},
              {"t0", a.t0},          {"T", a.T},           {"delta", a.delta},
              {"paths", a.paths},    {"scheme", a.scheme}, {"refine", a.refine}};
  json side = cfg;
  std::optional<PathSet> paths;
  if (a.scheme == "exact") {
    paths = simulate_exact(rates, a.x0, grid, a.paths, a.seed);
  } else if (a.scheme == "em") {
    EulerOptions opt;
    opt.refinement = a.refine;
    if (a.drift == "transform")
      opt.drift = DriftForm::Transform;
    else if (a.drift == "half-sigma")
      opt.drift = DriftForm::HalfSigma;
    else
      throw ConfigError("unknown drift '" + a.drift + "' (transform | half-sigma)");
    cfg["drift"] = a.drift;
    side["drift"] = a.drift;
    auto r = simulate_em(rates, a.x0, grid, a.paths, a.seed, opt);
    side["clamp_hits"] = r.clamp_hits;
    paths = std::move(r.paths);
  } else {
    throw ConfigError("unknown scheme '" + a.scheme + "' (exact | em)");
  }
  const io::Metadata meta{config_hash(cfg), a.seed, version};
  side["seed"] = a.seed;
  side["saturated"] = paths->saturated;
  side["lambda"] = rates_json.at("lambda");
  side["sigma2"] = rates_json.at("sigma2");
  side["version"] = version;
  side.erase("rates");

  const fs::path dest = output_path(a.out, "paths.csv");
  io::write_atomic(dest, io::path_set_csv(*paths, meta));
  io::write_atomic(sidecar_path(dest), dump_json(side));
  out << "wrote " << a.paths << " paths x " << grid.size() << " times to " << dest.string()
      << "\n";
  return ok;
}

struct EstimateArgs {
  std::string in, out;
  double K = 0, clip_eps = 1e-9;
  std::size_t stride = 1;
  bool mle = false;
  std::optional<std::uint64_t> seed;
};

inline int run_estimate(const EstimateArgs &a, std::ostream &out) {
  const PathSet x = io::read_path_set_csv(a.in, a.K);
  GmmOptions opt;
  opt.stride = a.stride;
  opt.clip_eps = a.clip_eps;
  opt.with_mle = a.mle;
  const EstimateResult r = estimate_from_paths(x, opt);

  const std::uint64_t seed = a.seed.value_or(read_metadata_seed(a.in).value_or(0));
  json cfg = {{"in", fs::path(a.in).filename().string()}, {"K", a.K},
              {"stride", a.stride}, {"clip_eps", a.clip_eps}, {"mle", a.mle}};
  const io::Metadata meta{config_hash(cfg), seed, version};
  json side = {{"config", cfg}, {"seed", seed}, {"version", version},
               {"diagnostics", diagnostics_json(r)}};
  if (r.mle)
    side["mle"] = {{"lambda", r.mle->lambda}, {"sigma2", r.mle->sigma2}};

  const fs::path dest = output_path(a.out, "estimate.csv");
  io::write_atomic(dest, io::estimate_csv(r, meta));
  io::write_atomic(sidecar_path(dest), dump_json(side));
  out << "estimated rates on " << r.times.size() << " times; wrote " << dest.string() << "\n";
  if (r.mle)
    out << "MLE: lambda = " << r.mle->lambda << ", sigma2 = " << r.mle->sigma2 << "\n";
  return ok;
}

struct ExperimentArgs {
  std::string config, out_dir;
  std::optional<std::size_t> workers, replicates;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
};

inline int run_experiment_cmd(const ExperimentArgs &a, std::ostream &out,
                              std::ostream &err) {
  json source = read_json_file(a.config);
  if (a.seed)
    source["master_seed"] = *a.seed;
  std::optional<std::size_t> replicates = a.replicates;
  if (a.full_scale && !replicates)
    replicates = 500;
  if (replicates) {
    for (auto &e : source.at("experiments"))
      e["replicates"] = *replicates;
  }
  ExperimentSuite suite = suite_from_json(source);
  if (a.workers) {
    for (auto &cfg : suite.experiments)
      cfg.workers = *a.workers;
  }

  // The worker count does not change results, so it stays out of the hash.
  json hashed = source;
  hashed.erase("workers");
  if (hashed.contains("defaults"))
    hashed["defaults"].erase("workers");
  for (auto &e : hashed["experiments"])
    e.erase("workers");
  const io::Metadata meta{config_hash(hashed), suite.master_seed, version};

  std::vector<ExperimentReport> reports;
  for (const auto &cfg : suite.experiments) {
    reports.push_back(run_experiment(cfg));
    const auto &r = reports.back();
    err << r.name << ": " << cfg.replicates << " replicates in " << r.runtime_seconds
        << " s";
    if (r.total_clips || r.total_saturated)
      err << " (boundary clips " << r.total_clips << ", saturated " << r.total_saturated << ")";
    err << "\n";
  }

  const fs::path dir = output_path(a.out_dir, "reports");
  io::write_atomic(dir / "table1.csv", report::table1_csv(reports, suite.experiments, meta));
  io::write_atomic(dir / "boxplot.csv", report::boxplot_csv(reports, meta));
  io::write_atomic(dir / "kde.csv", report::kde_csv(reports, meta));
  io::write_atomic(dir / "summary.csv", report::summary_csv(reports, suite.experiments, meta));
  for (const auto &r : reports)
    io::write_atomic(dir / ("bands_" + r.name + ".csv"), report::bands_csv(r, meta));
  out << "wrote reports for " << reports.size() << " experiments to " << dir.string() << "\n";
  return ok;
}

struct AnalyzeArgs {
  std::string in, pop, out, time_unit = "index";
  double K = 0, clip_eps = 1e-9;
  std::size_t stride = 1;
  bool global_max = false;
  std::optional<double> t_min, t_max;
  std::uint64_t seed = 0;
};

inline int run_analyze(const AnalyzeArgs &a, std::ostream &out) {
  const auto table = io::load_csv(a.in, a.pop);
  io::AnalysisOptions opt;
  opt.normalize.K = a.K;
  opt.normalize.clip_eps = a.clip_eps;
  opt.normalize.global_max = a.global_max;
  if (a.time_unit == "index")
    opt.normalize.unit = io::TimeUnit::Index;
  else if (a.time_unit == "calendar")
    opt.normalize.unit = io::TimeUnit::Calendar;
  else
    throw ConfigError("unknown time unit '" + a.time_unit + "' (index | calendar)");
  opt.stride = a.stride;
  opt.t_min = a.t_min;
  opt.t_max = a.t_max;
  const auto r = io::analyze(table, opt);

  json cfg = {{"in", fs::path(a.in).filename().string()},
              {"pop", fs::path(a.pop).filename().string()},
              {"K", a.K},
              {"stride", a.stride},
              {"time_unit", a.time_unit},
              {"global_max", a.global_max},
              {"clip_eps", a.clip_eps}};
  if (a.t_min)
    cfg["t_min"] = *a.t_min;
  if (a.t_max)
    cfg["t_max"] = *a.t_max;
  const io::Metadata meta{config_hash(cfg), a.seed, version};
  json side = {{"config", cfg},
               {"seed", a.seed},
               {"version", version},
               {"locations", table.locations.size()},
               {"normalization_clips", r.paths.clipped},
               {"suggested_K", r.suggested_K},
               {"suggested_K_note", "heuristic: max observation x 1.05"},
               {"diagnostics", diagnostics_json(r.estimate)}};
  const fs::path dest = output_path(a.out, "estimate.csv");
  io::write_atomic(dest, io::estimate_csv(r.estimate, meta));
  io::write_atomic(sidecar_path(dest), dump_json(side));
  out << "analyzed " << table.locations.size() << " locations x " << r.paths.times()
      << " times; wrote " << dest.string() << "\n";
  return ok;
}

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char *const *argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  CLI::App app{"Simulation and inference for the time-inhomogeneous SI diffusion"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Generate sample paths of X(t)");
  simulate->add_option("--config", sim.config, "Rates JSON file")->required();
  simulate->add_option("--x0", sim.x0, "Initial infected count")->required();
  simulate->add_option("--K", sim.K, "Carrying capacity")->required();
  simulate->add_option("--t0", sim.t0, "Initial time")->capture_default_str();
  simulate->add_option("--T", sim.T, "Final time")->required();
  simulate->add_option("--delta", sim.delta, "Observation step")->required();
  simulate->add_option("--paths", sim.paths, "Number of paths d")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV");
  simulate->add_option("--scheme", sim.scheme, "exact | em")->capture_default_str();
  simulate->add_option("--refine", sim.refine, "Euler steps per interval")->capture_default_str();
  simulate->add_option("--drift", sim.drift, "Euler drift: transform | half-sigma")
      ->capture_default_str();

  EstimateArgs est;
  auto *estimate = app.add_subcommand("estimate", "Estimate lambda(t), sigma2(t) from paths");
  estimate->add_option("--in", est.in, "Path CSV")->required();
  estimate->add_option("--K", est.K, "Carrying capacity")->required();
  estimate->add_option("--stride", est.stride, "Keep every stride-th knot")->capture_default_str();
  estimate->add_option("--clip-eps", est.clip_eps, "Boundary clip fraction")->capture_default_str();
  estimate->add_option("--out", est.out, "Output CSV");
  estimate->add_flag("--mle", est.mle, "Also report homogeneous MLE scalars");
  estimate->add_option("--seed", est.seed, "Seed recorded in the metadata");

  ExperimentArgs exp;
  auto *experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment suite");
  experiment->add_option("--config", exp.config, "Experiment JSON file")->required();
  experiment->add_option("--out-dir", exp.out_dir, "Report directory");
  experiment->add_option("--workers", exp.workers, "Worker threads");
  experiment->add_option("--replicates", exp.replicates, "Override N for every experiment");
  experiment->add_option("--seed", exp.seed, "Override the master seed");
  experiment->add_flag("--full-scale", exp.full_scale, "Use N = 500 replicates");

  AnalyzeArgs an;
  auto *analyze = app.add_subcommand("analyze", "Estimate rates from incidence data");
  analyze->add_option("--in", an.in, "Case counts CSV")->required();
  analyze->add_option("--pop", an.pop, "Populations CSV")->required();
  analyze->add_option("--K", an.K, "Normalized carrying capacity")->required();
  analyze->add_option("--out", an.out, "Output CSV");
  analyze->add_option("--stride", an.stride, "Keep every stride-th knot")->capture_default_str();
  analyze->add_option("--clip-eps", an.clip_eps, "Boundary clip fraction")->capture_default_str();
  analyze->add_option("--time-unit", an.time_unit, "index | calendar")->capture_default_str();
  analyze->add_flag("--global-max", an.global_max, "Normalize by the largest population");
  analyze->add_option("--t-min", an.t_min, "Start of the estimation window");
  analyze->add_option("--t-max", an.t_max, "End of the estimation window");
  analyze->add_option("--seed", an.seed, "Seed recorded in the metadata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return usage;
  }

  try {
    if (simulate->parsed())
      return run_simulate(sim, out);
    if (estimate->parsed())
      return run_estimate(est, out);
    if (experiment->parsed())
      return run_experiment_cmd(exp, out, err);
    if (analyze->parsed())
      return run_analyze(an, out);
  } catch (const Error &e) {
    err << "error [" << e.category() << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception &e) {
    err << "error [config]: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception &e) {
    err << "error [internal]: " << e.what() << "\n";
    return numerical_error;
  }
  return usage;
}

} // namespace sidiff::cli
