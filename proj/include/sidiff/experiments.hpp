#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/estimate.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/rates.hpp"
#include "sidiff/simulate.hpp"
#include "sidiff/stats.hpp"

namespace sidiff {

struct ExperimentConfig {
  std::string name = "experiment";
  RatePair truth{RateFunction::constant(0.4), RateFunction::constant(0.1), 200.0};
  double x0 = 20.0;
  TimeGrid grid{0.0, 0.01, 5001};
  std::size_t paths = 50;      ///< d, paths per replicate
  std::size_t replicates = 100; ///< N
  std::uint64_t master_seed = 1;
  bool gmm = true;
  bool mle = false;
  std::size_t stride = 1;
  /// Every eval_stride-th observation time enters the reported curves.
  std::size_t eval_stride = 10;
  /// Interior window for time averages; defaults to [t0 + 2, T - 2].
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  /// Points where |lambda(t)| falls below this are skipped by the curve MRE
  /// of lambda. sigma^2 is strictly positive and needs no such cut.
  double min_abs_truth = 0.05;
  bool unbiased_sd = false;
  std::size_t workers = 1;

  double lo() const { return window_lo.value_or(grid.t0() + 2.0); }
  double hi() const { return window_hi.value_or(grid.t_end() - 2.0); }

  void validate() const {
    if (replicates < 1)
      throw ConfigError(name + ": need at least one replicate");
    if (paths < 2)
      throw ConfigError(name + ": need at least two paths per replicate");
    if (!gmm && !mle)
      throw ConfigError(name + ": no estimation method selected");
    if (mle && !(truth.lambda.is_constant() && truth.sigma2.is_constant()))
      throw ConfigError(name + ": MLE requires constant lambda and sigma^2");
    if (stride < 1 || eval_stride < 1)
      throw ConfigError(name + ": strides must be >= 1");
    if (!(lo() < hi()) || lo() < grid.t0() || hi() > grid.t_end())
      throw ConfigError(name + ": averaging window outside the observation span");
    truth.validate(grid.t0(), grid.t_end(), grid.size());
  }
};

/// Outcome of one simulate-then-estimate replicate.
struct ReplicateResult {
  std::vector<double> lambda_curve; ///< on the evaluation times
  std::vector<double> sigma2_curve; ///< raw estimate on the evaluation times
  double gmm_lambda = 0.0; ///< time average of lambda_hat over the window
  double gmm_sigma2 = 0.0; ///< time average of raw sigma2_hat over the window
  std::optional<MleEstimate> mle;
  std::size_t clips = 0;
  std::size_t saturated = 0;
  double negative_sigma2_fraction = 0.0;
};

struct MethodSummary {
  std::string method; ///< "GMM" or "MLE"
  double mre_lambda = 0.0;
  double mre_sigma2 = 0.0;
  std::vector<double> lambda; ///< per-replicate scalar estimates
  std::vector<double> sigma2;
};

struct ExperimentReport {
  std::string name;
  std::uint64_t master_seed = 0;
  std::vector<double> eval_times;
  std::vector<double> lambda_true;
  std::vector<double> sigma2_true;
  std::vector<ReplicateResult> replicates;
  std::vector<MethodSummary> methods;
  /// Curve MREs over the window (defined for every truth).
  double curve_mre_lambda = 0.0;
  double curve_mre_sigma2 = 0.0;
  std::optional<stats::Band> lambda_band;
  std::optional<stats::Band> sigma2_band;
  std::size_t total_clips = 0;
  std::size_t total_saturated = 0;
  double runtime_seconds = 0.0;

  const MethodSummary *method(const std::string &m) const {
    for (const auto &s : methods)
      if (s.method == m)
        return &s;
    return nullptr;
  }
};

/// One replicate: exact simulation with seeds derived from
/// (master_seed, replicate), then estimation.
inline ReplicateResult run_replicate(const ExperimentConfig &cfg,
                                     std::uint32_t replicate) {
  ExactOptions sim_opt;
  sim_opt.replicate = replicate;
  const PathSet x = simulate_exact(cfg.truth, cfg.x0, cfg.grid, cfg.paths,
                                   cfg.master_seed, sim_opt);
  GmmOptions opt;
  opt.stride = cfg.stride;
  opt.with_mle = cfg.mle;
  const EstimateResult est = estimate_from_paths(x, opt);

  ReplicateResult r;
  for (std::size_t j = 0; j < cfg.grid.size(); j += cfg.eval_stride) {
    r.lambda_curve.push_back(est.lambda_hat[j]);
    r.sigma2_curve.push_back(est.sigma2_raw[j]);
  }
  const double lo = cfg.lo();
  const double hi = cfg.hi();
  r.gmm_lambda = (est.curves.mean(hi) - est.curves.mean(lo)) / (hi - lo);
  r.gmm_sigma2 = (est.curves.cov(hi) - est.curves.cov(lo)) / (hi - lo);
  r.mle = est.mle;
  r.clips = est.diagnostics.boundary_clips;
  r.saturated = est.diagnostics.saturated;
  r.negative_sigma2_fraction = est.diagnostics.negative_sigma2_fraction;
  return r;
}

/// Replicated Monte Carlo study. Replicates may run on several threads; the
/// report is a fold in replicate order, so it does not depend on `workers`.
inline ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  ExperimentReport rep;
  rep.name = cfg.name;
  rep.master_seed = cfg.master_seed;
  for (std::size_t j = 0; j < cfg.grid.size(); j += cfg.eval_stride) {
    const double t = cfg.grid.time(j);
    rep.eval_times.push_back(t);
    rep.lambda_true.push_back(cfg.truth.lambda(t));
    rep.sigma2_true.push_back(cfg.truth.sigma2(t));
  }

  rep.replicates.resize(cfg.replicates);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<std::size_t> failed_index;
  std::string failure;
  auto work = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.replicates)
        return;
      try {
        rep.replicates[r] = run_replicate(cfg, static_cast<std::uint32_t>(r));
      } catch (const std::exception &e) {
        std::lock_guard lock(failure_mutex);
        if (!failed_index || r < *failed_index) {
          failed_index = r;
          failure = e.what();
        }
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.replicates);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(work);
    for (auto &t : pool)
      t.join();
  }
  if (failed_index)
    throw NumericalError(cfg.name + ": replicate " + std::to_string(*failed_index) +
                         " failed: " + failure);

  std::vector<std::vector<double>> lambda_curves, sigma2_curves;
  MethodSummary gmm{"GMM", 0, 0, {}, {}};
  MethodSummary mle{"MLE", 0, 0, {}, {}};
  for (const auto &r : rep.replicates) {
    lambda_curves.push_back(r.lambda_curve);
    sigma2_curves.push_back(r.sigma2_curve);
    gmm.lambda.push_back(r.gmm_lambda);
    gmm.sigma2.push_back(r.gmm_sigma2);
    if (r.mle) {
      mle.lambda.push_back(r.mle->lambda);
      mle.sigma2.push_back(r.mle->sigma2);
    }
    rep.total_clips += r.clips;
    rep.total_saturated += r.saturated;
  }

  const bool homogeneous = cfg.truth.lambda.is_constant() && cfg.truth.sigma2.is_constant();
  if (cfg.gmm) {
    if (homogeneous) {
      gmm.mre_lambda = stats::mre(gmm.lambda, cfg.truth.lambda.constant_value());
      gmm.mre_sigma2 = stats::mre(gmm.sigma2, cfg.truth.sigma2.constant_value());
    }
    rep.methods.push_back(std::move(gmm));
  }
  if (cfg.mle) {
    mle.mre_lambda = stats::mre(mle.lambda, cfg.truth.lambda.constant_value());
    mle.mre_sigma2 = stats::mre(mle.sigma2, cfg.truth.sigma2.constant_value());
    rep.methods.push_back(std::move(mle));
  }

  rep.curve_mre_lambda = stats::mre_curves(lambda_curves, rep.lambda_true,
                                           rep.eval_times, cfg.lo(), cfg.hi(),
                                           cfg.min_abs_truth);
  rep.curve_mre_sigma2 = stats::mre_curves(sigma2_curves, rep.sigma2_true,
                                           rep.eval_times, cfg.lo(), cfg.hi(), 0.0);
  if (cfg.replicates >= 2) {
    rep.lambda_band = stats::pointwise_band(lambda_curves, cfg.unbiased_sd);
    rep.sigma2_band = stats::pointwise_band(sigma2_curves, cfg.unbiased_sd);
  }
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

} // namespace sidiff
