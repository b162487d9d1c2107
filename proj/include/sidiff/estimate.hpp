#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/paths.hpp"
#include "sidiff/spline.hpp"

namespace sidiff {

/// Maps observed X paths to the Wiener coordinates
///
///   y_ij = ln[x_ij (K - x_i1) / (x_i1 (K - x_ij))],
///
/// each path relative to its own first observation. Values are first clipped
/// into [eps K, (1 - eps) K]; clips are counted in the result's `clipped`.
/// Values outside [0, K] are rejected outright.
inline PathSet transform_paths(const PathSet &x, double clip_eps = 1e-9) {
  if (x.space() != Space::X)
    throw DomainError("transform_paths: input must be an X-space path set");
  const double K = x.K();
  const double lo = clip_eps * K;
  const double hi = (1.0 - clip_eps) * K;
  PathSet y(x.grid(), x.paths(), Space::Y, K);
  y.seed = x.seed;
  y.saturated = x.saturated;
  y.clipped = x.clipped;

  std::vector<double> logit(x.times());
  for (std::size_t i = 0; i < x.paths(); ++i) {
    const auto in = x.row(i);
    for (std::size_t j = 0; j < in.size(); ++j) {
      double v = in[j];
      if (!(v >= 0.0 && v <= K)) {
        std::ostringstream msg;
        msg << "transform_paths: x[" << i << "][" << j << "] = " << v
            << " outside [0, " << K << "]";
        throw DomainError(msg.str());
      }
      if (v < lo) {
        v = lo;
        ++y.clipped;
      } else if (v > hi) {
        v = hi;
        ++y.clipped;
      }
      logit[j] = std::log(v / (K - v));
    }
    auto out = y.row(i);
    out[0] = 0.0;
    for (std::size_t j = 1; j < in.size(); ++j)
      out[j] = logit[j] - logit[0];
  }
  return y;
}

/// mu_j = (1/d) sum_i y_ij for every observation time.
inline std::vector<double> sample_mean(const PathSet &y) {
  std::vector<double> mu(y.times(), 0.0);
  for (std::size_t i = 0; i < y.paths(); ++i) {
    const auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      mu[j] += r[j];
  }
  const double d = static_cast<double>(y.paths());
  for (double &m : mu)
    m /= d;
  return mu;
}

/// Covariance between consecutive observations,
///
///   nu_j = 1/(d-1) sum_i (y_ij - mu_j)(y_{i,j-1} - mu_{j-1}),  j = 2..n.
///
/// Entry k of the result is nu_{k+2}, which estimates V(t_{k+1}|t0) in
/// 1-based time indexing (that is, the variance at the earlier of the two
/// times).
inline std::vector<double> sample_lag_cov(const PathSet &y) {
  if (y.paths() < 2)
    throw DomainError("sample_lag_cov: need at least 2 paths");
  const auto mu = sample_mean(y);
  std::vector<double> nu(y.times() - 1, 0.0);
  for (std::size_t i = 0; i < y.paths(); ++i) {
    const auto r = y.row(i);
    for (std::size_t j = 1; j < r.size(); ++j)
      nu[j - 1] += (r[j] - mu[j]) * (r[j - 1] - mu[j - 1]);
  }
  const double denom = static_cast<double>(y.paths() - 1);
  for (double &v : nu)
    v /= denom;
  return nu;
}

/// Interpolants of the sample mean and lag covariance.
struct MomentCurves {
  SplineCurve mean; ///< M(t) through (t_j, mu_j)
  SplineCurve cov;  ///< Sigma(t) through (t_{j-1}, nu_j)
};

namespace detail {

// Every stride-th index of [0, count), always keeping the last one.
inline std::vector<std::size_t> thinned_indices(std::size_t count,
                                                std::size_t stride) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < count; k += stride)
    idx.push_back(k);
  if (idx.back() != count - 1)
    idx.push_back(count - 1);
  return idx;
}

inline SplineCurve thinned_spline(const std::vector<double> &t,
                                  const std::vector<double> &v,
                                  std::size_t stride, const char *what) {
  const auto idx = thinned_indices(t.size(), stride);
  if (idx.size() < 3) {
    std::ostringstream msg;
    msg << "fit_moment_curves: " << what << " keeps only " << idx.size()
        << " knots after thinning (need 3)";
    throw DomainError(msg.str());
  }
  std::vector<double> kt, kv;
  kt.reserve(idx.size());
  kv.reserve(idx.size());
  for (auto k : idx) {
    kt.push_back(t[k]);
    kv.push_back(v[k]);
  }
  return SplineCurve(kt, kv);
}

} // namespace detail

/// Natural cubic splines through the sample moments. The covariance nu_j is
/// placed at t_{j-1}, where cov[Y(t_{j-1}), Y(t_j)] = V(t_{j-1}|t0).
/// `stride` > 1 keeps only every stride-th knot (plus the last one).
inline MomentCurves fit_moment_curves(const std::vector<double> &mu,
                                      const std::vector<double> &nu,
                                      const TimeGrid &grid,
                                      std::size_t stride = 1) {
  if (stride < 1)
    throw ConfigError("fit_moment_curves: stride must be >= 1");
  if (mu.size() != grid.size() || nu.size() + 1 != grid.size())
    throw DomainError("fit_moment_curves: moment lengths do not match grid");
  const auto t = grid.times();
  std::vector<double> t_cov(t.begin(), t.end() - 1);
  return {detail::thinned_spline(t, mu, stride, "mean"),
          detail::thinned_spline(t_cov, nu, stride, "covariance")};
}

struct MleEstimate {
  double lambda;
  double sigma2;
};

struct EstimateDiagnostics {
  /// Fraction of evaluation points where the raw sigma^2 estimate is < 0.
  double negative_sigma2_fraction = 0.0;
  /// Observations clipped into [eps K, (1 - eps) K] before transforming.
  std::size_t boundary_clips = 0;
  /// Observations that rounded to 0 or K during simulation.
  std::size_t saturated = 0;
  /// Evaluation points at t0 and T; spline end derivatives are unreliable.
  std::vector<std::size_t> low_confidence;
};

/// Estimated rate curves on the evaluation times.
struct EstimateResult {
  std::vector<double> times;
  std::vector<double> lambda_hat;
  std::vector<double> sigma2_raw;
  std::vector<double> sigma2_floored;
  std::vector<double> mu;
  std::vector<double> nu;
  MomentCurves curves;
  std::optional<MleEstimate> mle;
  EstimateDiagnostics diagnostics;

  double lambda_at(double t) const { return curves.mean.derivative(t); }
  double sigma2_at(double t) const { return curves.cov.derivative(t); }
};

/// lambda(t) = dM/dt and sigma^2(t) = dSigma/dt from the spline coefficients,
/// evaluated on `times`. The floored variance is max(raw, 0).
inline EstimateResult estimate_rates(MomentCurves curves,
                                     const std::vector<double> &times) {
  EstimateResult r;
  r.times = times;
  r.lambda_hat.resize(times.size());
  r.sigma2_raw.resize(times.size());
  r.sigma2_floored.resize(times.size());
  std::size_t negative = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    r.lambda_hat[j] = curves.mean.derivative(times[j]);
    const double s = curves.cov.derivative(times[j]);
    r.sigma2_raw[j] = s;
    r.sigma2_floored[j] = std::max(s, 0.0);
    if (s < 0.0)
      ++negative;
  }
  if (!times.empty()) {
    r.diagnostics.negative_sigma2_fraction =
        static_cast<double>(negative) / static_cast<double>(times.size());
    r.diagnostics.low_confidence = {0};
    if (times.size() > 1)
      r.diagnostics.low_confidence.push_back(times.size() - 1);
  }
  r.curves = std::move(curves);
  return r;
}

/// Closed-form maximum likelihood estimates for constant lambda, sigma^2 from
/// the Gaussian increments of Y. The variance uses the residual
/// (increment - lambda * delta).
inline MleEstimate mle_homogeneous(const PathSet &y, double delta) {
  if (!(delta > 0.0))
    throw DomainError("mle_homogeneous: delta must be positive");
  if (y.times() < 2)
    throw DomainError("mle_homogeneous: need at least 2 observation times");
  const double count =
      static_cast<double>(y.paths()) * static_cast<double>(y.times() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.paths(); ++i) {
    const auto r = y.row(i);
    for (std::size_t j = 1; j < r.size(); ++j)
      sum += r[j] - r[j - 1];
  }
  const double lambda = sum / (count * delta);
  const double step = lambda * delta;
  double ss = 0.0;
  for (std::size_t i = 0; i < y.paths(); ++i) {
    const auto r = y.row(i);
    for (std::size_t j = 1; j < r.size(); ++j) {
      const double e = r[j] - r[j - 1] - step;
      ss += e * e;
    }
  }
  return {lambda, ss / (count * delta)};
}

/// Log-likelihood of the Y increments under constant (lambda, sigma^2).
inline double log_likelihood(const PathSet &y, double lambda, double sigma2,
                             double delta) {
  if (!(sigma2 > 0.0))
    throw DomainError("log_likelihood: sigma^2 must be positive");
  if (!(delta > 0.0))
    throw DomainError("log_likelihood: delta must be positive");
  const double count =
      static_cast<double>(y.paths()) * static_cast<double>(y.times() - 1);
  double ss = 0.0;
  for (std::size_t i = 0; i < y.paths(); ++i) {
    const auto r = y.row(i);
    for (std::size_t j = 1; j < r.size(); ++j) {
      const double e = r[j] - r[j - 1] - lambda * delta;
      ss += e * e;
    }
  }
  return -0.5 * count * std::log(2.0 * std::numbers::pi * delta) -
         0.5 * count * std::log(sigma2) - ss / (2.0 * sigma2 * delta);
}

struct GmmOptions {
  std::size_t stride = 1;
  double clip_eps = 1e-9;
  /// Also compute the homogeneous MLE scalars.
  bool with_mle = false;
};

/// Full moment-matching pipeline on X-space observations: transform, sample
/// moments, spline interpolation, differentiation. Rates are evaluated on the
/// observation times.
inline EstimateResult estimate_from_paths(const PathSet &x, GmmOptions opt = {}) {
  const PathSet y = transform_paths(x, opt.clip_eps);
  auto mu = sample_mean(y);
  auto nu = sample_lag_cov(y);
  auto curves = fit_moment_curves(mu, nu, y.grid(), opt.stride);
  EstimateResult r = estimate_rates(std::move(curves), y.grid().times());
  r.mu = std::move(mu);
  r.nu = std::move(nu);
  r.diagnostics.boundary_clips = y.clipped;
  r.diagnostics.saturated = y.saturated;
  if (opt.with_mle)
    r.mle = mle_homogeneous(y, y.grid().delta());
  return r;
}

} // namespace sidiff
