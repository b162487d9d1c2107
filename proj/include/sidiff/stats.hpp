#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "sidiff/error.hpp"

namespace sidiff::stats {

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (divides by n - 1).
inline double stddev(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Quantile by linear interpolation between order statistics
/// (position p (n - 1) in the sorted sample).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Mean relative error of scalar estimates against a nonzero truth.
inline double mre(std::span<const double> estimates, double truth) {
  if (truth == 0.0)
    throw DomainError("mre: truth must be nonzero");
  if (estimates.empty())
    throw DomainError("mre: no estimates");
  double s = 0.0;
  for (double e : estimates)
    s += std::abs(e - truth) / std::abs(truth);
  return s / static_cast<double>(estimates.size());
}

/// Mean relative error of estimated curves against a time-varying truth.
/// Each replicate contributes the average of |est(t) - truth(t)| / |truth(t)|
/// over the points with t in [lo, hi] and |truth(t)| >= min_abs_truth.
inline double mre_curves(const std::vector<std::vector<double>> &curves,
                         std::span<const double> truth,
                         std::span<const double> times, double lo, double hi,
                         double min_abs_truth = 0.05) {
  if (curves.empty())
    throw DomainError("mre_curves: no estimates");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= lo && times[k] <= hi && std::abs(truth[k]) >= min_abs_truth)
      keep.push_back(k);
  }
  if (keep.empty())
    throw DomainError("mre_curves: no admissible points in window");
  double total = 0.0;
  for (const auto &c : curves) {
    if (c.size() != truth.size())
      throw DomainError("mre_curves: curve length differs from truth");
    double s = 0.0;
    for (auto k : keep)
      s += std::abs(c[k] - truth[k]) / std::abs(truth[k]);
    total += s / static_cast<double>(keep.size());
  }
  return total / static_cast<double>(curves.size());
}

struct Band {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Pointwise mean and standard deviation of N curves, and mean +/- sd.
/// The default divides by N; `unbiased` switches to N - 1.
inline Band pointwise_band(const std::vector<std::vector<double>> &curves,
                           bool unbiased = false) {
  if (curves.size() < 2)
    throw DomainError("pointwise_band: need at least 2 curves");
  const std::size_t m = curves.front().size();
  const double n = static_cast<double>(curves.size());
  Band b;
  b.mean.assign(m, 0.0);
  b.sd.assign(m, 0.0);
  for (const auto &c : curves) {
    if (c.size() != m)
      throw DomainError("pointwise_band: curves differ in length");
    for (std::size_t k = 0; k < m; ++k)
      b.mean[k] += c[k];
  }
  for (double &v : b.mean)
    v /= n;
  for (const auto &c : curves) {
    for (std::size_t k = 0; k < m; ++k)
      b.sd[k] += (c[k] - b.mean[k]) * (c[k] - b.mean[k]);
  }
  const double denom = unbiased ? n - 1.0 : n;
  b.lower.resize(m);
  b.upper.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    b.sd[k] = std::sqrt(b.sd[k] / denom);
    b.lower[k] = b.mean[k] - b.sd[k];
    b.upper[k] = b.mean[k] + b.sd[k];
  }
  return b;
}

struct BoxplotStats {
  double min, q1, median, q3, max;
  std::vector<double> outliers; ///< beyond 1.5 IQR from the quartiles
};

inline BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.size() < 5)
    throw DomainError("boxplot_stats: need at least 5 values");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  BoxplotStats b{s.front(), quantile_sorted(s, 0.25), quantile_sorted(s, 0.5),
                 quantile_sorted(s, 0.75), s.back(), {}};
  const double iqr = b.q3 - b.q1;
  for (double v : s) {
    if (v < b.q1 - 1.5 * iqr || v > b.q3 + 1.5 * iqr)
      b.outliers.push_back(v);
  }
  return b;
}

/// (v - mean) / sd with the sample standard deviation.
inline std::vector<double> standardize(std::span<const double> values) {
  if (values.size() < 2)
    throw DomainError("standardize: need at least 2 values");
  const double m = mean(values);
  const double sd = stddev(values);
  if (!(sd > 0.0))
    throw DomainError("standardize: zero variance input");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = (values[i] - m) / sd;
  return out;
}

struct KdeCurve {
  double bandwidth;
  std::vector<double> x;
  std::vector<double> density;
};

/// Silverman's rule: 0.9 min(sd, IQR / 1.34) n^{-1/5}.
inline double silverman_bandwidth(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double sd = stddev(values);
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = sd;
  if (iqr > 0.0)
    spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

/// Gaussian kernel density estimate on `points` equally spaced abscissae
/// spanning [min - 5h, max + 5h].
inline KdeCurve kde(std::span<const double> values, std::size_t points = 512) {
  if (values.size() < 10)
    throw DomainError("kde: need at least 10 values");
  if (points < 2)
    throw DomainError("kde: need at least 2 evaluation points");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (!(*hi_it > *lo_it))
    throw DomainError("kde: zero variance input");
  const double h = silverman_bandwidth(values);
  const double lo = *lo_it - 5.0 * h;
  const double hi = *hi_it + 5.0 * h;
  const double norm =
      1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  KdeCurve out{h, std::vector<double>(points), std::vector<double>(points)};
  for (std::size_t k = 0; k < points; ++k) {
    const double x =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    double s = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    out.x[k] = x;
    out.density[k] = s * norm;
  }
  return out;
}

} // namespace sidiff::stats
