#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sidiff/error.hpp"

namespace sidiff {

/// Equally spaced observation times t_j = t0 + j * delta, j = 0..n-1.
class TimeGrid {
public:
  TimeGrid(double t0, double delta, std::size_t n) : t0_(t0), delta_(delta), n_(n) {
    if (!std::isfinite(t0) || !std::isfinite(delta) || !(delta > 0.0))
      throw ConfigError("time grid: delta must be positive and finite");
    if (n < 2)
      throw ConfigError("time grid: need at least 2 observation times, got " +
                        std::to_string(n));
  }

  /// Grid covering [t0, t_end] with step delta; t_end - t0 must be an integer
  /// multiple of delta up to rounding.
  static TimeGrid covering(double t0, double t_end, double delta) {
    if (!(delta > 0.0) || !(t_end > t0))
      throw ConfigError("time grid: need t_end > t0 and delta > 0");
    const double steps = (t_end - t0) / delta;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, rounded))
      throw ConfigError("time grid: (T - t0) is not a multiple of delta");
    return TimeGrid(t0, delta, static_cast<std::size_t>(rounded) + 1);
  }

  double t0() const noexcept { return t0_; }
  double delta() const noexcept { return delta_; }
  std::size_t size() const noexcept { return n_; }
  double t_end() const noexcept { return time(n_ - 1); }

  double time(std::size_t j) const noexcept {
    return t0_ + static_cast<double>(j) * delta_;
  }

  std::vector<double> times() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j)
      out[j] = time(j);
    return out;
  }

  bool operator==(const TimeGrid &) const = default;

private:
  double t0_;
  double delta_;
  std::size_t n_;
};

} // namespace sidiff
