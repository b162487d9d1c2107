#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/model.hpp"
#include "sidiff/paths.hpp"
#include "sidiff/random.hpp"
#include "sidiff/rates.hpp"

namespace sidiff {

struct ExactOptions {
  /// Replicate index fed into the per-path seed derivation.
  std::uint32_t replicate = 0;
  /// Accept zero sigma^2 increments (deterministic paths). Test mode only.
  bool allow_zero_variance = false;
};

namespace detail {

// Keeps a mapped value strictly inside (0, K), counting every move.
inline double keep_inside(double x, double K, std::size_t &saturated) {
  if (x >= K) {
    ++saturated;
    return std::nextafter(K, 0.0);
  }
  if (x <= 0.0) {
    ++saturated;
    return std::nextafter(0.0, K);
  }
  return x;
}

} // namespace detail

/// Exact sampling of X on the grid through Gaussian increments of
/// Y = x_to_y(X): each step adds Normal(Lambda increment, V increment).
/// Path i draws from its own stream seeded by
/// derive_path_seed(seed, opt.replicate, i).
inline PathSet simulate_exact(const RatePair &rates, double x0,
                              const TimeGrid &grid, std::size_t d,
                              std::uint64_t seed, ExactOptions opt = {}) {
  detail::require_open_interval(x0, rates.K, "x0");
  const auto drift = increment_table(rates.lambda, grid);
  const auto var = increment_table(rates.sigma2, grid);
  std::vector<double> sd(var.size());
  for (std::size_t j = 0; j < var.size(); ++j) {
    const bool ok = opt.allow_zero_variance ? var[j] >= 0.0 : var[j] > 0.0;
    if (!ok) {
      std::ostringstream msg;
      msg << "simulate_exact: sigma^2 increment " << var[j] << " on step "
          << j + 1 << " is not positive";
      throw DomainError(msg.str());
    }
    sd[j] = std::sqrt(var[j]);
  }

  PathSet out(grid, d, Space::X, rates.K);
  out.seed = seed;
  const double K = rates.K;
  for (std::size_t i = 0; i < d; ++i) {
    StandardNormal normal(
        derive_path_seed(seed, opt.replicate, static_cast<std::uint32_t>(i)));
    auto row = out.row(i);
    row[0] = x0;
    double y = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      y += drift[j - 1] + sd[j - 1] * normal();
      row[j] = detail::keep_inside(detail::logistic_map(y, x0, K), K, out.saturated);
    }
  }
  return out;
}

struct EulerOptions {
  /// Internal steps per observation interval.
  std::size_t refinement = 10;
  std::uint32_t replicate = 0;
  /// Clamp half-width as a fraction of K. Iterates approach K geometrically
  /// (K - x shrinks like e^{-Y}), so a wide margin would be hit by ordinary
  /// late-time paths; 1e-12 K is only reached when Y exceeds about 30.
  double clamp_fraction = 1e-12;
  DriftForm drift = DriftForm::Transform;
};

struct EulerResult {
  PathSet paths;
  /// Internal iterates moved into [eps, K - eps].
  std::size_t clamp_hits = 0;
};

/// Euler-Maruyama on dX = A1 dt + sqrt(A2) dW with internal step
/// delta / refinement, subsampled to the observation grid. Used as an
/// independent check on simulate_exact.
inline EulerResult simulate_em(const RatePair &rates, double x0,
                               const TimeGrid &grid, std::size_t d,
                               std::uint64_t seed, EulerOptions opt = {}) {
  detail::require_open_interval(x0, rates.K, "x0");
  if (opt.refinement < 1)
    throw ConfigError("simulate_em: refinement factor must be >= 1");
  const double K = rates.K;
  const double eps = opt.clamp_fraction * K;
  const double h = grid.delta() / static_cast<double>(opt.refinement);
  const double sqrt_h = std::sqrt(h);

  EulerResult result{PathSet(grid, d, Space::X, K), 0};
  result.paths.seed = seed;
  for (std::size_t i = 0; i < d; ++i) {
    StandardNormal normal(
        derive_path_seed(seed, opt.replicate, static_cast<std::uint32_t>(i)));
    auto row = result.paths.row(i);
    row[0] = x0;
    double x = x0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double start = grid.time(j - 1);
      for (std::size_t k = 0; k < opt.refinement; ++k) {
        const double t = start + static_cast<double>(k) * h;
        const auto [a1, a2] = infinitesimal_moments(x, t, rates, opt.drift);
        x += a1 * h + std::sqrt(a2) * sqrt_h * normal();
        if (std::isnan(x)) {
          std::ostringstream msg;
          msg << "simulate_em: iterate became NaN on path " << i
              << " at t = " << t;
          throw NumericalError(msg.str());
        }
        if (x < eps) {
          x = eps;
          ++result.clamp_hits;
        } else if (x > K - eps) {
          x = K - eps;
          ++result.clamp_hits;
        }
      }
      row[j] = x;
    }
  }
  return result;
}

} // namespace sidiff
