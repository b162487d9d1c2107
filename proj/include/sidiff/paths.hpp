#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/grid.hpp"

namespace sidiff {

enum class Space { X, Y };

inline const char *to_string(Space s) noexcept {
  return s == Space::X ? "X" : "Y";
}

/// d sample paths observed on a common time grid, stored row-major
/// (one row per path).
class PathSet {
public:
  PathSet(TimeGrid grid, std::size_t d, Space space, double K)
      : grid_(grid), d_(d), space_(space), K_(K), values_(d * grid.size(), 0.0) {
    if (d == 0)
      throw ConfigError("path set needs at least one path");
  }

  const TimeGrid &grid() const noexcept { return grid_; }
  std::size_t paths() const noexcept { return d_; }
  std::size_t times() const noexcept { return grid_.size(); }
  Space space() const noexcept { return space_; }
  double K() const noexcept { return K_; }

  double &operator()(std::size_t i, std::size_t j) noexcept {
    return values_[i * grid_.size() + j];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[i * grid_.size() + j];
  }

  std::span<double> row(std::size_t i) noexcept {
    return {values_.data() + i * grid_.size(), grid_.size()};
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * grid_.size(), grid_.size()};
  }

  std::span<const double> values() const noexcept { return values_; }

  /// Master seed the paths were generated from, when simulated.
  std::uint64_t seed = 0;
  /// X-space entries that rounded to a boundary in floating point and were
  /// moved to the nearest representable interior value.
  std::size_t saturated = 0;
  /// Entries clipped into [eps K, (1 - eps) K] by a transform.
  std::size_t clipped = 0;

private:
  TimeGrid grid_;
  std::size_t d_;
  Space space_;
  double K_;
  std::vector<double> values_;
};

} // namespace sidiff
