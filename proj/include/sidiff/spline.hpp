#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sidiff/error.hpp"

namespace sidiff {

/// Natural cubic interpolating spline (zero second derivative at both ends).
///
/// On each interval [x_k, x_{k+1}] with h = x_{k+1} - x_k the curve is
///
///   s(x) = a_k + b_k (x - x_k) + c_k (x - x_k)^2 + e_k (x - x_k)^3
///
/// where the coefficients follow from the knot values and the second
/// derivatives obtained by a tridiagonal solve. Outside the knot span the
/// curve continues linearly, which keeps it C2 because s'' vanishes at the
/// ends.
class SplineCurve {
public:
  SplineCurve() = default;

  SplineCurve(std::span<const double> knots, std::span<const double> values) {
    if (knots.size() != values.size())
      throw DomainError("spline: knots and values differ in length");
    if (knots.size() < 3)
      throw DomainError("spline: need at least 3 knots, got " +
                        std::to_string(knots.size()));
    for (std::size_t k = 1; k < knots.size(); ++k) {
      if (!(knots[k] > knots[k - 1]))
        throw DomainError("spline: knot times must be strictly increasing");
    }
    for (double v : values) {
      if (!std::isfinite(v))
        throw DomainError("spline: non-finite knot value");
    }
    x_.assign(knots.begin(), knots.end());
    fit(values);
  }

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> knots() const noexcept { return x_; }
  double front() const noexcept { return x_.front(); }
  double back() const noexcept { return x_.back(); }

  double operator()(double t) const { return value(t); }

  double value(double t) const {
    if (t <= x_.front())
      return a_.front() + b_.front() * (t - x_.front());
    if (t >= x_.back())
      return end_value_ + end_slope_ * (t - x_.back());
    std::size_t k = interval(t);
    double u = t - x_[k];
    return a_[k] + u * (b_[k] + u * (c_[k] + u * e_[k]));
  }

  double derivative(double t) const {
    if (t <= x_.front())
      return b_.front();
    if (t >= x_.back())
      return end_slope_;
    std::size_t k = interval(t);
    double u = t - x_[k];
    return b_[k] + u * (2.0 * c_[k] + 3.0 * u * e_[k]);
  }

  double second_derivative(double t) const {
    if (t <= x_.front() || t >= x_.back())
      return 0.0;
    std::size_t k = interval(t);
    double u = t - x_[k];
    return 2.0 * c_[k] + 6.0 * u * e_[k];
  }

private:
  // Index k with x_[k] <= t < x_[k+1]; t must lie strictly inside the span.
  std::size_t interval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    auto k = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  void fit(std::span<const double> y) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
      h[k] = x_[k + 1] - x_[k];

    // Thomas algorithm for the interior second derivatives m_1..m_{n-2}.
    std::vector<double> m(n, 0.0);
    const std::size_t inner = n - 2;
    std::vector<double> diag(inner), upper(inner), rhs(inner);
    for (std::size_t i = 0; i < inner; ++i) {
      std::size_t k = i + 1;
      diag[i] = 2.0 * (h[k - 1] + h[k]);
      upper[i] = h[k];
      rhs[i] = 6.0 * ((y[k + 1] - y[k]) / h[k] - (y[k] - y[k - 1]) / h[k - 1]);
    }
    for (std::size_t i = 1; i < inner; ++i) {
      double w = h[i] / diag[i - 1]; // sub-diagonal entry is h[i]
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (inner > 0) {
      m[inner] = rhs[inner - 1] / diag[inner - 1];
      for (std::size_t i = inner - 1; i-- > 0;)
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }

    a_.resize(n - 1);
    b_.resize(n - 1);
    c_.resize(n - 1);
    e_.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      a_[k] = y[k];
      b_[k] = (y[k + 1] - y[k]) / h[k] - h[k] * (2.0 * m[k] + m[k + 1]) / 6.0;
      c_[k] = m[k] / 2.0;
      e_[k] = (m[k + 1] - m[k]) / (6.0 * h[k]);
    }
    end_value_ = y[n - 1];
    const std::size_t last = n - 2;
    end_slope_ =
        b_[last] + h[last] * (2.0 * c_[last] + 3.0 * h[last] * e_[last]);
  }

  std::vector<double> x_;
  std::vector<double> a_, b_, c_, e_;
  double end_value_ = 0.0;
  double end_slope_ = 0.0;
};

} // namespace sidiff
