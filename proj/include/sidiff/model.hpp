#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>

#include "sidiff/error.hpp"
#include "sidiff/quadrature.hpp"
#include "sidiff/rates.hpp"

namespace sidiff {

namespace detail {

inline void require_open_interval(double x, double K, const char *what) {
  if (!(x > 0.0 && x < K)) {
    std::ostringstream msg;
    msg << what << " = " << x << " must lie strictly inside (0, " << K << ")";
    throw DomainError(msg.str());
  }
}

// K x0 / (x0 + (K - x0) e^{-y}): shared by the logistic solution, the
// conditional median and the inverse transform so the three agree bit for bit.
inline double logistic_map(double y, double x0, double K) {
  return K * x0 / (x0 + (K - x0) * std::exp(-y));
}

} // namespace detail

/// Logistic solution I(t) = K I0 / (I0 + (K - I0) exp(-Lambda(t|t0))).
inline double deterministic_solution(double K, double I0,
                                     const RateFunction &lambda, double t0,
                                     double t) {
  detail::require_open_interval(I0, K, "initial infected I0");
  return detail::logistic_map(lambda.integrate(t0, t), I0, K);
}

/// Time at which the deterministic solution reaches level m.
///
/// Constant lambda uses the closed form; otherwise Lambda(t|t0) is bisected
/// against ln[m (K - I0) / (I0 (K - m))] on [t0, t_max] to 1e-10 in time.
inline double threshold_time(double K, double I0, const RateFunction &lambda,
                             double m, double t0, double t_max = 1e4) {
  detail::require_open_interval(I0, K, "initial infected I0");
  if (!(m < K))
    throw DomainError("threshold m must be below K: the state K is not "
                      "reachable in finite time");
  if (!(m > I0))
    throw DomainError("threshold m must exceed the initial value I0");
  const double target = std::log(m * (K - I0) / (I0 * (K - m)));

  if (lambda.is_constant()) {
    const double rate = lambda.constant_value();
    if (!(rate > 0.0))
      throw DomainError("threshold_time: constant lambda must be positive");
    return t0 + target / rate;
  }

  double lo = t0;
  double hi = t_max;
  if (!(lambda.integrate(t0, hi) >= target)) {
    std::ostringstream msg;
    msg << "threshold_time: level " << m << " not reached before t_max = "
        << t_max;
    throw DomainError(msg.str());
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi)
      break;
    if (lambda.integrate(t0, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// y = ln[x (K - x0) / (x0 (K - x))]; y(x0) = 0.
///
/// Finite for every representable x in (0, K): near K the result grows like
/// -ln(K - x) (about 30 for x = (1 - 1e-15) K). x <= 0 or x >= K, including
/// values that round to K, raise DomainError.
inline double x_to_y(double x, double x0, double K) {
  detail::require_open_interval(x, K, "x");
  detail::require_open_interval(x0, K, "x0");
  return std::log(x / (K - x)) - std::log(x0 / (K - x0));
}

/// Inverse of x_to_y.
inline double y_to_x(double y, double x0, double K) {
  detail::require_open_interval(x0, K, "x0");
  return detail::logistic_map(y, x0, K);
}

struct InfinitesimalMoments {
  double drift;    ///< A1(x, t)
  double variance; ///< A2(x, t)
};

/// Which expression is used for the infinitesimal drift.
///
/// Transform is the drift that makes y(X) a Wiener process with drift
/// lambda(t) and variance sigma^2(t), the law every other routine here
/// assumes:
///
///   A1 = (lambda/K)(K - x)x + 1/4 dA2/dx
///      = (K - x)x/K [lambda + sigma^2 (K - 2x) / (2K)].
///
/// HalfSigma is the closed form (K - x)x/K [lambda + sigma^2 / 2]. It agrees
/// with Transform only as x -> 0; under it y(X) has drift
/// lambda + sigma^2 x / K, so paths that approach K drift faster than the
/// transition law says. Kept for comparison runs.
enum class DriftForm { Transform, HalfSigma };

inline InfinitesimalMoments infinitesimal_moments(double x, double t,
                                                  const RatePair &rates,
                                                  DriftForm form = DriftForm::Transform) {
  const double K = rates.K;
  if (!(x >= 0.0 && x <= K)) {
    std::ostringstream msg;
    msg << "infinitesimal_moments: x = " << x << " outside [0, " << K << "]";
    throw DomainError(msg.str());
  }
  const double s2 = rates.sigma2(t);
  const double g = (K - x) * x / K;
  const double correction =
      form == DriftForm::Transform ? 0.5 * s2 * (K - 2.0 * x) / K : 0.5 * s2;
  return {g * (rates.lambda(t) + correction), s2 * g * g};
}

/// Point mass at x0, the law of X(t0).
struct PointMass {
  double x;
};

/// Law of X(t) for t > t0: Y(t) = x_to_y(X(t)) ~ Normal(mean, variance).
struct LogitNormal {
  double mean;
  double variance;
};

using Marginal = std::variant<PointMass, LogitNormal>;

/// Transition law of X(t) started from x0 at t0.
class TransitionLaw {
public:
  TransitionLaw(RatePair rates, double x0, double t0)
      : rates_(std::move(rates)), x0_(x0), t0_(t0) {
    detail::require_open_interval(x0, rates_.K, "x0");
  }

  const RatePair &rates() const noexcept { return rates_; }
  double x0() const noexcept { return x0_; }
  double t0() const noexcept { return t0_; }
  double K() const noexcept { return rates_.K; }

  /// Lambda(t|t0)
  double mean_y(double t) const { return rates_.lambda.integrate(t0_, t); }
  /// V(t|t0)
  double var_y(double t) const { return rates_.sigma2.integrate(t0_, t); }

  Marginal marginal(double t) const {
    if (t < t0_)
      throw DomainError("marginal: t precedes t0");
    if (t == t0_)
      return PointMass{x0_};
    return LogitNormal{mean_y(t), var_y(t)};
  }

  /// Mean and variance of Y(t), rejecting the degenerate time t <= t0.
  LogitNormal require_nondegenerate(double t) const {
    if (!(t > t0_)) {
      std::ostringstream msg;
      msg << "transition law is a point mass at t = " << t
          << " (t0 = " << t0_ << ")";
      throw DegenerateTimeError(msg.str());
    }
    const double v = var_y(t);
    if (!(v > 0.0))
      throw DegenerateTimeError("transition law has zero variance V(t|t0)");
    return {mean_y(t), v};
  }

private:
  RatePair rates_;
  double x0_;
  double t0_;
};

/// Density of X(t) at x, evaluated through the Gaussian law of y(x).
inline double transition_pdf(const TransitionLaw &law, double x, double t) {
  const auto [mean, var] = law.require_nondegenerate(t);
  const double K = law.K();
  const double y = x_to_y(x, law.x0(), K);
  const double z = (y - mean) / std::sqrt(var);
  const double normal =
      std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * var);
  return K / (x * (K - x)) * normal;
}

/// Distribution function of X(t): 1/2 {1 + erf[(y(x) - Lambda) / sqrt(2V)]}.
inline double transition_cdf(const TransitionLaw &law, double x, double t) {
  const auto [mean, var] = law.require_nondegenerate(t);
  const double y = x_to_y(x, law.x0(), law.K());
  // erfc keeps precision in the lower tail.
  return 0.5 * std::erfc(-(y - mean) / std::sqrt(2.0 * var));
}

/// Conditional median of X(t); independent of sigma^2.
inline double conditional_median(const TransitionLaw &law, double t) {
  if (t < law.t0())
    throw DomainError("conditional_median: t precedes t0");
  return detail::logistic_map(law.mean_y(t), law.x0(), law.K());
}

struct MomentOptions {
  std::size_t initial_order = 64;
  std::size_t max_order = 512;
  double rel_tol = 1e-9;
};

/// m-th conditional moment of X(t) by Gauss-Hermite quadrature,
///
///   K^m / sqrt(pi) * int [1 + (K - x0)/x0 exp(-z sqrt(2V) - Lambda)]^{-m} e^{-z^2} dz,
///
/// doubling the order until two successive values agree to rel_tol.
inline double conditional_moment(const TransitionLaw &law, int m, double t,
                                 MomentOptions opt = {}) {
  if (m < 1)
    throw DomainError("conditional_moment: order m must be >= 1");
  const auto [mean, var] = law.require_nondegenerate(t);
  const double K = law.K();
  const double ratio = (K - law.x0()) / law.x0();
  const double scale = std::sqrt(2.0 * var);
  const double md = static_cast<double>(m);
  // Integrand of the normalized moment E[(X/K)^m]; values lie in (0, 1).
  auto integrand = [&](double z) {
    return std::pow(1.0 + ratio * std::exp(-z * scale - mean), -md);
  };

  std::size_t order = opt.initial_order;
  double previous = quad::hermite_integral(integrand, order);
  while (true) {
    const std::size_t next = 2 * order;
    if (next > opt.max_order)
      throw NumericalError("conditional_moment: Gauss-Hermite did not "
                           "stabilize within max_order nodes");
    const double current = quad::hermite_integral(integrand, next);
    if (std::abs(current - previous) <= opt.rel_tol * std::abs(current)) {
      return std::pow(K, md) * current / std::sqrt(std::numbers::pi);
    }
    previous = current;
    order = next;
  }
}

} // namespace sidiff
