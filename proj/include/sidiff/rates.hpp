#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/grid.hpp"
#include "sidiff/quadrature.hpp"
#include "sidiff/spline.hpp"

namespace sidiff {

namespace rate_kind {

struct Constant {
  double value = 0.0;
};

/// a + b sin(omega t + phi)
struct Sinusoid {
  double a = 0.0;
  double b = 0.0;
  double omega = 1.0;
  double phi = 0.0;
};

/// a + b (1 - e^{-c t})^2
struct ExpSaturating {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Natural cubic spline through (time, value) knots.
struct Tabulated {
  std::vector<double> times;
  std::vector<double> values;
  std::shared_ptr<const SplineCurve> curve;
};

/// Arbitrary callable; integrated numerically. Not expressible in JSON.
struct Custom {
  std::function<double(double)> fn;
  std::string label;
};

} // namespace rate_kind

/// A bounded, continuous, time-varying rate (lambda(t) or sigma^2(t)).
///
/// Values are immutable after construction; copies share the tabulated
/// spline, so a RateFunction can be handed to any number of workers.
class RateFunction {
public:
  using Kind = std::variant<rate_kind::Constant, rate_kind::Sinusoid,
                            rate_kind::ExpSaturating, rate_kind::Tabulated,
                            rate_kind::Custom>;

  static RateFunction constant(double c) {
    return RateFunction(rate_kind::Constant{c});
  }

  static RateFunction sinusoid(double a, double b, double omega, double phi) {
    return RateFunction(rate_kind::Sinusoid{a, b, omega, phi});
  }

  static RateFunction exp_saturating(double a, double b, double c) {
    return RateFunction(rate_kind::ExpSaturating{a, b, c});
  }

  static RateFunction tabulated(std::vector<double> times,
                                std::vector<double> values) {
    auto curve = std::make_shared<const SplineCurve>(times, values);
    return RateFunction(
        rate_kind::Tabulated{std::move(times), std::move(values), std::move(curve)});
  }

  static RateFunction custom(std::function<double(double)> fn,
                             std::string label = "custom") {
    if (!fn)
      throw ConfigError("custom rate: empty callable");
    return RateFunction(rate_kind::Custom{std::move(fn), std::move(label)});
  }

  const Kind &kind() const noexcept { return kind_; }

  std::string kind_name() const {
    return std::visit(
        [](const auto &k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, rate_kind::Constant>)
            return "constant";
          else if constexpr (std::is_same_v<T, rate_kind::Sinusoid>)
            return "sinusoid";
          else if constexpr (std::is_same_v<T, rate_kind::ExpSaturating>)
            return "exp_saturating";
          else if constexpr (std::is_same_v<T, rate_kind::Tabulated>)
            return "tabulated";
          else
            return "custom";
        },
        kind_);
  }

  bool is_constant() const noexcept {
    return std::holds_alternative<rate_kind::Constant>(kind_);
  }

  /// Value of the constant kind; throws for any other kind.
  double constant_value() const {
    if (const auto *c = std::get_if<rate_kind::Constant>(&kind_))
      return c->value;
    throw ConfigError("rate is not constant (kind " + kind_name() + ")");
  }

  double operator()(double t) const { return evaluate(t); }

  double evaluate(double t) const {
    return std::visit(
        [t](const auto &k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, rate_kind::Constant>) {
            return k.value;
          } else if constexpr (std::is_same_v<T, rate_kind::Sinusoid>) {
            return k.a + k.b * std::sin(k.omega * t + k.phi);
          } else if constexpr (std::is_same_v<T, rate_kind::ExpSaturating>) {
            const double s = -std::expm1(-k.c * t);
            return k.a + k.b * s * s;
          } else if constexpr (std::is_same_v<T, rate_kind::Tabulated>) {
            if (t < k.times.front() || t > k.times.back()) {
              std::ostringstream msg;
              msg << "tabulated rate: t=" << t << " outside knot span ["
                  << k.times.front() << ", " << k.times.back() << "]";
              throw DomainError(msg.str());
            }
            return k.curve->value(t);
          } else {
            return k.fn(t);
          }
        },
        kind_);
  }

  /// Accumulated rate over [t0, t]: closed form for the analytic kinds,
  /// adaptive Simpson (abs tol 1e-10, depth 40) otherwise.
  double integrate(double t0, double t) const {
    if (t < t0) {
      std::ostringstream msg;
      msg << "integrate: upper limit " << t << " precedes lower limit " << t0;
      throw DomainError(msg.str());
    }
    if (t == t0)
      return 0.0;
    return std::visit(
        [&](const auto &k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, rate_kind::Constant>) {
            return k.value * (t - t0);
          } else if constexpr (std::is_same_v<T, rate_kind::Sinusoid>) {
            if (k.omega == 0.0)
              return (k.a + k.b * std::sin(k.phi)) * (t - t0);
            // cos(u) - cos(v) = -2 sin((u+v)/2) sin((u-v)/2)
            const double half_sum = 0.5 * k.omega * (t + t0) + k.phi;
            const double half_diff = 0.5 * k.omega * (t - t0);
            const double cos_diff = -2.0 * std::sin(half_sum) * std::sin(half_diff);
            return k.a * (t - t0) - k.b / k.omega * cos_diff;
          } else if constexpr (std::is_same_v<T, rate_kind::ExpSaturating>) {
            if (k.c == 0.0)
              return k.a * (t - t0);
            // (1 - e^{-cs})^2 = 1 - 2 e^{-cs} + e^{-2cs}
            const double e1 = std::exp(-k.c * t0) * (-std::expm1(-k.c * (t - t0)));
            const double e2 =
                std::exp(-2.0 * k.c * t0) * (-std::expm1(-2.0 * k.c * (t - t0)));
            return (k.a + k.b) * (t - t0) - 2.0 * k.b / k.c * e1 +
                   k.b / (2.0 * k.c) * e2;
          } else {
            return quad::adaptive_simpson(
                [this](double s) { return evaluate(s); }, t0, t);
          }
        },
        kind_);
  }

  /// Checks finiteness, the bound and (optionally) strict positivity on
  /// [t0, t_end] by sampling `samples` equally spaced points.
  void validate(double t0, double t_end, std::size_t samples, double bound,
                bool must_be_positive, const std::string &name) const {
    samples = std::max<std::size_t>(samples, 2);
    for (std::size_t i = 0; i < samples; ++i) {
      const double t =
          t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
      const double v = evaluate(t);
      const bool finite = std::isfinite(v);
      const bool bounded = std::abs(v) <= bound;
      const bool sign_ok = !must_be_positive || v > 0.0;
      if (finite && bounded && sign_ok)
        continue;
      std::ostringstream msg;
      msg << name << "(" << t << ") = " << v;
      if (!finite)
        msg << " is not finite";
      else if (!bounded)
        msg << " exceeds bound " << bound;
      else
        msg << " must be positive";
      throw ConfigError(msg.str());
    }
  }

private:
  explicit RateFunction(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
};

/// Per-step integrals of f over consecutive grid times; entry j-1 holds the
/// integral over [t_{j-1}, t_j].
inline std::vector<double> increment_table(const RateFunction &f,
                                           const TimeGrid &grid) {
  std::vector<double> out(grid.size() - 1);
  for (std::size_t j = 1; j < grid.size(); ++j)
    out[j - 1] = f.integrate(grid.time(j - 1), grid.time(j));
  return out;
}

/// Transmission intensity, noise intensity and carrying capacity.
struct RatePair {
  RateFunction lambda;
  RateFunction sigma2;
  double K;

  RatePair(RateFunction lambda_, RateFunction sigma2_, double K_)
      : lambda(std::move(lambda_)), sigma2(std::move(sigma2_)), K(K_) {
    if (!(K > 0.0) || !std::isfinite(K))
      throw ConfigError("carrying capacity K must be positive and finite");
  }

  /// Dense check on [t0, t_end] at 10 * n points; lambda may be negative,
  /// sigma^2 must stay strictly positive.
  void validate(double t0, double t_end, std::size_t n,
                double bound = 1e6) const {
    lambda.validate(t0, t_end, 10 * n, bound, false, "lambda");
    sigma2.validate(t0, t_end, 10 * n, bound, true, "sigma2");
  }
};

} // namespace sidiff
