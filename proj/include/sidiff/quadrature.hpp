#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "sidiff/error.hpp"

namespace sidiff::quad {

struct SimpsonOptions {
  double abs_tol = 1e-10;
  int max_depth = 40;
};

namespace detail {

template <class F>
double simpson_step(const F &f, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
///
/// The interval is first cut into `panels` equal pieces so that periodic
/// integrands cannot fool the initial error estimate; the tolerance is
/// shared between the pieces.
template <class F>
double adaptive_simpson(const F &f, double a, double b,
                        SimpsonOptions opt = {}, int panels = 16) {
  if (a == b)
    return 0.0;
  double sum = 0.0;
  const double width = (b - a) / panels;
  const double tol = opt.abs_tol / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == panels) ? b : a + (p + 1) * width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    sum += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol,
                                opt.max_depth);
  }
  return sum;
}

/// Nodes and weights of the n-point Gauss-Hermite rule for weight e^{-z^2}.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal and
// off-diagonal `e` (implicit QL with Wilkinson shifts), sorted descending.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> e, std::size_t n) {
  std::vector<double> d(n, 0.0);
  e.resize(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + 1e-16 * dd)
          break;
      }
      if (m != l) {
        if (++iter > 60)
          throw NumericalError("gauss_hermite: eigenvalue iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
        double s = 1.0, c = 1.0, p = 0.0;
        std::size_t i = m;
        bool early = false;
        while (i-- > l) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (early)
          continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

} // namespace detail

/// Nodes start from the eigenvalues of the Jacobi matrix (off-diagonal
/// sqrt(k/2)) and are polished by Newton iteration on the orthonormal
/// Hermite recurrence, which also yields the weights 2 / H_n'(z)^2.
/// Weights below the double range underflow to zero.
inline HermiteRule gauss_hermite(std::size_t n) {
  if (n == 0)
    throw DomainError("gauss_hermite: order must be positive");
  constexpr double pim4 = 0.7511255444649425; // pi^{-1/4}
  constexpr int max_iter = 20;

  std::vector<double> offdiag(n, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    offdiag[k - 1] = std::sqrt(0.5 * static_cast<double>(k));
  const auto guesses = detail::tridiagonal_eigenvalues(std::move(offdiag), n);

  HermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double nd = static_cast<double>(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = guesses[i];
    double pp = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 -
             std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      if (!std::isfinite(pp) || !std::isfinite(p1))
        break; // far tail: keep the eigenvalue, weight underflows
      const double z_prev = z;
      z = z_prev - p1 / pp;
      if (std::abs(z - z_prev) <= 1e-15 * std::max(1.0, std::abs(z)))
        break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    const double w = std::isfinite(pp) ? 2.0 / (pp * pp) : 0.0;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1)
    rule.nodes[half - 1] = 0.0;
  return rule;
}

/// Process-wide cache of Gauss-Hermite rules; rules are immutable once built.
inline const HermiteRule &cached_gauss_hermite(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, HermiteRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, gauss_hermite(n)).first;
  return it->second;
}

/// Integral of g(z) e^{-z^2} over the real line with the n-point rule.
template <class G>
double hermite_integral(const G &g, std::size_t n) {
  const auto &rule = cached_gauss_hermite(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sum += rule.weights[i] * g(rule.nodes[i]);
  return sum;
}

} // namespace sidiff::quad
