#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sidiff/model.hpp"
#include "sidiff/simulate.hpp"

using namespace sidiff;

namespace {

RatePair homogeneous(double lambda = 0.4, double sigma2 = 0.1) {
  return {RateFunction::constant(lambda), RateFunction::constant(sigma2), 200.0};
}

std::vector<double> column_y(const PathSet &x, std::size_t j, double x0) {
  std::vector<double> out;
  for (std::size_t i = 0; i < x.paths(); ++i)
    out.push_back(x_to_y(x(i, j), x0, x.K()));
  return out;
}

} // namespace

TEST(SimulateExact, ZeroVarianceFollowsDeterministicSolution) {
  const RatePair rates(RateFunction::sinusoid(0.4, 1, 1, 0), RateFunction::constant(0.0), 200);
  const TimeGrid grid(0.0, 0.05, 201);
  ExactOptions opt;
  opt.allow_zero_variance = true;
  const auto x = simulate_exact(rates, 20, grid, 3, 11, opt);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < grid.size(); ++j)
      EXPECT_NEAR(x(i, j), deterministic_solution(200, 20, rates.lambda, 0, grid.time(j)),
                  1e-10);
  EXPECT_THROW(simulate_exact(rates, 20, grid, 3, 11), DomainError);
}

TEST(SimulateExact, MarginalMatchesGaussianLaw) {
  const TimeGrid grid(0.0, 0.01, 101);
  const std::size_t d = 100000;
  const auto x = simulate_exact(homogeneous(), 20, grid, d, 2024);
  const auto y = column_y(x, 100, 20);
  double s = 0.0, ss = 0.0;
  for (double v : y)
    s += v;
  const double mean = s / d;
  for (double v : y)
    ss += (v - mean) * (v - mean);
  const double var = ss / (d - 1);
  const double V = 0.1;
  EXPECT_NEAR(mean, 0.4, 3 * std::sqrt(V / d));
  EXPECT_NEAR(var / V, 1.0, 0.05);
  const std::vector<double> first = column_y(x, 0, 20);
  for (double v : first)
    ASSERT_EQ(v, 0.0);
}

TEST(SimulateExact, TransformedMarginalPassesAndersonDarling) {
  const TimeGrid grid(0.0, 0.1, 51);
  const auto x = simulate_exact(homogeneous(), 20, grid, 2000, 31);
  for (std::size_t j : {1u, 10u, 50u})
    EXPECT_LT(oracle::anderson_darling_normal(column_y(x, j, 20)),
              oracle::anderson_darling_critical_1pct)
        << "j=" << j;
}

TEST(SimulateExact, SeedDeterminism) {
  const TimeGrid grid(0.0, 0.01, 501);
  const auto a = simulate_exact(homogeneous(), 20, grid, 20, 77);
  const auto b = simulate_exact(homogeneous(), 20, grid, 20, 77);
  const auto c = simulate_exact(homogeneous(), 20, grid, 20, 78);
  ASSERT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  // Replicates draw from distinct streams.
  ExactOptions other;
  other.replicate = 1;
  const auto r1 = simulate_exact(homogeneous(), 20, grid, 20, 77, other);
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), r1.values().begin()));
}

TEST(SimulateExact, PathsStayInsideOpenInterval) {
  const auto x = simulate_exact(homogeneous(0.4, 0.1), 20, TimeGrid(0, 0.1, 501), 200, 3);
  for (double v : x.values()) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 200.0);
  }
  EXPECT_THROW(simulate_exact(homogeneous(), 0.0, TimeGrid(0, 0.1, 5), 2, 1), DomainError);
  EXPECT_THROW(simulate_exact(homogeneous(), 200.0, TimeGrid(0, 0.1, 5), 2, 1), DomainError);
}

TEST(SimulateEm, ZeroVarianceMatchesRk4WithinStepError) {
  const TimeGrid grid(0.0, 0.01, 1001);
  EulerOptions opt;
  opt.refinement = 10;
  const auto r = simulate_em(homogeneous(0.4, 0.0), 20, grid, 1, 1, opt);
  const double rk4 = oracle::rk4_logistic(200, 20, [](double) { return 0.4; }, 0, 10, 1e-4);
  EXPECT_LT(std::abs(r.paths(0, 1000) - rk4), 0.05);
  const double euler = oracle::euler_logistic(200, 20, [](double) { return 0.4; }, 0, 10, 1e-3);
  EXPECT_NEAR(r.paths(0, 1000), euler, 1e-9);
}

TEST(SimulateEm, MarginalAgreesWithExactByKolmogorovSmirnov) {
  const TimeGrid grid(0.0, 0.01, 101);
  EulerOptions opt;
  opt.refinement = 10; // internal step 1e-3
  const auto em = simulate_em(homogeneous(), 20, grid, 2000, 501, opt);
  const auto ex = simulate_exact(homogeneous(), 20, grid, 2000, 502);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < 2000; ++i) {
    a.push_back(em.paths(i, 100));
    b.push_back(ex(i, 100));
  }
  EXPECT_GT(oracle::ks_two_sample_p(a, b), 0.01);
  EXPECT_EQ(em.clamp_hits, 0u);
}

TEST(SimulateEm, DriftFormDecidesAgreementAtLateTimes) {
  // By t = 10 most paths sit near K, where the two drift expressions differ
  // by about sigma^2 (K - x)x/K.
  const TimeGrid grid(0.0, 0.01, 1001);
  const auto ex = simulate_exact(homogeneous(), 20, grid, 2000, 601);
  std::vector<double> exact_y;
  for (std::size_t i = 0; i < 2000; ++i)
    exact_y.push_back(x_to_y(ex(i, 1000), 20, 200));
  EulerOptions opt;
  opt.refinement = 10;
  double p[2];
  for (auto form : {DriftForm::Transform, DriftForm::HalfSigma}) {
    opt.drift = form;
    const auto em = simulate_em(homogeneous(), 20, grid, 2000, 602, opt);
    std::vector<double> em_y;
    for (std::size_t i = 0; i < 2000; ++i)
      em_y.push_back(x_to_y(em.paths(i, 1000), 20, 200));
    p[form == DriftForm::HalfSigma] = oracle::ks_two_sample_p(exact_y, em_y);
  }
  EXPECT_GT(p[0], 0.01);
  EXPECT_LT(p[1], 1e-6);
}

TEST(SimulateEm, ClampingAuditOverLongWindow) {
  const TimeGrid grid(0.0, 0.01, 5001);
  EulerOptions opt;
  opt.refinement = 10;
  std::size_t clean = 0;
  const std::size_t runs = 20;
  for (std::uint32_t r = 0; r < runs; ++r) {
    opt.replicate = r;
    if (simulate_em(homogeneous(), 20, grid, 50, 9, opt).clamp_hits == 0)
      ++clean;
  }
  EXPECT_GE(static_cast<double>(clean), 0.99 * runs);
}

TEST(SimulateEm, RejectsZeroRefinement) {
  EulerOptions opt;
  opt.refinement = 0;
  EXPECT_THROW(simulate_em(homogeneous(), 20, TimeGrid(0, 0.1, 3), 1, 1, opt), ConfigError);
}
