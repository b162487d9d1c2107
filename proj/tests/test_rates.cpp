#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sidiff/config.hpp"
#include "sidiff/rates.hpp"

using namespace sidiff;

TEST(Rates, EvaluateExamples) {
  EXPECT_EQ(RateFunction::constant(0.4)(7.0), 0.4);
  EXPECT_EQ(RateFunction::sinusoid(0.4, 1.0, 1.0, 0.0)(0.0), 0.4);
  EXPECT_NEAR(RateFunction::exp_saturating(0.1, 0.01, 2.0)(1e3), 0.11, 1e-15);
  EXPECT_NEAR(RateFunction::exp_saturating(0.1, 0.01, 2.0)(0.0), 0.1, 1e-15);
}

TEST(Rates, IntegrateExamples) {
  EXPECT_NEAR(RateFunction::constant(0.4).integrate(0.0, 50.0), 20.0, 1e-12);
  EXPECT_NEAR(RateFunction::sinusoid(0.4, 1.0, 1.0, 0.0).integrate(0.0, 2.0 * std::numbers::pi),
              0.8 * std::numbers::pi, 1e-12);
}

TEST(Rates, ExpSaturatingClosedFormMatchesBruteForce) {
  const auto f = RateFunction::exp_saturating(0.1, 0.01, 2.0);
  const double brute = oracle::simpson([&](double t) { return f(t); }, 0.0, 5.0, 1000000);
  EXPECT_NEAR(f.integrate(0.0, 5.0), brute, 1e-9);
  const double brute2 = oracle::simpson([&](double t) { return f(t); }, 1.3, 2.7, 200000);
  EXPECT_NEAR(f.integrate(1.3, 2.7), brute2, 1e-12);
}

TEST(Rates, SinusoidWithPhaseMatchesBruteForce) {
  const auto f = RateFunction::sinusoid(0.01 * 1.2, 0.01, 2.0, 0.7);
  const double brute = oracle::simpson([&](double t) { return f(t); }, 3.0, 11.0, 200000);
  EXPECT_NEAR(f.integrate(3.0, 11.0), brute, 1e-12);
}

TEST(Rates, TabulatedAndCustomUseQuadrature) {
  std::vector<double> t, v;
  for (int k = 0; k <= 50; ++k) {
    t.push_back(k);
    v.push_back(0.4 + std::sin(k * 0.3));
  }
  const auto tab = RateFunction::tabulated(t, v);
  EXPECT_EQ(tab.kind_name(), "tabulated");
  for (int k = 0; k <= 50; ++k)
    EXPECT_NEAR(tab(k), v[k], 1e-12);
  const double brute = oracle::simpson([&](double s) { return tab(s); }, 0.0, 50.0, 100000);
  EXPECT_NEAR(tab.integrate(0.0, 50.0), brute, 1e-8);
  EXPECT_THROW(tab(50.5), DomainError);

  const auto custom = RateFunction::custom([](double s) { return s * s; }, "square");
  EXPECT_NEAR(custom.integrate(0.0, 3.0), 9.0, 1e-10);
}

TEST(Rates, IntegrateRejectsReversedLimits) {
  EXPECT_THROW(RateFunction::constant(1.0).integrate(2.0, 1.0), DomainError);
  EXPECT_EQ(RateFunction::constant(1.0).integrate(2.0, 2.0), 0.0);
}

TEST(Rates, IncrementTableAdditivity) {
  const TimeGrid g(0.0, 0.01, 3);
  const auto inc = increment_table(RateFunction::constant(0.4), g);
  ASSERT_EQ(inc.size(), 2u);
  EXPECT_NEAR(inc[0], 0.004, 1e-15);
  EXPECT_NEAR(inc[1], 0.004, 1e-15);

  const auto full = TimeGrid::covering(0.0, 50.0, 0.01);
  for (const auto &f : {RateFunction::sinusoid(0.4, 1.0, 1.0, 0.0),
                        RateFunction::exp_saturating(0.1, 0.01, 2.0)}) {
    const auto table = increment_table(f, full);
    double sum = 0.0;
    for (double x : table)
      sum += x;
    EXPECT_NEAR(sum, f.integrate(0.0, 50.0), 1e-9);
    const double brute = oracle::simpson([&](double t) { return f(t); }, 0.0, 50.0, 400000);
    EXPECT_NEAR(sum, brute, 1e-9);
  }
}

TEST(Rates, ValidateRejectsNonPositiveSigmaAndUnbounded) {
  RatePair ok(RateFunction::sinusoid(0.4, 1.0, 1.0, 0.0), RateFunction::constant(0.1), 200);
  EXPECT_NO_THROW(ok.validate(0.0, 50.0, 5001));
  // lambda may go negative
  RatePair neg_lambda(RateFunction::constant(-0.2), RateFunction::constant(0.1), 200);
  EXPECT_NO_THROW(neg_lambda.validate(0.0, 50.0, 11));
  RatePair bad(RateFunction::constant(0.4), RateFunction::sinusoid(0.0, 0.1, 1.0, 0.0), 200);
  EXPECT_THROW(bad.validate(0.0, 50.0, 11), ConfigError);
  RatePair huge(RateFunction::constant(1e9), RateFunction::constant(0.1), 200);
  EXPECT_THROW(huge.validate(0.0, 1.0, 11), ConfigError);
  EXPECT_THROW(RatePair(RateFunction::constant(0.4), RateFunction::constant(0.1), 0.0),
               ConfigError);
}

TEST(Rates, JsonRoundTrip) {
  for (const auto &f : {RateFunction::constant(0.4), RateFunction::sinusoid(0.4, 1.0, 1.0, 0.0),
                        RateFunction::exp_saturating(0.1, 0.01, 2.0),
                        RateFunction::tabulated({0, 1, 2, 3}, {1, 2, 1, 2})}) {
    const auto back = rate_from_json(rate_to_json(f));
    EXPECT_EQ(back.kind_name(), f.kind_name());
    for (double t : {0.0, 0.5, 1.7, 3.0})
      EXPECT_EQ(back(t), f(t));
  }
  EXPECT_THROW(rate_from_json(json{{"kind", "wavelet"}}), ConfigError);
  EXPECT_THROW(rate_from_json(json{{"kind", "constant"}, {"params", json::object()}}),
               ConfigError);
}
