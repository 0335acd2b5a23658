#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "twem/errors.hpp"
#include "twem/quadrature.hpp"
#include "twem/specfun.hpp"
#include "twem/verify.hpp"

using namespace twem;

TEST(Integrate, InverseSqrtEndpoint) {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Integrate, InverseSqrtBothEnds) {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt((1 - x) * (1 + x)); }, -1.0, 1.0);
  EXPECT_NEAR(r.value, std::numbers::pi, 1e-8);
}

TEST(Integrate, EndpointInsetTrims) {
  QuadratureConfig cfg;
  cfg.endpoint_inset = 1e-6;
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
  EXPECT_NEAR(r.value, 2.0 - 2.0 * std::sqrt(1e-6), 1e-8);
}

TEST(Integrate, NarrowGaussianWithSpike) {
  const GaussianDelta g(5e-4);
  IntegrationHints h;
  h.spikes.push_back({0.0, 5e-4});
  const auto r = integrate([&](double e) { return g(e); }, -1.0, 1.0, {}, h);
  EXPECT_NEAR(r.value, 1.0, 1e-8);
}

TEST(Integrate, SmoothControl) {
  const auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(r.value, 2.0, 1e-10);
}

TEST(Integrate, ErrorEstimateWithinTolerance) {
  QuadratureConfig cfg;
  const auto r = integrate([](double x) { return std::exp(-x) * std::cos(7 * x); }, 0.0, 3.0, cfg);
  EXPECT_LE(r.err_est, std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(r.value)));
}

TEST(Integrate, Additivity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95), coef(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a1 = coef(rng), a2 = coef(rng), a3 = coef(rng);
    auto f = [&](double x) { return a1 * std::sin(3 * x) + a2 * x * x + a3 * std::exp(x); };
    const double c = u(rng);
    const auto whole = integrate(f, 0.0, 1.0);
    const auto left = integrate(f, 0.0, c);
    const auto right = integrate(f, c, 1.0);
    const double slack = whole.err_est + left.err_est + right.err_est + 1e-13;
    EXPECT_LE(std::fabs(left.value + right.value - whole.value), 10 * slack);
  }
}

TEST(Integrate, Linearity) {
  auto f = [](double x) { return std::cos(5 * x); };
  auto g = [](double x) { return 1.0 / (1.0 + x * x); };
  const double alpha = 2.5, beta = -0.75;
  const auto fg = integrate([&](double x) { return alpha * f(x) + beta * g(x); }, 0.0, 2.0);
  const auto rf = integrate(f, 0.0, 2.0);
  const auto rg = integrate(g, 0.0, 2.0);
  EXPECT_NEAR(fg.value, alpha * rf.value + beta * rg.value, 1e-10);
}

TEST(Integrate, HonestyOnAnalyticSuite) {
  const auto suite = analytic_suite();
  ASSERT_EQ(suite.size(), 20u);
  for (const auto &item : suite) {
    const auto r = integrate(item.f, item.a, item.b, {}, item.hints);
    const double true_err = std::fabs(r.value - item.exact);
    EXPECT_LE(true_err, 10 * r.err_est + 1e-15) << item.name;
    EXPECT_LT(true_err, 1e-7 * std::max(1.0, std::fabs(item.exact))) << item.name;
  }
}

TEST(Integrate, BadLimits) {
  auto f = [](double x) { return x; };
  EXPECT_THROW(integrate(f, 1.0, 0.0), DomainError);
  EXPECT_THROW(integrate(f, 0.0, INFINITY), DomainError);
}

TEST(Integrate, InteriorNanIsDomainError) {
  EXPECT_THROW(integrate([](double x) { return x > 0.3 && x < 0.4 ? std::nan("") : 1.0; }, 0.0, 1.0), DomainError);
}

TEST(Integrate, BudgetExhaustedCarriesEstimate) {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 3;
  cfg.rel_tol = 1e-14;
  cfg.abs_tol = 1e-300;
  try {
    integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, cfg);
    FAIL() << "expected AccuracyError";
  } catch (const AccuracyError &e) {
    EXPECT_TRUE(std::isfinite(e.best_estimate));
    EXPECT_GT(e.error_estimate, 0.0);
  }
}

TEST(Integrate, ConfigValidation) {
  QuadratureConfig cfg;
  cfg.rel_tol = 0.0;
  EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, cfg), ConfigError);
  cfg = {};
  cfg.max_subdivisions = 0;
  EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, cfg), ConfigError);
}
