#pragma once

// Self-check suite behind `twisted_emission verify`: every check compares a
// library routine with an independent route (recurrence, analytic value,
// damped oscillatory quadrature, limiting formula).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "twem/emission.hpp"
#include "twem/kinematics.hpp"
#include "twem/quadrature.hpp"
#include "twem/specfun.hpp"

namespace twem {

enum class VerifyLevel { Fast, Full };

struct CheckResult {
  std::string name;
  double measured;
  double tolerance;
  bool passed;
};

/// Substitution points for mutation testing of the suite itself.
struct VerifyHooks {
  std::function<double(int, int, const TriangleGeom &)> closed_form = triple_bessel_closed;
};

struct AnalyticIntegral {
  std::string name;
  std::function<double(double)> f;
  double a;
  double b;
  double exact;
  IntegrationHints hints;
};

/// Twenty integrals with known values: polynomials, 1/sqrt endpoints and
/// narrow Gaussians.
inline std::vector<AnalyticIntegral> analytic_suite() {
  std::vector<AnalyticIntegral> s;
  const double pi = std::numbers::pi;
  s.push_back({"x^2 on [0,1]", [](double x) { return x * x; }, 0, 1, 1.0 / 3, {}});
  s.push_back({"x^5 - 2x on [-1,2]", [](double x) { return std::pow(x, 5) - 2 * x; }, -1, 2, 63.0 / 6 - 3, {}});
  s.push_back({"x^30 on [0,1]", [](double x) { return std::pow(x, 30); }, 0, 1, 1.0 / 31, {}});
  s.push_back({"3x^2+1 on [-2,3]", [](double x) { return 3 * x * x + 1; }, -2, 3, 40.0, {}});
  s.push_back({"sin on [0,pi]", [](double x) { return std::sin(x); }, 0, pi, 2.0, {}});
  s.push_back({"exp on [0,1]", [](double x) { return std::exp(x); }, 0, 1, std::exp(1.0) - 1, {}});
  s.push_back({"1/(1+x^2) on [0,1]", [](double x) { return 1 / (1 + x * x); }, 0, 1, pi / 4, {}});
  s.push_back({"cos(20x) on [0,1]", [](double x) { return std::cos(20 * x); }, 0, 1, std::sin(20.0) / 20, {}});
  s.push_back({"log on [1,e]", [](double x) { return std::log(x); }, 1, std::exp(1.0), 1.0, {}});
  s.push_back({"1/sqrt(x) on [0,1]", [](double x) { return 1 / std::sqrt(x); }, 0, 1, 2.0, {}});
  s.push_back({"1/sqrt(1-x) on [0,1]", [](double x) { return 1 / std::sqrt(1 - x); }, 0, 1, 2.0, {}});
  s.push_back({"1/sqrt(1-x^2) on [-1,1]", [](double x) { return 1 / std::sqrt((1 - x) * (1 + x)); }, -1, 1, pi,
               {}});
  s.push_back({"x/sqrt(1-x^2) on [0,1]", [](double x) { return x / std::sqrt((1 - x) * (1 + x)); }, 0, 1, 1.0,
               {}});
  s.push_back({"cos(x)/sqrt(x) on [0,1] (declared)", [](double x) { return std::cos(x) / std::sqrt(x); }, 0, 1,
               1.8090484758005441, IntegrationHints{{}, EndpointKind::InverseSqrt, EndpointKind::Regular}});
  s.push_back({"1/sqrt(x(2-x)) on [0,2]", [](double x) { return 1 / std::sqrt(x * (2 - x)); }, 0, 2, pi, {}});
  for (double sigma : {5e-4, 1e-3, 1e-2}) {
    const GaussianDelta g(sigma);
    IntegrationHints h;
    h.spikes.push_back({0.0, sigma});
    s.push_back({"gaussian sigma=" + std::to_string(sigma), [g](double x) { return g(x); }, -1, 1, 1.0, h});
  }
  {
    const GaussianDelta g(2e-3);
    IntegrationHints h;
    h.spikes.push_back({0.3, 2e-3});
    s.push_back({"off-center gaussian", [g](double x) { return g(x - 0.3); }, 0, 1, 1.0, h});
  }
  {
    const GaussianDelta g(1e-3);
    IntegrationHints h;
    h.spikes.push_back({0.25, 1e-3});
    s.push_back({"x * gaussian", [g](double x) { return x * g(x - 0.25); }, 0, 1, 0.25, h});
  }
  return s;
}

namespace detail {

inline CheckResult make_check(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, std::isfinite(measured) && measured <= tolerance};
}

} // namespace detail

inline CheckResult check_bessel_recurrence(int max_order = 64, double max_x = 100.0) {
  double worst = 0.0;
  for (int m = -max_order; m <= max_order; ++m)
    for (double x = 0.25; x <= max_x; x += 0.25 + 0.01 * x) {
      const double r = bessel_j(m - 1, x) + bessel_j(m + 1, x) - (2.0 * m / x) * bessel_j(m, x);
      worst = std::max(worst, std::fabs(r));
    }
  return detail::make_check("bessel three-term recurrence", worst, 1e-10);
}

inline CheckResult check_gaussian_normalization(double sigma = 5e-4) {
  const GaussianDelta g(sigma);
  IntegrationHints h;
  h.spikes.push_back({0.0, sigma});
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const double v = integrate([&](double e) { return gaussian_delta(e, g); }, -10 * sigma, 10 * sigma, cfg, h).value;
  return detail::make_check("gaussian delta normalization", std::fabs(v - 1.0), 1e-8);
}

/// Largest true_error / err_est over the analytic suite; passes when <= 10.
inline CheckResult check_quadrature_honesty() {
  double worst = 0.0;
  for (const auto &item : analytic_suite()) {
    QuadratureConfig cfg;
    const auto r = integrate(item.f, item.a, item.b, cfg, item.hints);
    const double true_err = std::fabs(r.value - item.exact);
    const double ratio = true_err == 0.0 ? 0.0 : true_err / std::max(r.err_est, 1e-300);
    worst = std::max(worst, ratio);
  }
  return detail::make_check("quadrature error-estimate honesty (true/est)", worst, 10.0);
}

inline CheckResult check_triangle_area(std::uint64_t seed, int draws = 1000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> side(0.01, 10.0);
  double worst = 0.0;
  int made = 0;
  while (made < draws) {
    const double a = side(rng), b = side(rng), c = side(rng);
    const auto tri = make_triangle(a, b, c);
    if (!tri.valid()) continue;
    ++made;
    // Kahan's ordering of Heron's formula, independent of triangle_area.
    double x[3] = {a, b, c};
    std::sort(x, x + 3, std::greater<>());
    const double heron =
        0.25 * std::sqrt((x[0] + (x[1] + x[2])) * (x[2] - (x[0] - x[1])) * (x[2] + (x[0] - x[1])) *
                         (x[0] + (x[1] - x[2])));
    if (heron > 0.0) worst = std::max(worst, std::fabs(tri.shape->area - heron) / heron);
  }
  return detail::make_check("triangle area vs Heron", worst, 1e-12);
}

struct OverlapCase {
  int m_a;
  int m_b;
  double kappa_a;
  double kappa_b;
  double kappa_p;
};

inline std::vector<OverlapCase> overlap_cases(VerifyLevel level) {
  std::vector<OverlapCase> c{{0, 0, 5, 4, 3}, {1, 2, 5, 4, 3}};
  if (level == VerifyLevel::Full) {
    const std::vector<OverlapCase> more{{0, 1, 2, 2, 2},   {1, 0, 2, 2, 2},     {2, 1, 5, 4, 3},
                                        {-1, 2, 5, 4, 3},  {3, 1, 1.0, 1.3, 0.7}, {2, -1, 1.0, 1.3, 0.7},
                                        {0, 0, 1.0, 1.0, 1.5}, {1, 1, 3.0, 2.5, 1.2}};
    c.insert(c.end(), more.begin(), more.end());
  }
  return c;
}

/// Worst relative error of the closed overlap form against the damped,
/// Richardson-extrapolated oracle.
inline CheckResult check_overlap_closed_form(VerifyLevel level, const VerifyHooks &hooks = {}) {
  double worst = 0.0;
  for (const auto &c : overlap_cases(level)) {
    const auto tri = make_triangle(c.kappa_a, c.kappa_b, c.kappa_p);
    const double closed = hooks.closed_form(c.m_a, c.m_b, tri);
    const double oracle = triple_bessel_extrapolated(c.m_a, c.m_b, c.kappa_a, c.kappa_b, c.kappa_p, 1e-2).value;
    worst = std::max(worst, std::fabs(closed - oracle) / std::fabs(oracle));
  }
  return detail::make_check("triple-Bessel closed form vs damped oracle", worst, 1e-3);
}

/// Max relative deviation between exact and quadrature master integrals on
/// grid points at least `exclusion` rad from both window edges. Where the
/// exact value is zero the quadrature value is measured against the largest
/// exact value on the grid.
inline double exact_quad_deviation(const EmissionProblem &p, const std::vector<double> &grid,
                                   double exclusion = 0.05) {
  const auto edges = window_edges(p.beam, p.line, p.omega);
  std::vector<double> exact(grid.size()), quad(grid.size());
  std::vector<bool> safe(grid.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    safe[i] = std::none_of(edges.begin(), edges.end(), [&](double e) { return std::fabs(grid[i] - e) < exclusion; });
    if (!safe[i]) continue;
    exact[i] = master_integral_exact(p, grid[i]);
    quad[i] = master_integral_quad(p, grid[i]);
    scale = std::max(scale, exact[i]);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!safe[i]) continue;
    const double ref = exact[i] > 0.0 ? exact[i] : scale;
    worst = std::max(worst, std::fabs(quad[i] - exact[i]) / ref);
  }
  return worst;
}

inline CheckResult check_exact_vs_quadrature(VerifyLevel level) {
  const EmissionProblem p = reference_problem();
  const auto [lo, hi] = default_window(p);
  const auto grid = uniform_grid(lo, hi, level == VerifyLevel::Full ? 2000 : 300);
  return detail::make_check("master integral exact vs quadrature", exact_quad_deviation(p, grid), 0.02);
}

inline std::vector<double> limit_grid(const EmissionProblem &p, int n = 201) {
  const double c = reference_angle(p);
  return uniform_grid(c - 0.02, c + 0.02, n);
}

inline CheckResult check_plane_wave_limit() {
  const EmissionProblem p = reference_problem(1e-3);
  return detail::make_check("twisted -> plane-wave limit at theta_a = 1e-3", limit_deviation(p, limit_grid(p)), 0.01);
}

/// Number of opening angles in {0.1, 0.03, 0.01, 0.003} where the limit
/// deviation fails to decrease; passes at zero.
inline CheckResult check_limit_monotone() {
  double prev = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (double ta : {0.1, 0.03, 0.01, 0.003}) {
    const EmissionProblem p = reference_problem(ta);
    const double d = limit_deviation(p, limit_grid(p));
    if (!(d < prev)) ++violations;
    prev = d;
  }
  return detail::make_check("limit deviation decreases with theta_a", violations, 0.0);
}

/// sum_{|mb| <= N} |closed|^2 / (2N + 1) against 1 / (2 (2 pi Delta)^2).
inline double partial_sum_ratio(int m_a, const TriangleGeom &tri, int cutoff,
                                const std::function<double(int, int, const TriangleGeom &)> &closed = triple_bessel_closed) {
  double sum = 0.0;
  for (int mb = -cutoff; mb <= cutoff; ++mb) {
    const double v = closed(m_a, mb, tri);
    sum += v * v;
  }
  const double avg = sum / (2.0 * cutoff + 1.0);
  const double two_pi_area = 2.0 * std::numbers::pi * tri.shape->area;
  return avg * 2.0 * two_pi_area * two_pi_area;
}

inline CheckResult check_partial_sum(VerifyLevel level, const VerifyHooks &hooks = {}) {
  const auto tri = make_triangle(1.0, 0.83, 0.61);
  const int n = level == VerifyLevel::Full ? 10000 : 1000;
  const double r = partial_sum_ratio(1, tri, n, hooks.closed_form);
  return detail::make_check("partial-sum scaling N=" + std::to_string(n), std::fabs(r - 1.0), 0.05);
}

/// Distance of the twisted exact-channel peaks from theta_pw -+ theta_a.
inline CheckResult check_twisted_peaks() {
  const EmissionProblem p = reference_problem();
  const auto [lo, hi] = default_window(p);
  const auto grid = uniform_grid(lo, hi, 2000, window_edges(p.beam, p.line, p.omega), 1e-6);
  const ScanResult r = scan(p, Channel::TwistedExact, grid);
  const double c = reference_angle(p);
  const double ta = p.beam.opening_angle();
  if (r.peaks.size() != 2) return detail::make_check("twisted peaks at theta_pw -+ theta_a", INFINITY, 0.02);
  const double err = std::max(std::fabs(r.peaks[0] - (c - ta)), std::fabs(r.peaks[1] - (c + ta)));
  return detail::make_check("twisted peaks at theta_pw -+ theta_a", err, 0.02);
}

inline std::vector<CheckResult> run_verification(VerifyLevel level, std::uint64_t seed = 1,
                                                 const VerifyHooks &hooks = {}) {
  std::vector<CheckResult> out;
  out.push_back(check_bessel_recurrence());
  out.push_back(check_gaussian_normalization());
  out.push_back(check_quadrature_honesty());
  out.push_back(check_triangle_area(seed));
  out.push_back(check_overlap_closed_form(level, hooks));
  out.push_back(check_exact_vs_quadrature(level));
  out.push_back(check_plane_wave_limit());
  if (level == VerifyLevel::Full) out.push_back(check_limit_monotone());
  out.push_back(check_partial_sum(level, hooks));
  out.push_back(check_twisted_peaks());
  return out;
}

inline bool all_passed(const std::vector<CheckResult> &results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult &c) { return c.passed; });
}

} // namespace twem
