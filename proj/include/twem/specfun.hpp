#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "twem/errors.hpp"
#include "twem/kinematics.hpp"
#include "twem/quadrature.hpp"

namespace twem {

namespace detail {

// Below this argument the power series converges without cancellation for
// every order.
inline constexpr double kBesselSeriesMax = 1.0;
// From here on J0 and J1 come from the Hankel expansion; the smallest term of
// that expansion is ~exp(-2x), far below double precision.
inline constexpr double kBesselAsymptoticMin = 25.0;

inline double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double lead = 1.0;
  for (int k = 1; k <= n; ++k) lead *= half / k;
  if (lead == 0.0) return 0.0;
  const double q = -half * half;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (n + k));
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return lead * sum;
}

/// J0 (order 0) or J1 (order 1) from the Hankel asymptotic expansion.
inline double bessel_hankel(int order, double x) {
  const double mu = 4.0 * order * order;
  const double z8 = 8.0 * x;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * z8);
    if (std::fabs(term) > prev) break;
    prev = std::fabs(term);
    // k odd feeds Q with signs +,-,+...; k even feeds P with signs -,+,...
    if (k % 2 == 1)
      q += ((k / 2) % 2 == 0 ? term : -term);
    else
      p += ((k / 2) % 2 == 1 ? -term : term);
    if (std::fabs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// Miller backward recurrence normalized by J0 + 2 sum J_2k = 1.
inline double bessel_miller(int n, double x) {
  const double top = std::max(static_cast<double>(n), x);
  int start = static_cast<int>(top + 20.0 + std::sqrt(40.0 * top));
  start += start % 2;
  constexpr double big = 1e250;
  double jp = 0.0; // J_{k+1}
  double jk = 1e-300;
  double norm = 0.0;
  double result = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm = (2.0 * k / x) * jk - jp; // J_{k-1}
    jp = jk;
    jk = jm;
    if (std::fabs(jk) > big) {
      jk /= big;
      jp /= big;
      norm /= big;
      result /= big;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jk;
    if (k - 1 == n) result = jk;
  }
  norm += jk;
  return result / norm;
}

inline double bessel_nonneg(int n, double x) {
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= kBesselSeriesMax) return bessel_series(n, x);
  if (x >= kBesselAsymptoticMin && 2 * n <= x) {
    double jm = bessel_hankel(0, x);
    if (n == 0) return jm;
    double j = bessel_hankel(1, x);
    for (int k = 1; k < n; ++k) {
      const double jn = (2.0 * k / x) * j - jm;
      jm = j;
      j = jn;
    }
    return j;
  }
  return bessel_miller(n, x);
}

} // namespace detail

/// Bessel function of the first kind J_n(x) for integer n and x >= 0.
/// Negative orders use J_{-n} = (-1)^n J_n.
inline double bessel_j(int order, double x) {
  if (!std::isfinite(x) || x < 0.0)
    throw DomainError("bessel_j needs a finite, non-negative argument, got " + std::to_string(x));
  const int n = std::abs(order);
  const double v = detail::bessel_nonneg(n, x);
  return (order < 0 && n % 2 == 1) ? -v : v;
}

/// Normal density standing in for the energy-conservation delta function.
class GaussianDelta {
public:
  explicit GaussianDelta(double sigma_e) : sigma_(sigma_e) {
    if (!std::isfinite(sigma_e) || !(sigma_e > 0.0))
      throw ConfigError("Gaussian delta width must be positive");
  }

  double sigma() const { return sigma_; }

  double operator()(double energy) const {
    const double r = energy / sigma_;
    return std::exp(-0.5 * r * r) / (std::sqrt(2.0 * std::numbers::pi) * sigma_);
  }

private:
  double sigma_;
};

inline double gaussian_delta(double energy, const GaussianDelta &delta) {
  if (!std::isfinite(energy)) throw DomainError("gaussian_delta needs a finite energy");
  return delta(energy);
}

/// Value of the overlap integral
///   int_0^inf J_mb(kb r) J_ma(ka r) J_{ma-mb}(kp r) r dr
/// which is cos(ma delta_x - mb delta_b) / (2 pi Delta) inside the triangle
/// domain and zero outside it.
inline double triple_bessel_closed(int m_a, int m_b, const TriangleGeom &tri) {
  if (!tri.valid()) return 0.0;
  if (tri.shape->area == 0.0)
    throw SingularGeometryError("triple-Bessel overlap diverges on a degenerate triangle");
  const auto &s = *tri.shape;
  return std::cos(m_a * s.delta_x - m_b * s.delta_b) / (2.0 * std::numbers::pi * s.area);
}

/// Damped overlap integral
///   int_0^rho_max J_mb(kb r) J_ma(ka r) J_{ma-mb}(kp r) r exp(-damping r) dr
/// by adaptive quadrature over panels a few oscillation periods wide.
inline double triple_bessel_oracle(int m_a, int m_b, double kappa_a, double kappa_b, double kappa_p,
                                   double damping, double rho_max) {
  if (!(damping > 0.0)) throw DomainError("oracle damping must be positive");
  if (!(rho_max > 0.0) || !std::isfinite(rho_max)) throw DomainError("oracle rho_max must be positive");
  const int m_p = m_a - m_b;
  auto integrand = [&](double r) {
    return bessel_j(m_b, kappa_b * r) * bessel_j(m_a, kappa_a * r) * bessel_j(m_p, kappa_p * r) * r *
           std::exp(-damping * r);
  };
  const double fastest = kappa_a + kappa_b + kappa_p;
  const double panel = fastest > 0.0 ? 4.0 * std::numbers::pi / fastest : rho_max;
  const int panels = static_cast<int>(std::ceil(rho_max / panel));
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-13 / panels;
  IntegrationHints regular;
  regular.lower = regular.upper = EndpointKind::Regular;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = rho_max * i / panels;
    const double hi = rho_max * (i + 1) / panels;
    sum += integrate(integrand, lo, hi, cfg, regular).value;
  }
  return sum;
}

struct OracleEstimate {
  double value;
  double spread; ///< |difference between the two first-order extrapolants|
};

/// Richardson extrapolation of the damped oracle to zero damping from the
/// sequence d, d/2, d/4, each truncated at rho_max = tail / d_k.
inline OracleEstimate triple_bessel_extrapolated(int m_a, int m_b, double kappa_a, double kappa_b,
                                                 double kappa_p, double damping, double tail = 40.0) {
  double f[3];
  for (int k = 0; k < 3; ++k) {
    const double d = damping / (1 << k);
    f[k] = triple_bessel_oracle(m_a, m_b, kappa_a, kappa_b, kappa_p, d, tail / d);
  }
  const double r1 = 2.0 * f[1] - f[0];
  const double r2 = 2.0 * f[2] - f[1];
  const double d1 = std::fabs(f[1] - f[0]);
  const double d2 = std::fabs(f[2] - f[1]);
  const double floor = 1e-10 + 1e-8 * std::fabs(f[2]);
  if (d2 > 1.05 * d1 && d2 > floor)
    throw ConvergenceError("damped overlap estimates diverge as damping shrinks");
  return {(4.0 * r2 - r1) / 3.0, std::fabs(r2 - r1)};
}

} // namespace twem
