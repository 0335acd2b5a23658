#pragma once

// Reduced photon emission densities dw_r / (d omega d Omega_p) for an atom
// whose center of mass is a plane wave or a twisted (Bessel) wave, with the
// final center-of-mass state summed over.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "twem/errors.hpp"
#include "twem/kinematics.hpp"
#include "twem/quadrature.hpp"
#include "twem/specfun.hpp"

namespace twem {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EmissionProblem {
  BeamState beam;
  TransitionLine line;
  double omega;
  GaussianDelta delta;

  PhotonMode photon(double theta_p) const { return PhotonMode{omega, theta_p, 0.0}; }

  /// Same problem with the plane wave of equal total momentum.
  EmissionProblem as_plane_wave() const { return {beam.plane_wave_counterpart(), line, omega, delta}; }
};

/// The synthetic parameter set used for the reference angular distributions:
/// P_a = 1, omega = 0.1, M = 1, eps_a - eps_b - omega = 1e-3, theta_a = pi/6,
/// sigma_E = 5e-4, |S_e|^2 = 1.
inline EmissionProblem reference_problem(double opening_angle = std::numbers::pi / 6, int m_oam = 0) {
  const double omega = 0.1;
  const double detuning = 1e-3;
  return {BeamState::twisted(1.0, 1.0, opening_angle, m_oam), TransitionLine{omega + detuning, 0.0, 1.0},
          omega, GaussianDelta(5e-4)};
}

/// theta_p^PW of the problem: emission maximum of the plane wave with the
/// same total momentum.
inline double reference_angle(const EmissionProblem &p) {
  return theta_pw(p.beam.plane_wave_counterpart(), p.line, p.omega);
}

inline double planewave_density(const EmissionProblem &p, double theta_p) {
  if (p.beam.is_twisted()) throw std::invalid_argument("planewave_density needs a plane-wave beam");
  const double m = p.beam.mass();
  const double pz = p.beam.p_z();
  const double w = p.omega;
  const double c = std::cos(theta_p);
  const double final_energy = pz * pz / (2.0 * m) - pz * w * c / m + w * w / (2.0 * m);
  if (!(final_energy > 0.0))
    throw SingularKinematicsError("final center-of-mass energy vanishes at theta_p = " +
                                  std::to_string(theta_p));
  const double arg = planewave_energy_argument(p.beam, p.line, w, theta_p);
  return p.line.se2 / (kTwoPi * kTwoPi) / (8.0 * beam_energy(p.beam)) * gaussian_delta(arg, p.delta) /
         final_energy * w;
}

namespace detail {

/// Boundary tolerance on kappa_b^2 for the closed-form master integral.
inline constexpr double kWindowEdgeTol = 1e-12;

} // namespace detail

/// Closed form of the master integral,
///   I1 = 4M / (E_b sqrt(4 kb^2 kp^2 - (ka^2 - kb^2 - kp^2)^2))
/// at the recoil momentum kb fixed by energy conservation; zero when that
/// momentum cannot close the triangle.
inline double master_integral_exact(const EmissionProblem &p, double theta_p) {
  if (!p.beam.is_twisted()) throw std::invalid_argument("master_integral_exact needs a twisted beam");
  const PhotonMode photon = p.photon(theta_p);
  const auto recoil = recoil_state(p.beam, p.line, photon);
  if (!recoil) return 0.0;
  const KappaWindow win = triangle_window(p.beam, photon);
  const double s = recoil->kappa_b_tilde * recoil->kappa_b_tilde;
  const double tol_lo = detail::kWindowEdgeTol * std::max(1.0, win.lower_sq);
  const double tol_hi = detail::kWindowEdgeTol * std::max(1.0, win.upper_sq);
  if (std::fabs(s - win.lower_sq) <= tol_lo || std::fabs(s - win.upper_sq) <= tol_hi)
    throw SingularGeometryError("recoil momentum on the triangle boundary at theta_p = " +
                                std::to_string(theta_p));
  if (s < win.lower_sq || s > win.upper_sq) return 0.0;
  // 4 kb^2 kp^2 - (ka^2 - kb^2 - kp^2)^2 == (kb^2 - s_lo)(s_hi - kb^2)
  const double root = std::sqrt((s - win.lower_sq) * (win.upper_sq - s));
  return 4.0 * p.beam.mass() / (recoil->energy_b_tilde * root);
}

/// Master integral with the energy delta replaced by the Gaussian,
///   I1 = int 4 G(eps_a + E_a - eps_b - E_b - omega) kb dkb / (E_b sqrt(...))
/// over kb in [|ka - kp|, ka + kp]. With kb^2 = ka^2 + kp^2 - 2 ka kp cos(phi)
/// the square root cancels against the measure:
///   I1 = int_0^pi 2 G(...) / E_b dphi.
inline double master_integral_quad(const EmissionProblem &p, double theta_p, const QuadratureConfig &cfg = {}) {
  if (!p.beam.is_twisted()) throw std::invalid_argument("master_integral_quad needs a twisted beam");
  const PhotonMode photon = p.photon(theta_p);
  const double m = p.beam.mass();
  const double ka = p.beam.kappa();
  const double kp = photon.kappa();
  const double pzb = p.beam.p_z() - photon.k_z();
  const double release = p.line.gap() + beam_energy(p.beam) - p.omega;
  const double s_mid = ka * ka + kp * kp;
  const double half = 2.0 * ka * kp;
  auto final_energy = [&](double kb2) { return (kb2 + pzb * pzb) / (2.0 * m); };

  if (!(half > 0.0)) {
    // zero-width window: the phi integral is pi times the endpoint value
    const double eb = final_energy(s_mid);
    return kTwoPi * gaussian_delta(release - eb, p.delta) / eb;
  }

  auto integrand = [&](double phi) {
    const double eb = final_energy(s_mid - half * std::cos(phi));
    return 2.0 * gaussian_delta(release - eb, p.delta) / eb;
  };

  IntegrationHints hints;
  hints.lower = hints.upper = EndpointKind::Regular;
  // Gaussian in kb^2 has width 2 M sigma_E; map its center into phi.
  const double s_tilde = kappa_b_tilde_sq(p.beam, p.line, photon);
  const double width_s = 2.0 * m * p.delta.sigma();
  if (s_tilde > s_mid - half - 10.0 * width_s && s_tilde < s_mid + half + 10.0 * width_s) {
    const double phi_c = std::acos(std::clamp((s_mid - s_tilde) / half, -1.0, 1.0));
    const double w = width_s / (half * std::max(std::sin(phi_c), std::sqrt(width_s / half)));
    hints.spikes.push_back({phi_c, std::min(w, std::numbers::pi)});
  }
  return integrate(integrand, 0.0, std::numbers::pi, cfg, hints).value;
}

enum class MasterIntegralMode { Exact, Quadrature };

/// Reduced twisted-beam density |S_e|^2/(2pi)^4 / (8 E_a) * I1/(2pi) * omega.
/// The OAM projection of the beam drops out of the summed final states.
inline double twisted_density(const EmissionProblem &p, double theta_p, MasterIntegralMode mode,
                              const QuadratureConfig &cfg = {}) {
  const double i1 =
      mode == MasterIntegralMode::Exact ? master_integral_exact(p, theta_p) : master_integral_quad(p, theta_p, cfg);
  const double tp2 = kTwoPi * kTwoPi;
  return p.line.se2 / (tp2 * tp2) / (8.0 * beam_energy(p.beam)) * i1 / kTwoPi * p.omega;
}

/// Angular-geometric factor [1 + cos(2 ma delta_x - 2 mb delta_b)] kb / (4 Delta)
/// of the twisted-to-twisted probability at fixed final (kb, mb).
inline double twisted_pair_weight(int m_a, int m_b, const TriangleGeom &tri) {
  if (!tri.valid()) throw std::invalid_argument("twisted_pair_weight needs a closed triangle");
  const auto &s = *tri.shape;
  if (s.area == 0.0) throw SingularGeometryError("pair weight diverges on a degenerate triangle");
  return (1.0 + std::cos(2.0 * m_a * s.delta_x - 2.0 * m_b * s.delta_b)) * tri.kappa_b / (4.0 * s.area);
}

enum class Channel { PlaneWave, TwistedExact, TwistedQuad };

struct ScanResult {
  std::vector<double> thetas;
  std::vector<double> raw;
  std::vector<double> values; ///< raw / max(raw)
  bool normalized = false;
  std::vector<double> peaks;
};

/// Density of one channel at one angle. The plane-wave channel uses the
/// plane wave with the beam's total momentum.
inline double channel_density(const EmissionProblem &p, Channel channel, double theta_p,
                              const QuadratureConfig &cfg = {}) {
  switch (channel) {
  case Channel::PlaneWave:
    return planewave_density(p.beam.is_twisted() ? p.as_plane_wave() : p, theta_p);
  case Channel::TwistedExact:
    return twisted_density(p, theta_p, MasterIntegralMode::Exact, cfg);
  case Channel::TwistedQuad:
    return twisted_density(p, theta_p, MasterIntegralMode::Quadrature, cfg);
  }
  throw std::invalid_argument("unknown channel");
}

/// Strict interior local maxima whose normalized value exceeds `threshold`.
inline std::vector<double> find_peaks(const std::vector<double> &thetas, const std::vector<double> &values,
                                      double threshold = 0.5) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] > threshold && values[i] > values[i - 1] && values[i] > values[i + 1])
      peaks.push_back(thetas[i]);
  return peaks;
}

inline void validate_grid(const std::vector<double> &grid) {
  if (grid.empty()) throw ConfigError("empty angular grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !(grid[i] <= std::numbers::pi)) throw ConfigError("grid angle outside [0, pi]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("grid must be strictly increasing");
  }
}

/// Max-normalize raw values in place into a ScanResult.
inline ScanResult normalize_scan(std::vector<double> thetas, std::vector<double> raw) {
  const double top = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  if (!(top > 0.0)) throw EmptyChannelError("every density in the scan is zero");
  ScanResult out;
  out.values.reserve(raw.size());
  for (double v : raw) out.values.push_back(v / top);
  out.thetas = std::move(thetas);
  out.raw = std::move(raw);
  out.normalized = true;
  out.peaks = find_peaks(out.thetas, out.values);
  return out;
}

inline ScanResult scan(const EmissionProblem &p, Channel channel, const std::vector<double> &grid,
                       const QuadratureConfig &cfg = {}) {
  validate_grid(grid);
  std::vector<double> raw(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) raw[i] = channel_density(p, channel, grid[i], cfg);
  return normalize_scan(grid, std::move(raw));
}

/// n uniform angles on [lo, hi], dropping any that fall within `inset` of an
/// edge of the triangle window (where the exact density diverges).
inline std::vector<double> uniform_grid(double lo, double hi, int n, const std::vector<double> &avoid = {},
                                        double inset = 0.0) {
  if (n < 2) throw ConfigError("a grid needs at least two points");
  if (!(lo < hi)) throw ConfigError("grid needs theta_min < theta_max");
  std::vector<double> grid;
  grid.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
    const bool near = std::any_of(avoid.begin(), avoid.end(), [&](double e) { return std::fabs(t - e) < inset; });
    if (!near) grid.push_back(t);
  }
  return grid;
}

/// Default scan window theta_pw -+ 2 theta_a clipped to [0, pi].
inline std::pair<double, double> default_window(const EmissionProblem &p) {
  const double center = reference_angle(p);
  const double half = p.beam.opening_angle() > 0.0 ? 2.0 * p.beam.opening_angle() : 0.1;
  return {std::max(0.0, center - half), std::min(std::numbers::pi, center + half)};
}

/// Largest |(2 pi)^2 tw_quad / pw - 1| over the grid points where the
/// normalized plane-wave density is at least `core`. Densities are raw.
inline double limit_deviation(const EmissionProblem &p, const std::vector<double> &grid, double core = 0.5,
                              const QuadratureConfig &cfg = {}) {
  const ScanResult pw = scan(p, Channel::PlaneWave, grid, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (pw.values[i] < core) continue;
    const double tw = twisted_density(p, grid[i], MasterIntegralMode::Quadrature, cfg);
    worst = std::max(worst, std::fabs(kTwoPi * kTwoPi * tw / pw.raw[i] - 1.0));
  }
  return worst;
}

} // namespace twem
