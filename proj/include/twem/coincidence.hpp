#pragma once

// Twisted initial atom, plane-wave final atom: the photon transverse momentum
// detected in coincidence with the atom lies on a displaced circle.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "twem/errors.hpp"
#include "twem/kinematics.hpp"
#include "twem/specfun.hpp"

namespace twem {

/// Circle (kx + kappa_b)^2 + ky^2 = kappa_a^2 in the photon transverse plane.
struct RingGeometry {
  double center_x;
  double center_y;
  double radius;
};

struct DetectorWindow {
  double kappa_b;
  double d_kappa_b;
  double phi_b = 0.0;

  void validate() const {
    if (!std::isfinite(kappa_b) || !(kappa_b > 0.0)) throw ConfigError("detector kappa_b must be positive");
    if (!(d_kappa_b > 0.0)) throw ConfigError("detector window width must be positive");
    if (!(d_kappa_b < 0.1 * kappa_b)) throw ConfigError("detector window must satisfy d_kappa_b < 0.1 kappa_b");
    if (!std::isfinite(phi_b)) throw ConfigError("detector azimuth must be finite");
  }
};

struct TransverseMomentum {
  double kx;
  double ky;
};

/// |kappa_p + kappa_b|, the length the initial transverse momentum must match.
inline double ring_distance(double kappa_b, double phi_b, double kappa_p, double phi_p) {
  const double x = kappa_b * std::cos(phi_b) + kappa_p * std::cos(phi_p);
  const double y = kappa_b * std::sin(phi_b) + kappa_p * std::sin(phi_p);
  return std::hypot(x, y);
}

struct TwPwAmplitude {
  /// 1 / sqrt(4 E_a E_b kappa_a); delta functions and volume factors excluded.
  double magnitude_factor;
  /// m_a * phi_x0, wrapped to (-pi, pi].
  double phase;
};

/// Center-of-mass matrix element <PW_b| exp(-i k_p R) |TW_a> on the radial
/// constraint surface kappa_a = |kappa_p + kappa_b|; empty off that surface.
inline std::optional<TwPwAmplitude> tw_pw_matrix_element(const BeamState &beam, double kappa_b, double phi_b,
                                                         const PhotonMode &photon, double rel_tol = 1e-9) {
  if (!beam.is_twisted()) throw std::invalid_argument("tw_pw_matrix_element needs a twisted beam");
  const double ka = beam.kappa();
  if (!(ka > 0.0)) throw DegenerateBeamError("twisted beam with zero transverse momentum");
  const double kp = photon.kappa();
  const double x0x = kappa_b * std::cos(phi_b) + kp * std::cos(photon.phi);
  const double x0y = kappa_b * std::sin(phi_b) + kp * std::sin(photon.phi);
  const double x0 = std::hypot(x0x, x0y);
  if (std::fabs(ka - x0) > rel_tol * ka) return std::nullopt;

  const double phi_x0 = std::atan2(x0y, x0x);
  const double raw_phase = beam.m_oam() * phi_x0;
  double phase = std::remainder(raw_phase, 2.0 * std::numbers::pi);
  if (phase <= -std::numbers::pi) phase += 2.0 * std::numbers::pi;
  if (beam.m_oam() == 0) phase = 0.0;

  const double pzb = beam.p_z() - photon.k_z();
  const double eb = (kappa_b * kappa_b + pzb * pzb) / (2.0 * beam.mass());
  const double ea = beam_energy(beam);
  return TwPwAmplitude{1.0 / std::sqrt(4.0 * ea * eb * ka), phase};
}

/// Non-negative roots of kp^2 + 2 kb kp cos(phi_p) + kb^2 - ka^2 = 0, ascending.
inline std::vector<double> allowed_kappa_p(double kappa_a, double kappa_b, double phi_p) {
  if (!(kappa_a > 0.0)) throw DomainError("allowed_kappa_p needs kappa_a > 0");
  if (!(kappa_b >= 0.0)) throw DomainError("allowed_kappa_p needs kappa_b >= 0");
  const double b = kappa_b * std::cos(phi_p);
  const double s = kappa_b * std::sin(phi_p);
  // (kp + b)^2 = ka^2 - s^2
  const double disc = (kappa_a - s) * (kappa_a + s);
  std::vector<double> roots;
  const double scale = kappa_a * kappa_a + kappa_b * kappa_b;
  if (disc < -1e-14 * scale) return roots;
  const double r = std::sqrt(std::max(disc, 0.0));
  // Stable pair: one root from the sum, the other from Vieta's product.
  const double product = (kappa_b - kappa_a) * (kappa_b + kappa_a);
  double k1 = 0.0;
  double k2 = 0.0;
  if (b <= 0.0) {
    k1 = -b + r;
    k2 = k1 != 0.0 ? product / k1 : -b - r;
  } else {
    k1 = -b - r;
    k2 = k1 != 0.0 ? product / k1 : -b + r;
  }
  for (double k : {k1, k2})
    if (k >= 0.0) roots.push_back(k);
  std::sort(roots.begin(), roots.end());
  if (roots.size() == 2 && std::fabs(roots[1] - roots[0]) <= 1e-12 * std::sqrt(scale)) roots.pop_back();
  return roots;
}

inline RingGeometry ring_geometry(double kappa_a, double kappa_b) {
  if (!(kappa_a > 0.0)) throw DomainError("ring radius kappa_a must be positive");
  return {-kappa_b, 0.0, kappa_a};
}

/// n points at uniform angles 2 pi k / n, starting on the +x side.
inline std::vector<TransverseMomentum> sample_ring(const RingGeometry &ring, int n) {
  if (n < 1) throw ConfigError("sample_ring needs n >= 1");
  std::vector<TransverseMomentum> pts;
  pts.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    pts.push_back({ring.center_x + ring.radius * std::cos(a), ring.center_y + ring.radius * std::sin(a)});
  }
  return pts;
}

/// Reduced coincidence density per d^3 k_p for an atom detector accepting
/// kappa_b within d_kappa_b:
///   |S_e|^2 / (2pi)^2 * G_E(eps_a + E_a - eps_b - E_b - omega) / (2 E_a)
///     * G_r(kappa_a - x0) / kappa_a * 2 pi kappa_b d_kappa_b / (2 E_b) / (2 omega).
/// G_r is a unit-area Gaussian of width d_kappa_b; the L_z and R regulators
/// are dropped.
inline double coincidence_density(const BeamState &beam, const TransitionLine &line, const DetectorWindow &window,
                                  const PhotonMode &photon, const GaussianDelta &delta) {
  if (!beam.is_twisted()) throw std::invalid_argument("coincidence_density needs a twisted beam");
  window.validate();
  const double ka = beam.kappa();
  if (!(ka > 0.0)) throw DegenerateBeamError("twisted beam with zero transverse momentum");
  const double m = beam.mass();
  const double pzb = beam.p_z() - photon.k_z();
  const double kb = window.kappa_b;
  const double eb = (kb * kb + pzb * pzb) / (2.0 * m);
  const double ea = beam_energy(beam);
  const double energy_arg = line.gap() + ea - eb - photon.omega;
  const double x0 = ring_distance(kb, window.phi_b, photon.kappa(), photon.phi);
  const GaussianDelta radial(window.d_kappa_b);
  const double tp = 2.0 * std::numbers::pi;
  return line.se2 / (tp * tp) * gaussian_delta(energy_arg, delta) / (2.0 * ea) * radial(ka - x0) / ka * tp * kb *
         window.d_kappa_b / (2.0 * eb) / (2.0 * photon.omega);
}

} // namespace twem
