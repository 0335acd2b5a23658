#pragma once

// Center-of-mass, photon and transition kinematics in natural units
// (hbar = c = 1). The z axis is the propagation axis of the atomic beam.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "twem/errors.hpp"

namespace twem {

enum class BeamKind { PlaneWave, Twisted };

/// Atomic center-of-mass state: a plane wave along z or a Bessel (twisted)
/// wave built from plane waves on a cone of opening angle theta_a.
class BeamState {
public:
  static BeamState plane_wave(double mass, double momentum) {
    return BeamState(BeamKind::PlaneWave, mass, momentum, 0.0, 0);
  }

  static BeamState twisted(double mass, double momentum, double opening_angle, int m_oam) {
    return BeamState(BeamKind::Twisted, mass, momentum, opening_angle, m_oam);
  }

  BeamKind kind() const { return kind_; }
  bool is_twisted() const { return kind_ == BeamKind::Twisted; }
  double mass() const { return mass_; }
  double momentum() const { return momentum_; }
  double opening_angle() const { return opening_angle_; }
  int m_oam() const { return m_oam_; }

  double p_z() const { return momentum_ * std::cos(opening_angle_); }
  double kappa() const { return momentum_ * std::sin(opening_angle_); }

  /// Plane wave with the same mass and total momentum.
  BeamState plane_wave_counterpart() const { return plane_wave(mass_, momentum_); }

private:
  BeamState(BeamKind kind, double mass, double momentum, double opening_angle, int m_oam)
      : kind_(kind), mass_(mass), momentum_(momentum), opening_angle_(opening_angle),
        m_oam_(kind == BeamKind::Twisted ? m_oam : 0) {
    if (!std::isfinite(mass) || !(mass > 0.0)) throw ConfigError("beam mass must be positive");
    if (!std::isfinite(momentum) || !(momentum >= 0.0))
      throw ConfigError("beam momentum must be non-negative");
    if (!(opening_angle >= 0.0) || !(opening_angle < std::numbers::pi / 2))
      throw ConfigError("opening angle must lie in [0, pi/2)");
    if (kind == BeamKind::PlaneWave && opening_angle != 0.0)
      throw ConfigError("a plane-wave beam has zero opening angle");
  }

  BeamKind kind_;
  double mass_;
  double momentum_;
  double opening_angle_;
  int m_oam_;
};

/// Non-relativistic kinetic energy (kappa^2 + P_z^2) / 2M of the center of mass.
inline double beam_energy(const BeamState &beam) {
  return beam.momentum() * beam.momentum() / (2.0 * beam.mass());
}

/// Electron line: level energies and the (angle-independent) |S_e|^2 weight.
struct TransitionLine {
  double eps_a = 0.0;
  double eps_b = 0.0;
  double se2 = 1.0;

  double gap() const { return eps_a - eps_b; }

  void validate() const {
    if (!std::isfinite(eps_a) || !std::isfinite(eps_b) || !(eps_a > eps_b))
      throw ConfigError("an emission line needs eps_a > eps_b");
    if (!std::isfinite(se2) || !(se2 >= 0.0)) throw ConfigError("|S_e|^2 must be non-negative");
  }
};

/// Emitted photon with energy omega = |k_p| along (theta_p, phi_p).
struct PhotonMode {
  double omega = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  double k_z() const { return omega * std::cos(theta); }
  double kappa() const { return omega * std::sin(theta); }

  void validate() const {
    if (!std::isfinite(omega) || !(omega > 0.0)) throw ConfigError("photon energy must be positive");
    if (!(theta >= 0.0) || !(theta <= std::numbers::pi))
      throw ConfigError("photon polar angle must lie in [0, pi]");
    if (!std::isfinite(phi)) throw ConfigError("photon azimuth must be finite");
  }
};

/// Area and phases of a triangle with sides (kappa_a, kappa_b, kappa_p).
struct TriangleShape {
  double area;
  double delta_b; ///< arccos[(ka^2 - kb^2 - kp^2) / (2 kb kp)], in [0, pi]
  double delta_x; ///< arccos[(ka^2 + kp^2 - kb^2) / (2 ka kp)], in [0, pi]
};

struct TriangleGeom {
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double kappa_p = 0.0;
  std::optional<TriangleShape> shape; ///< empty when the triangle inequality fails

  bool valid() const { return shape.has_value(); }
  bool degenerate() const { return shape && shape->area == 0.0; }
};

namespace detail {

inline constexpr double kArccosClampWindow = 1e-12;

inline double checked_arccos(double c, const char *what) {
  if (c > 1.0 + kArccosClampWindow || c < -1.0 - kArccosClampWindow)
    throw InternalConsistencyError(std::string("arccos argument out of range for ") + what + ": " +
                                   std::to_string(c));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

} // namespace detail

/// Area from 16 Delta^2 = 4 kb^2 kp^2 - (ka^2 - kb^2 - kp^2)^2, evaluated in
/// the factored form (sum of sides times the three side differences) so that
/// thin triangles keep full relative precision.
inline double triangle_area(double ka, double kb, double kp) {
  const double p = (ka + kb + kp) * (-ka + kb + kp) * (ka - kb + kp) * (ka + kb - kp);
  return 0.25 * std::sqrt(std::max(p, 0.0));
}

inline TriangleGeom make_triangle(double kappa_a, double kappa_b, double kappa_p) {
  for (double k : {kappa_a, kappa_b, kappa_p})
    if (!std::isfinite(k) || !(k >= 0.0)) throw DomainError("triangle sides must be finite and >= 0");

  TriangleGeom tri{kappa_a, kappa_b, kappa_p, std::nullopt};
  if (kappa_b < std::fabs(kappa_a - kappa_p) || kappa_b > kappa_a + kappa_p) return tri;

  const double ka2 = kappa_a * kappa_a;
  const double kb2 = kappa_b * kappa_b;
  const double kp2 = kappa_p * kappa_p;
  // A zero side leaves the angle undefined; the collinear value 0 is used.
  const double delta_b = (kappa_b > 0.0 && kappa_p > 0.0)
                             ? detail::checked_arccos((ka2 - kb2 - kp2) / (2.0 * kappa_b * kappa_p), "delta_b")
                             : 0.0;
  const double delta_x = (kappa_a > 0.0 && kappa_p > 0.0)
                             ? detail::checked_arccos((ka2 + kp2 - kb2) / (2.0 * kappa_a * kappa_p), "delta_x")
                             : 0.0;
  tri.shape = TriangleShape{triangle_area(kappa_a, kappa_b, kappa_p), delta_b, delta_x};
  return tri;
}

/// Final center-of-mass state fixed by energy and longitudinal momentum
/// conservation once the photon is emitted.
struct RecoilState {
  double kappa_b_tilde;
  double energy_b_tilde;
};

/// Squared final transverse momentum, 2M(eps_a - eps_b - omega) + P^2 - (P_z - omega cos theta_p)^2.
/// May be negative (kinematically closed).
inline double kappa_b_tilde_sq(const BeamState &beam, const TransitionLine &line, const PhotonMode &photon) {
  const double pzb = beam.p_z() - photon.k_z();
  const double p = beam.momentum();
  return 2.0 * beam.mass() * (line.gap() - photon.omega) + p * p - pzb * pzb;
}

inline std::optional<RecoilState> recoil_state(const BeamState &beam, const TransitionLine &line,
                                               const PhotonMode &photon) {
  const double kb2 = kappa_b_tilde_sq(beam, line, photon);
  if (kb2 < 0.0) return std::nullopt;
  const double pzb = beam.p_z() - photon.k_z();
  return RecoilState{std::sqrt(kb2), (kb2 + pzb * pzb) / (2.0 * beam.mass())};
}

/// Squared-momentum window [(ka - kp)^2, (ka + kp)^2] in which kappa_b closes
/// a triangle with the initial and photon transverse momenta.
struct KappaWindow {
  double lower_sq;
  double upper_sq;
};

inline KappaWindow triangle_window(const BeamState &beam, const PhotonMode &photon) {
  const double ka = beam.kappa();
  const double kp = photon.kappa();
  return {(ka - kp) * (ka - kp), (ka + kp) * (ka + kp)};
}

/// Polar angle solving eps_a - eps_b - omega + P_z omega cos(theta)/M - omega^2/2M = 0,
/// the emission maximum of a plane-wave atom moving along z with momentum P_z.
inline double theta_pw(const BeamState &beam, const TransitionLine &line, double omega) {
  const double m = beam.mass();
  const double pz = beam.p_z();
  if (!(omega > 0.0) || !(pz > 0.0)) throw NoPeakError("no emission peak for P_z = 0 or omega <= 0");
  const double c = m * (omega * omega / (2.0 * m) - (line.gap() - omega)) / (pz * omega);
  if (!(std::fabs(c) <= 1.0))
    throw NoPeakError("emission peak cosine " + std::to_string(c) + " outside [-1, 1]");
  return std::acos(c);
}

/// Residual of the energy-conservation argument at a given polar angle.
inline double planewave_energy_argument(const BeamState &beam, const TransitionLine &line, double omega,
                                        double theta_p) {
  const double m = beam.mass();
  return line.gap() - omega + beam.p_z() * omega * std::cos(theta_p) / m - omega * omega / (2.0 * m);
}

/// Polar angles in [0, pi] where the recoil momentum touches the edge of the
/// triangle window. For a twisted beam these are theta_pw -+ theta_a, with
/// theta_pw taken from the plane wave of the same total momentum.
inline std::vector<double> window_edges(const BeamState &beam, const TransitionLine &line, double omega) {
  const BeamState pw = beam.plane_wave_counterpart();
  std::vector<double> edges;
  double base = 0.0;
  try {
    base = theta_pw(pw, line, omega);
  } catch (const NoPeakError &) {
    return edges;
  }
  const double ta = beam.opening_angle();
  for (double t : {base - ta, base + ta, ta - base, -base - ta + 2.0 * std::numbers::pi})
    if (t >= 0.0 && t <= std::numbers::pi) edges.push_back(t);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double x, double y) { return std::fabs(x - y) < 1e-15; }),
              edges.end());
  return edges;
}

} // namespace twem
