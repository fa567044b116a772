#pragma once

// Laser and electron configuration, dressed momenta, photon geometry and
// polarization bases, energy conservation for the two-photon final state,
// and propagator resonance positions.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "clifford.hpp"
#include "units.hpp"

namespace ldcs {

enum class LaserPolarization { Linear, Circular };

/// Monochromatic plane wave propagating along -x3.
struct LaserConfig {
  double omega_ev = 2.5;
  double xi = 1.0;
  LaserPolarization polarization = LaserPolarization::Linear;

  double omega() const { return omega_ev * units::mev_per_ev; }

  /// Laser wave vector kappa = omega (1, 0, 0, -1).
  FourVector kappa() const { return {omega(), 0.0, 0.0, -omega()}; }

  /// Peak intensity in W/cm^2.
  double intensity_w_cm2() const {
    const double r = omega() / units::electron_mass;
    return xi * xi * r * r * units::critical_intensity_w_cm2;
  }

  /// e*a (linear) with e = -|e|; fixes e^2 a^2 = -2 xi^2 m^2.
  FourVector charge_times_a() const {
    return {0.0, -std::sqrt(2.0) * xi * units::electron_mass, 0.0, 0.0};
  }
  /// e*a1 and e*a2 (circular); e^2 a1^2 = e^2 a2^2 = -xi^2 m^2.
  FourVector charge_times_a1() const { return {0.0, -xi * units::electron_mass, 0.0, 0.0}; }
  FourVector charge_times_a2() const { return {0.0, 0.0, -xi * units::electron_mass, 0.0}; }

  void validate() const {
    if (!(omega_ev > 0.0)) throw std::invalid_argument("laser omega must be positive");
    if (!(xi >= 0.0)) throw std::invalid_argument("laser xi must be non-negative");
  }
};

/// Electron moving along +x3, counterpropagating with the laser.
struct ElectronConfig {
  double energy = 1000.0 * units::electron_mass;  // MeV

  FourVector momentum() const {
    const double m = units::electron_mass;
    if (energy < m) throw std::invalid_argument("electron energy below rest mass");
    const double pz = std::sqrt((energy - m) * (energy + m));
    return {energy, 0.0, 0.0, pz, m * m / (energy + pz)};
  }
  double gamma() const { return energy / units::electron_mass; }
};

struct PhotonDirection {
  double theta = 0.0;  // polar angle from +x3
  double psi = 0.0;    // azimuth

  /// (1, sin t cos p, sin t sin p, cos t), with 1 - cos t = 2 sin^2(t/2)
  FourVector unit() const {
    const double st = std::sin(theta);
    const double h = std::sin(0.5 * theta);
    return {1.0, st * std::cos(psi), st * std::sin(psi), std::cos(theta), 2.0 * h * h};
  }
};

struct PolarizationBasis {
  FourVector eps1, eps2;
  CFourVector eps_right, eps_left;
};

inline PolarizationBasis polarization_basis(const PhotonDirection& d) {
  const double ct = std::cos(d.theta), st = std::sin(d.theta);
  const double cp = std::cos(d.psi), sp = std::sin(d.psi);
  PolarizationBasis b;
  b.eps1 = {0.0, ct * cp, ct * sp, -st};
  b.eps2 = {0.0, -sp, cp, 0.0};
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i{0.0, 1.0};
  b.eps_right = r * (to_complex(b.eps1) + i * to_complex(b.eps2));
  b.eps_left = r * (to_complex(b.eps1) - i * to_complex(b.eps2));
  return b;
}

/// Two-branch arctangent: atan(y/x) for x > 0 and pi + atan(y/x) for x < 0,
/// continued to +-pi/2 on the x = 0 axis.
inline double arctan_two(double y, double x) {
  if (x > 0.0) return std::atan(y / x);
  if (x < 0.0) return std::numbers::pi + std::atan(y / x);
  if (y > 0.0) return std::numbers::pi / 2;
  if (y < 0.0) return -std::numbers::pi / 2;
  throw std::domain_error("arctan_two: undefined at the origin");
}

/// Quasi-momentum q = p + xi^2 m^2 / (2 kappa.p) kappa.
inline FourVector dressed_momentum(const FourVector& p, const LaserConfig& laser) {
  const FourVector k = laser.kappa();
  const double kp = dot(k, p);
  if (!(kp > 0.0)) throw std::domain_error("dressed_momentum: kappa.p must be positive");
  const double m = units::electron_mass;
  return p + (laser.xi * laser.xi * m * m / (2.0 * kp)) * k;
}

/// Inverse of dressed_momentum (kappa.q = kappa.p).
inline FourVector undressed_momentum(const FourVector& q, const LaserConfig& laser) {
  const FourVector k = laser.kappa();
  const double m = units::electron_mass;
  return q - (laser.xi * laser.xi * m * m / (2.0 * dot(k, q))) * k;
}

inline double effective_mass_sq(const LaserConfig& laser) {
  const double m = units::electron_mass;
  return m * m * (1.0 + laser.xi * laser.xi);
}

/// Quantum nonlinearity parameter chi = xi kappa.p / m^2.
inline double chi(const LaserConfig& laser, const FourVector& p) {
  const double m = units::electron_mass;
  return laser.xi * dot(laser.kappa(), p) / (m * m);
}

enum class ChannelStatus { Open, Closed, Degenerate };

struct OmegaC {
  ChannelStatus status = ChannelStatus::Closed;
  double value = 0.0;
  bool open() const { return status == ChannelStatus::Open; }
};

/// Energy of the second photon fixed by four-momentum conservation
/// q_i + n kappa = q_f + k_b + k_c with q_f on the dressed shell.
inline OmegaC omega_c_exact(int n, const FourVector& q_i, const FourVector& k_b,
                            const PhotonDirection& dir_c, const FourVector& kappa) {
  const FourVector kc = dir_c.unit();
  const double num = n * dot(kappa, q_i) - dot(k_b, q_i) - n * dot(kappa, k_b);
  const double den = n * dot(kappa, kc) + dot(q_i, kc) - dot(k_b, kc);
  if (!(den > 0.0)) return {ChannelStatus::Degenerate, 0.0};
  const double w = num / den;
  if (!(w > 0.0)) return {ChannelStatus::Closed, w};
  return {ChannelStatus::Open, w};
}

/// Small-angle, ultra-relativistic form of omega_c_exact.
inline double omega_c_small_angle(int n, double omega_b, double theta_b, double theta_c,
                                  const LaserConfig& laser, const ElectronConfig& e) {
  const double ei = e.energy;
  const double ms = effective_mass_sq(laser) / ei;
  return (4.0 * n * laser.omega() * ei - omega_b * (theta_b * theta_b * ei + ms)) /
         (theta_c * theta_c * ei + ms);
}

/// Kinematic ceiling 4 n gamma^2 omega / (1 + xi^2) on omega_b + omega_c.
inline double omega_ceiling(int n, const LaserConfig& laser, const ElectronConfig& e) {
  const double g = e.gamma();
  return 4.0 * n * g * g * laser.omega() / (1.0 + laser.xi * laser.xi);
}

/// omega_b at which p_b = q_i + s kappa - k_b reaches the dressed shell.
inline double resonance_omega_b_type1(int s, const FourVector& q_i, const PhotonDirection& dir_b,
                                      const FourVector& kappa) {
  if (s < 1) throw std::invalid_argument("resonance_omega_b_type1: s must be >= 1");
  const FourVector kb = dir_b.unit();
  return s * dot(kappa, q_i) / (dot(q_i, kb) + s * dot(kappa, kb));
}

/// Small-angle form 4 s omega E_i / (theta_b^2 E_i + m^2 (1 + xi^2) / E_i).
inline double resonance_omega_b_type1_small_angle(int s, double theta_b, const LaserConfig& laser,
                                                  const ElectronConfig& e) {
  const double ei = e.energy;
  return 4.0 * s * laser.omega() * ei /
         (theta_b * theta_b * ei + effective_mass_sq(laser) / ei);
}

/// omega_b at which p_c = q_i + s kappa - k_c reaches the dressed shell, with
/// omega_c eliminated through conservation at photon order n.  Empty when the
/// denominator is non-positive or the position is not a positive energy.
inline std::optional<double> resonance_omega_b_type2(int n, int s, const FourVector& q_i,
                                                     const PhotonDirection& dir_b,
                                                     const PhotonDirection& dir_c,
                                                     const FourVector& kappa) {
  const FourVector kb = dir_b.unit(), kc = dir_c.unit();
  const double cs_den = dot(q_i, kc) + s * dot(kappa, kc);
  if (!(cs_den > 0.0)) return std::nullopt;
  const double cs = s * dot(kappa, q_i) / cs_den;
  const double num = n * dot(kappa, q_i) - cs * (dot(q_i, kc) + n * dot(kappa, kc));
  const double den = -cs * dot(kb, kc) + dot(q_i, kb) + n * dot(kappa, kb);
  if (!(den > 0.0)) return std::nullopt;
  const double w = num / den;
  if (!(w > 0.0)) return std::nullopt;
  return w;
}

/// All four-momenta of one open two-photon channel at fixed photon order.
struct ChannelKinematics {
  int n = 0;
  double omega_b = 0.0, omega_c = 0.0;
  FourVector kappa, p_i, q_i, k_b, k_c, q_f, p_f;
};

/// Dressed kinematics for photon order n; empty when the channel is closed.
inline std::optional<ChannelKinematics> make_channel(const LaserConfig& laser,
                                                     const ElectronConfig& electron, int n,
                                                     double omega_b, const PhotonDirection& dir_b,
                                                     const PhotonDirection& dir_c) {
  ChannelKinematics ck;
  ck.n = n;
  ck.kappa = laser.kappa();
  ck.p_i = electron.momentum();
  ck.q_i = dressed_momentum(ck.p_i, laser);
  ck.omega_b = omega_b;
  ck.k_b = omega_b * dir_b.unit();
  const OmegaC wc = omega_c_exact(n, ck.q_i, ck.k_b, dir_c, ck.kappa);
  if (!wc.open()) return std::nullopt;
  ck.omega_c = wc.value;
  ck.k_c = wc.value * dir_c.unit();
  ck.q_f = ck.q_i + static_cast<double>(n) * ck.kappa - ck.k_b - ck.k_c;
  ck.p_f = undressed_momentum(ck.q_f, laser);
  return ck;
}

/// Undressed one-photon kinematics p_i + kappa = p_f + k_b + k_c.
inline std::optional<ChannelKinematics> make_perturbative_channel(const LaserConfig& laser,
                                                                  const ElectronConfig& electron,
                                                                  double omega_b,
                                                                  const PhotonDirection& dir_b,
                                                                  const PhotonDirection& dir_c) {
  ChannelKinematics ck;
  ck.n = 1;
  ck.kappa = laser.kappa();
  ck.p_i = electron.momentum();
  ck.q_i = ck.p_i;
  ck.omega_b = omega_b;
  ck.k_b = omega_b * dir_b.unit();
  const OmegaC wc = omega_c_exact(1, ck.p_i, ck.k_b, dir_c, ck.kappa);
  if (!wc.open()) return std::nullopt;
  ck.omega_c = wc.value;
  ck.k_c = wc.value * dir_c.unit();
  ck.p_f = ck.p_i + ck.kappa - ck.k_b - ck.k_c;
  ck.q_f = ck.p_f;
  return ck;
}

}  // namespace ldcs
