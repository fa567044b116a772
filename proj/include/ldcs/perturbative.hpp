#pragma once

// Tree-level double Compton amplitude: one laser photon absorbed, two
// photons emitted, six Feynman diagrams with free electron propagators.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "amplitude.hpp"
#include "clifford.hpp"
#include "kinematics.hpp"

namespace ldcs {

/// Laser polarization vector: a/|a| for linear, (0, 1, i, 0)/sqrt(2) for circular.
inline CFourVector laser_polarization_vector(const LaserConfig& laser) {
  if (laser.polarization == LaserPolarization::Linear) return {0.0, 1.0, 0.0, 0.0};
  const double r = 1.0 / std::sqrt(2.0);
  return {0.0, r, cplx{0.0, r}, 0.0};
}

class PerturbativeChannel {
 public:
  PerturbativeChannel(const LaserConfig& laser, const ChannelKinematics& kin)
      : PerturbativeChannel(kin, laser_polarization_vector(laser)) {}

  PerturbativeChannel(const ChannelKinematics& kin, const CFourVector& eps_laser)
      : kin_(kin), eps_laser_(eps_laser) {
    const double m = units::electron_mass;
    const DiracMatrix mm = m * DiracMatrix::identity();
    const FourVector& pi = kin.p_i;
    const FourVector& pf = kin.p_f;
    const FourVector& kp = kin.kappa;
    // Propagators with on-shell denominators written as 2 p.k.
    for (int side = 0; side < 2; ++side) {
      const FourVector& k1 = side == 0 ? kin.k_b : kin.k_c;  // emitted at the vertex nearest p_i
      const FourVector& k2 = side == 0 ? kin.k_c : kin.k_b;
      auto& p = props_[side];
      p.final_plus_k2 = (1.0 / (2.0 * dot(pf, k2))) * (slash(pf + k2, kRep) + mm);
      p.initial_plus_laser = (1.0 / (2.0 * dot(pi, kp))) * (slash(pi + kp, kRep) + mm);
      p.initial_minus_k1 = (-1.0 / (2.0 * dot(pi, k1))) * (slash(pi - k1, kRep) + mm);
      p.final_minus_laser = (-1.0 / (2.0 * dot(pf, kp))) * (slash(pf - kp, kRep) + mm);
    }
    if (dot(pf, kin.k_c) == 0.0 || dot(pf, kin.k_b) == 0.0 || dot(pi, kin.k_b) == 0.0 ||
        dot(pi, kin.k_c) == 0.0)
      throw PoleError("perturbative amplitude: vanishing propagator denominator");
  }

  const ChannelKinematics& kinematics() const { return kin_; }

  /// Sum of the six diagrams between ubar(p_f) and u(p_i) as a Dirac matrix.
  DiracMatrix diagram_sum(const CFourVector& eps_b, const CFourVector& eps_c) const {
    const DiracMatrix eb = slash(eps_b, kRep), ec = slash(eps_c, kRep), el = slash(eps_laser_, kRep);
    DiracMatrix total;
    for (int side = 0; side < 2; ++side) {
      const auto& p = props_[side];
      const DiracMatrix& e1 = side == 0 ? eb : ec;  // photon attached nearest p_i
      const DiracMatrix& e2 = side == 0 ? ec : eb;
      total += e2 * p.final_plus_k2 * e1 * p.initial_plus_laser * el;
      total += e2 * p.final_plus_k2 * el * p.initial_minus_k1 * e1;
      total += el * p.final_minus_laser * e2 * p.initial_minus_k1 * e1;
    }
    return total;
  }

  cplx amplitude(const CFourVector& eps_b, const CFourVector& eps_c, int r_i, int r_f) const {
    return sandwich(bar(free_spinor(kin_.p_f, r_f, units::electron_mass, kRep), kRep), diagram_sum(eps_b, eps_c), free_spinor(kin_.p_i, r_i, units::electron_mass, kRep));
  }

  AmplitudeTensor amplitude_tensor(const std::array<CFourVector, 2>& eps_b,
                                   const std::array<CFourVector, 2>& eps_c) const {
    std::array<BiSpinor, 2> u{free_spinor(kin_.p_i, 1, units::electron_mass, kRep), free_spinor(kin_.p_i, 2, units::electron_mass, kRep)};
    std::array<AdjointSpinor, 2> ub{bar(free_spinor(kin_.p_f, 1, units::electron_mass, kRep), kRep), bar(free_spinor(kin_.p_f, 2, units::electron_mass, kRep), kRep)};
    AmplitudeTensor t{};
    for (int lb = 0; lb < 2; ++lb)
      for (int lc = 0; lc < 2; ++lc) {
        const DiracMatrix d = diagram_sum(eps_b[lb], eps_c[lc]);
        for (int ri = 0; ri < 2; ++ri) {
          const BiSpinor v = d * u[ri];
          for (int rf = 0; rf < 2; ++rf) t[ri][rf][lb][lc] = ub[rf] * v;
        }
      }
    return t;
  }

 private:
  struct Propagators {
    DiracMatrix final_plus_k2, initial_plus_laser, initial_minus_k1, final_minus_laser;
  };

  ChannelKinematics kin_;
  CFourVector eps_laser_;
  std::array<Propagators, 2> props_;
};

/// Perturbative amplitude sum_i N_i for a configuration; the photon order
/// in cfg is ignored (always one laser photon).
inline cplx pdcs_amplitude(const ScatterConfig& cfg) {
  const auto kin = make_perturbative_channel(cfg.laser, cfg.electron, cfg.omega_b, cfg.dir_b, cfg.dir_c);
  if (!kin) throw std::domain_error("pdcs_amplitude: channel closed");
  return PerturbativeChannel(cfg.laser, *kin).amplitude(cfg.eps_b, cfg.eps_c, cfg.r_i, cfg.r_f);
}

}  // namespace ldcs
