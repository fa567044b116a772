#pragma once

#include <complex>
#include <numbers>

namespace ldcs {

using cplx = std::complex<double>;

// Natural units: hbar = c = 1, energies in MeV.
namespace units {

inline constexpr double electron_mass = 0.510998946;          // MeV
inline constexpr double alpha_fs = 1.0 / 137.035999;
inline constexpr double e_squared = 4.0 * std::numbers::pi * alpha_fs;
inline constexpr double mev_per_ev = 1.0e-6;
inline constexpr double inverse_seconds_per_mev = 1.519268e21;
inline constexpr double critical_intensity_w_cm2 = 2.3e29;

}  // namespace units

}  // namespace ldcs
