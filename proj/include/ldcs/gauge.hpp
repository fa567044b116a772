#pragma once

// Gauge-shift sweep eps -> eps + lambda k over random off-resonance
// configurations.  The amplitude evaluator is injectable so that a broken
// variant can be fed through the same harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "amplitude.hpp"
#include "kinematics.hpp"

namespace ldcs {

using ChannelAmplitudeFn = std::function<cplx(const NonperturbativeChannel&, const CFourVector& eps_b,
                                              const CFourVector& eps_c, int r_i, int r_f)>;

inline cplx default_channel_amplitude(const NonperturbativeChannel& ch, const CFourVector& eb, const CFourVector& ec,
                                      int ri, int rf) {
  return ch.amplitude(eb, ec, ri, rf);
}

struct GaugeCheckOptions {
  int configs = 100;
  std::vector<double> lambdas{1.0, 10.0, -3.0};
  std::uint64_t seed = 20240611;
  double xi_min = 0.1, xi_max = 1.0;
  int n_max = 5;
  double omega_b_min = 0.01, omega_b_max = 1.0;  // MeV
  double theta_b_max = 2e-3, theta_c_max = 2.5e-3;
  double min_pole_distance = 1e-6;  // MeV^2, closer configs are redrawn
};

struct GaugeCheckResult {
  double max_deviation = 0.0;  // max |A(eps + lambda k) - A(eps)| / |A(eps)|
  int evaluated = 0;
  int redrawn = 0;
};

/// One random configuration in the safe window with random complex
/// polarizations and spins.
struct RandomConfigSource {
  std::mt19937_64 rng;
  GaugeCheckOptions opt;

  explicit RandomConfigSource(const GaugeCheckOptions& o) : rng(o.seed), opt(o) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

  CFourVector random_polarization(const PhotonDirection& d) {
    const auto pb = polarization_basis(d);
    const cplx a = std::polar(1.0, uniform(0.0, 2.0 * std::numbers::pi)) * uniform(0.1, 1.0);
    const cplx b = std::polar(1.0, uniform(0.0, 2.0 * std::numbers::pi)) * uniform(0.1, 1.0);
    return a * to_complex(pb.eps1) + b * to_complex(pb.eps2);
  }

  ScatterConfig draw(LaserPolarization pol, const Regularization& reg_kind) {
    ScatterConfig c;
    c.laser.polarization = pol;
    c.laser.xi = uniform(opt.xi_min, opt.xi_max);
    c.n = 1 + static_cast<int>(uniform(0.0, opt.n_max - 1e-9));
    c.omega_b = std::exp(uniform(std::log(opt.omega_b_min), std::log(opt.omega_b_max)));
    c.dir_b = {uniform(1e-5, opt.theta_b_max), uniform(0.0, 2.0 * std::numbers::pi)};
    c.dir_c = {uniform(1e-5, opt.theta_c_max), uniform(0.0, 2.0 * std::numbers::pi)};
    c.eps_b = random_polarization(c.dir_b);
    c.eps_c = random_polarization(c.dir_c);
    c.r_i = 1 + static_cast<int>(uniform(0.0, 2.0 - 1e-9));
    c.r_f = 1 + static_cast<int>(uniform(0.0, 2.0 - 1e-9));
    c.reg = reg_kind.kind == RegularizationKind::PulseFactor ? Regularization::pulse_default(c.laser) : reg_kind;
    return c;
  }
};

inline GaugeCheckResult gauge_check(LaserPolarization pol, const Regularization& reg, const GaugeCheckOptions& opt = {},
                                    const ChannelAmplitudeFn& amp = default_channel_amplitude) {
  RandomConfigSource src(opt);
  GaugeCheckResult r;
  while (r.evaluated < opt.configs) {
    const ScatterConfig c = src.draw(pol, reg);
    const auto kin = make_channel(c.laser, c.electron, c.n, c.omega_b, c.dir_b, c.dir_c);
    if (!kin) {
      ++r.redrawn;
      continue;
    }
    const NonperturbativeChannel ch(c.laser, *kin, c.reg);
    if (ch.min_pole_distance() < opt.min_pole_distance) {
      ++r.redrawn;
      continue;
    }
    const cplx a0 = amp(ch, c.eps_b, c.eps_c, c.r_i, c.r_f);
    if (std::abs(a0) == 0.0) {
      ++r.redrawn;
      continue;
    }
    for (double lam : opt.lambdas) {
      const cplx ab = amp(ch, c.eps_b + lam * to_complex(kin->k_b), c.eps_c, c.r_i, c.r_f);
      const cplx ac = amp(ch, c.eps_b, c.eps_c + lam * to_complex(kin->k_c), c.r_i, c.r_f);
      r.max_deviation = std::max({r.max_deviation, std::abs(ab - a0) / std::abs(a0), std::abs(ac - a0) / std::abs(a0)});
    }
    ++r.evaluated;
  }
  return r;
}

}  // namespace ldcs
