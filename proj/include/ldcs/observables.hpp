#pragma once

// Differential two-photon emission rates (laser-dressed and perturbative),
// their decomposition over the photon order n, the phase-space integrated
// rate and the power-law fit of the nonperturbative excess.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "amplitude.hpp"
#include "kinematics.hpp"
#include "perturbative.hpp"
#include "units.hpp"

namespace ldcs {

/// Final photon polarizations: a fixed pair, or summed over the Cartesian basis.
struct PolarizationSelection {
  bool summed = true;
  CFourVector eps_b, eps_c;

  static PolarizationSelection sum() { return {}; }
  static PolarizationSelection fixed(const CFourVector& eb, const CFourVector& ec) { return {false, eb, ec}; }
};

/// One point of the fully differential rate; the photon order is summed.
struct RateQuery {
  LaserConfig laser;
  ElectronConfig electron;
  double omega_b = 1.0;  // MeV
  PhotonDirection dir_b, dir_c;
  PolarizationSelection pol;
  Regularization reg;
};

struct RateOptions {
  int n_max = 60;        // orders always summed
  double tail_tol = 1e-8;  // extend past n_max until the last order is below this fraction of the sum
  int n_limit = 400;     // hard stop for the extension
  TruncationOptions truncation;
};

struct OrderContribution {
  int n = 0;
  double value = 0.0;  // s^-1 sr^-2 MeV^-1
  double omega_c = 0.0;
  double pulse_factor = 1.0;
  bool open = false;
  int s_max = 0;                // largest |s| kept in either channel
  double ceiling_excess = -INFINITY;  // omega_b + omega_c - 4 n gamma^2 omega / (1 + xi^2), MeV
};

struct DifferentialRatePoint {
  double value = 0.0;  // s^-1 sr^-2 MeV^-1
  std::vector<OrderContribution> orders;
  bool any_open = false;
  int n_used = 0;
  double tail = 0.0;  // last order relative to the sum
  bool converged = true;
  int s_max = 0;
  double ceiling_excess = -INFINITY;
};

/// e^4 m^2 omega_b omega_c^2 / (8 (2 pi)^5 Q_i q_f.k_c): converts the sum
/// over both electron spins of |reduced amplitude|^2 into the spin-averaged
/// rate, in natural units (MeV per MeV per sr^2).
inline double rate_prefactor(const ChannelKinematics& k) {
  const double m = units::electron_mass;
  const double e4 = units::e_squared * units::e_squared;
  const double tp5 = std::pow(2.0 * std::numbers::pi, 5);
  return e4 * m * m * k.omega_b * k.omega_c * k.omega_c / (8.0 * tp5 * k.q_i.t * dot(k.q_f, k.k_c));
}

/// xi^2 m^4 e^4 omega_b omega_c^2 / (16 (2 pi)^5 E_i p_f.k_c), the
/// perturbative counterpart for sum_spins |sum_j N_j|^2.
inline double pdcs_prefactor(const ChannelKinematics& k, double xi) {
  const double m = units::electron_mass;
  const double e4 = units::e_squared * units::e_squared;
  const double tp5 = std::pow(2.0 * std::numbers::pi, 5);
  return xi * xi * std::pow(m, 4) * e4 * k.omega_b * k.omega_c * k.omega_c /
         (16.0 * tp5 * k.p_i.t * dot(k.p_f, k.k_c));
}

namespace detail {

inline std::array<CFourVector, 2> cartesian_pair(const PhotonDirection& d) {
  const auto b = polarization_basis(d);
  return {to_complex(b.eps1), to_complex(b.eps2)};
}

template <typename Evaluator>
double spin_summed_square(const Evaluator& ev, const RateQuery& q) {
  double total = 0.0;
  if (q.pol.summed) {
    const auto t = ev.amplitude_tensor(cartesian_pair(q.dir_b), cartesian_pair(q.dir_c));
    for (const auto& a : t)
      for (const auto& b : a)
        for (const auto& c : b)
          for (const auto& v : c) total += std::norm(v);
    return total;
  }
  for (int ri = 1; ri <= 2; ++ri)
    for (int rf = 1; rf <= 2; ++rf) total += std::norm(ev.amplitude(q.pol.eps_b, q.pol.eps_c, ri, rf));
  return total;
}

}  // namespace detail

/// Contribution of photon order n; zero (open = false) for a closed channel.
inline OrderContribution differential_rate_order(const RateQuery& q, int n, const TruncationOptions& opt = {}) {
  OrderContribution c;
  c.n = n;
  const auto kin = make_channel(q.laser, q.electron, n, q.omega_b, q.dir_b, q.dir_c);
  if (!kin) return c;
  c.open = true;
  c.omega_c = kin->omega_c;
  c.ceiling_excess = q.omega_b + kin->omega_c - omega_ceiling(n, q.laser, q.electron);
  const NonperturbativeChannel ch(q.laser, *kin, q.reg, opt);
  for (Channel side : {Channel::B, Channel::C}) {
    const auto [lo, hi] = ch.s_range(side);
    if (lo <= hi) c.s_max = std::max({c.s_max, std::abs(lo), std::abs(hi)});
  }
  c.pulse_factor = ch.pulse_factor();
  if (c.pulse_factor == 0.0) return c;
  c.value = c.pulse_factor * rate_prefactor(*kin) * detail::spin_summed_square(ch, q) *
            units::inverse_seconds_per_mev;
  return c;
}

/// Fully differential rate d W / (d omega_b d Omega_b d Omega_c) summed over
/// photon orders, in s^-1 sr^-2 MeV^-1.
inline DifferentialRatePoint differential_rate(const RateQuery& q, const RateOptions& opt = {}) {
  if (!(q.omega_b > 0.0)) throw std::invalid_argument("differential_rate: omega_b must be positive");
  q.laser.validate();
  DifferentialRatePoint p;
  double last = 0.0;
  for (int n = 1;; ++n) {
    const auto c = differential_rate_order(q, n, opt.truncation);
    p.orders.push_back(c);
    p.value += c.value;
    p.any_open = p.any_open || c.open;
    p.s_max = std::max(p.s_max, c.s_max);
    p.ceiling_excess = std::max(p.ceiling_excess, c.ceiling_excess);
    p.n_used = n;
    last = c.value;
    if (n < opt.n_max) continue;
    p.tail = p.value > 0.0 ? last / p.value : 0.0;
    if (p.tail < opt.tail_tol) break;
    if (n >= opt.n_limit) {
      p.converged = false;
      break;
    }
  }
  return p;
}

/// Perturbative double Compton rate (one laser photon, free electrons), in
/// s^-1 sr^-2 MeV^-1.  Zero for a closed channel.
inline double differential_rate_pdcs(const RateQuery& q) {
  if (!(q.omega_b > 0.0)) throw std::invalid_argument("differential_rate_pdcs: omega_b must be positive");
  q.laser.validate();
  const auto kin = make_perturbative_channel(q.laser, q.electron, q.omega_b, q.dir_b, q.dir_c);
  if (!kin) return 0.0;
  const PerturbativeChannel ch(q.laser, *kin);
  return pdcs_prefactor(*kin, q.laser.xi) * detail::spin_summed_square(ch, q) * units::inverse_seconds_per_mev;
}

// ---------------------------------------------------------------------------
// Integration over the two photon solid angles and omega_b.

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
  std::vector<double> x, w;

  GaussLegendre(int order, double a, double b) {
    if (order < 1) throw std::invalid_argument("GaussLegendre: order must be positive");
    x.resize(order);
    w.resize(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (order + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= order; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = order * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
      x[i] = mid - half * z;
      x[order - 1 - i] = mid + half * z;
      w[i] = w[order - 1 - i] = half * wi;
    }
  }
};

struct IntegrationBounds {
  double theta_b_max = 1.5e-3;
  double theta_c_max = 2.5e-3;
  double omega_b_min = 1e-3;  // MeV
  double omega_b_max = 1.0;   // MeV
};

/// Gauss-Legendre orders per axis.  omega_b is integrated in ln(omega_b),
/// which absorbs the 1/omega_b infrared growth of the integrand.
struct QuadratureSpec {
  int psi_b = 16, psi_c = 16, theta_b = 12, theta_c = 12, omega_b = 20;
  bool estimate_error = true;  // also integrate with every order halved
  int threads = 1;

  QuadratureSpec halved() const {
    QuadratureSpec h = *this;
    h.psi_b = std::max(1, psi_b / 2);
    h.psi_c = std::max(1, psi_c / 2);
    h.theta_b = std::max(1, theta_b / 2);
    h.theta_c = std::max(1, theta_c / 2);
    h.omega_b = std::max(1, omega_b / 2);
    return h;
  }
};

struct IntegrationResult {
  double value = 0.0;           // s^-1
  double error_estimate = 0.0;  // |I(orders) - I(orders / 2)|, 0 when not requested
  long evaluations = 0;
};

/// Integrand over (omega_b, theta_b, psi_b, theta_c, psi_c), already summed
/// over photon polarizations.
using RateIntegrand = std::function<double(double omega_b, const PhotonDirection& b, const PhotonDirection& c)>;

namespace detail {

inline double integrate_once(const RateIntegrand& f, const IntegrationBounds& bd, const QuadratureSpec& q, long& evals) {
  const double two_pi = 2.0 * std::numbers::pi;
  const GaussLegendre gw(q.omega_b, std::log(bd.omega_b_min), std::log(bd.omega_b_max));
  const GaussLegendre gtb(q.theta_b, 0.0, bd.theta_b_max), gtc(q.theta_c, 0.0, bd.theta_c_max);
  const GaussLegendre gpb(q.psi_b, 0.0, two_pi), gpc(q.psi_c, 0.0, two_pi);

  // Outer (omega_b, theta_b, psi_b) cells are independent; each is filled
  // by one worker and the cells are summed in fixed order afterwards.
  const std::size_t outer = gw.x.size() * gtb.x.size() * gpb.x.size();
  std::vector<double> cell(outer, 0.0);
  const auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t idx = begin; idx < outer; idx += step) {
      const std::size_t iw = idx / (gtb.x.size() * gpb.x.size());
      const std::size_t itb = (idx / gpb.x.size()) % gtb.x.size();
      const std::size_t ipb = idx % gpb.x.size();
      const double wb = std::exp(gw.x[iw]);
      const PhotonDirection db{gtb.x[itb], gpb.x[ipb]};
      double inner = 0.0;
      for (std::size_t itc = 0; itc < gtc.x.size(); ++itc)
        for (std::size_t ipc = 0; ipc < gpc.x.size(); ++ipc) {
          const PhotonDirection dc{gtc.x[itc], gpc.x[ipc]};
          inner += gtc.w[itc] * gpc.w[ipc] * std::sin(dc.theta) * f(wb, db, dc);
        }
      cell[idx] = gw.w[iw] * wb * gtb.w[itb] * gpb.w[ipb] * std::sin(db.theta) * inner;
    }
  };
  const int nt = std::max(1, q.threads);
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(nt));
    for (auto& th : pool) th.join();
  }
  evals += static_cast<long>(outer * gtc.x.size() * gpc.x.size());
  double total = 0.0;
  for (double v : cell) total += v;
  return total;
}

}  // namespace detail

inline IntegrationResult integrate_rate(const RateIntegrand& f, const IntegrationBounds& bounds = {},
                                        const QuadratureSpec& spec = {}) {
  if (!(bounds.omega_b_min > 0.0) || !(bounds.omega_b_max > bounds.omega_b_min) || !(bounds.theta_b_max > 0.0) ||
      !(bounds.theta_c_max > 0.0))
    throw std::invalid_argument("integrate_rate: invalid bounds");
  IntegrationResult r;
  r.value = detail::integrate_once(f, bounds, spec, r.evaluations);
  if (spec.estimate_error) {
    const double coarse = detail::integrate_once(f, bounds, spec.halved(), r.evaluations);
    r.error_estimate = std::abs(r.value - coarse);
  }
  return r;
}

/// Polarization-summed nonperturbative rate integrated over the bounds.
inline IntegrationResult integrated_rate(const LaserConfig& laser, const ElectronConfig& electron,
                                         const Regularization& reg, const IntegrationBounds& bounds = {},
                                         const QuadratureSpec& spec = {}, const RateOptions& opt = {}) {
  const RateIntegrand f = [&](double wb, const PhotonDirection& b, const PhotonDirection& c) {
    RateQuery q{laser, electron, wb, b, c, PolarizationSelection::sum(), reg};
    return differential_rate(q, opt).value;
  };
  return integrate_rate(f, bounds, spec);
}

/// Polarization-summed perturbative rate integrated over the bounds.
inline IntegrationResult integrated_rate_pdcs(const LaserConfig& laser, const ElectronConfig& electron,
                                              const IntegrationBounds& bounds = {}, const QuadratureSpec& spec = {}) {
  const RateIntegrand f = [&](double wb, const PhotonDirection& b, const PhotonDirection& c) {
    RateQuery q{laser, electron, wb, b, c, PolarizationSelection::sum(), Regularization::none()};
    return differential_rate_pdcs(q);
  };
  return integrate_rate(f, bounds, spec);
}

struct PowerLawFit {
  double eta = 0.0;        // exponent
  double prefactor = 0.0;  // y = prefactor * x^eta
  double r_squared = 0.0;
};

/// Least-squares fit of ln y = ln c + eta ln x.  All y must be positive.
inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_power_law: need >= 2 matching points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("fit_power_law: non-positive value");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::domain_error("fit_power_law: degenerate abscissae");
  PowerLawFit f;
  f.eta = (n * sxy - sx * sy) / den;
  const double lc = (sy - f.eta * sx) / n;
  f.prefactor = std::exp(lc);
  const double mean = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (lc + f.eta * lx[i]);
    ss_res += r * r;
    ss_tot += (ly[i] - mean) * (ly[i] - mean);
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace ldcs
