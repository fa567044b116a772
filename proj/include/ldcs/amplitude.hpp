#pragma once

// Reduced two-photon emission amplitudes of a laser-dressed electron.
//
// For a fixed photon order n the amplitude is
//
//   sum_s ubar(p_f) [ M_b(n-s) P_b(s) F_b(s) + M_c(n-s) P_c(s) F_c(s) ] u(p_i)
//
// with P(s) = (pslash - xi^2 m^2/(2 kappa.p) kappaslash + m) / (p^2 - m*^2)
// and p_{b,c}(s) = q_i + s kappa - k_{b,c}.  Every vertex current is a
// linear combination sum_k c_k(l) V_k of three fixed Dirac matrices V_k
// whose coefficients carry the whole dependence on the number l of laser
// photons absorbed at that vertex.  The s-sum is therefore carried out on
// scalars; the Dirac algebra is done once per polarization and spin.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bessel.hpp"
#include "clifford.hpp"
#include "kinematics.hpp"
#include "units.hpp"

namespace ldcs {

// Representation used by the amplitude evaluators.
inline constexpr Representation kRep = Representation::Chiral;

enum class RegularizationKind { None, ImaginaryMass, PulseFactor };

struct Regularization {
  RegularizationKind kind = RegularizationKind::PulseFactor;
  double tau = 0.0;  // pulse length, MeV^-1; only used by PulseFactor

  /// Pulse factor with tau = 1e4 / omega.
  static Regularization pulse_default(const LaserConfig& laser) {
    return {RegularizationKind::PulseFactor, 1.0e4 / laser.omega()};
  }
  static Regularization none() { return {RegularizationKind::None, 0.0}; }
  static Regularization imaginary_mass() { return {RegularizationKind::ImaginaryMass, 0.0}; }
};

/// Width Gamma(kappa.q) = 4e-3 kappa.q / m used by the imaginary-mass scheme.
inline double compton_width(double kappa_dot_q) {
  return 4.0e-3 * kappa_dot_q / units::electron_mass;
}

enum class Channel { B, C };

/// Full specification of one evaluation point.
struct ScatterConfig {
  LaserConfig laser;
  ElectronConfig electron;
  int n = 1;
  double omega_b = 1.0;  // MeV
  PhotonDirection dir_b, dir_c;
  CFourVector eps_b, eps_c;
  int r_i = 1, r_f = 1;
  Regularization reg;
};

/// Knobs for the s-sum truncation.
struct TruncationOptions {
  double tail_tol = 1e-14;
  double cutoff_scale = 1.0;  // multiplies every Bessel cutoff (convergence checks)
};

class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Volkov spinor prefactor e kappaslash aslash / (2 kappa.p) and its mirror.
inline DiracMatrix kappa_a(const FourVector& kappa, const FourVector& ea, double kp, Representation rep) {
  return (1.0 / (2.0 * kp)) * (slash(kappa, rep) * slash(ea, rep));
}
inline DiracMatrix a_kappa(const FourVector& kappa, const FourVector& ea, double kp, Representation rep) {
  return (1.0 / (2.0 * kp)) * (slash(ea, rep) * slash(kappa, rep));
}

}  // namespace detail

/// The three fixed Dirac matrices of one emission vertex.
///
/// kp_in is kappa.p of the electron entering the vertex, kp_out of the one
/// leaving it.
inline std::array<DiracMatrix, 3> vertex_matrices(const LaserConfig& laser, const CFourVector& eps,
                                                  double kp_in, double kp_out,
                                                  Representation rep = kRep) {
  const FourVector kappa = laser.kappa();
  const DiracMatrix es = slash(eps, rep);
  const DiracMatrix ks = slash(kappa, rep);
  const cplx k_eps = dot(kappa, eps);
  std::array<DiracMatrix, 3> v;
  if (laser.polarization == LaserPolarization::Linear) {
    const FourVector ea = laser.charge_times_a();
    const double e2a2 = dot(ea, ea);
    v[0] = es;
    v[1] = es * detail::kappa_a(kappa, ea, kp_in, rep) + detail::a_kappa(kappa, ea, kp_out, rep) * es;
    v[2] = (-e2a2 * k_eps / (2.0 * kp_in * kp_out)) * ks;
  } else {
    const FourVector ea1 = laser.charge_times_a1();
    const FourVector ea2 = laser.charge_times_a2();
    const double e2a1 = dot(ea1, ea1);
    const cplx i{0.0, 1.0};
    v[0] = es - (e2a1 * k_eps / (2.0 * kp_in * kp_out)) * ks;
    v[1] = 0.5 * (es * detail::kappa_a(kappa, ea1, kp_in, rep) + detail::a_kappa(kappa, ea1, kp_out, rep) * es);
    v[2] = (1.0 / (2.0 * i)) *
           (es * detail::kappa_a(kappa, ea2, kp_in, rep) + detail::a_kappa(kappa, ea2, kp_out, rep) * es);
  }
  return v;
}

/// Bessel arguments of one vertex: differences (in - out) of the Volkov
/// phase amplitudes alpha_j = e a.p_j / kappa.p_j, beta_j = e^2 a^2 / (8 kappa.p_j).
struct VertexArgs {
  double alpha = 0.0, beta = 0.0;      // linear
  double alpha_bar = 0.0, phi = 0.0;   // circular
};

inline VertexArgs vertex_args(const LaserConfig& laser, const FourVector& p_in, const FourVector& p_out) {
  const FourVector kappa = laser.kappa();
  const double kin = dot(kappa, p_in), kout = dot(kappa, p_out);
  VertexArgs va;
  if (laser.polarization == LaserPolarization::Linear) {
    const FourVector ea = laser.charge_times_a();
    const double e2a2 = dot(ea, ea);
    va.alpha = dot(ea, p_in) / kin - dot(ea, p_out) / kout;
    va.beta = e2a2 / (8.0 * kin) - e2a2 / (8.0 * kout);
  } else {
    const double a1 = dot(laser.charge_times_a1(), p_in) / kin - dot(laser.charge_times_a1(), p_out) / kout;
    const double a2 = dot(laser.charge_times_a2(), p_in) / kin - dot(laser.charge_times_a2(), p_out) / kout;
    va.alpha_bar = std::hypot(a1, a2);
    va.phi = va.alpha_bar > 0.0 ? arctan_two(a2, -a1) : 0.0;
  }
  return va;
}

/// Coefficients c_k(l), k = 0, 1, 2, of a vertex as a function of the number
/// l of laser photons absorbed there, tabulated for l in [lmin, lmax].
class VertexCoefficients {
 public:
  VertexCoefficients() = default;
  VertexCoefficients(const LaserConfig& laser, const VertexArgs& va, int lmin, int lmax)
      : linear_(laser.polarization == LaserPolarization::Linear), lmin_(lmin), lmax_(lmax) {
    if (linear_) {
      table_ = GenBesselTable(lmin, lmax, va.alpha, va.beta);
    } else {
      // J_{-l-1} ... J_{-l+1}
      bessel_ = BesselRange(-lmax - 1, -lmin + 1, va.alpha_bar);
      phi_ = va.phi;
    }
  }

  std::array<cplx, 3> operator()(int l) const {
    if (l < lmin_ || l > lmax_) return {};
    if (linear_) return {table_(0, l), table_(1, l), table_(2, l)};
    const cplx lo = bessel_(-l - 1) * std::polar(1.0, (-l - 1) * phi_);
    const cplx hi = bessel_(-l + 1) * std::polar(1.0, (-l + 1) * phi_);
    return {bessel_(-l) * std::polar(1.0, -l * phi_), lo + hi, lo - hi};
  }

 private:
  bool linear_ = true;
  int lmin_ = 0, lmax_ = -1;
  GenBesselTable table_;
  BesselRange bessel_;
  double phi_ = 0.0;
};

/// Cutoff on |l| beyond which a vertex's coefficients are negligible.
inline int vertex_cutoff(const LaserConfig& laser, const VertexArgs& va, const TruncationOptions& opt) {
  const int base = laser.polarization == LaserPolarization::Linear
                       ? s_cutoff(va.alpha, va.beta, opt.tail_tol)
                       : s_cutoff(va.alpha_bar, 0.0, opt.tail_tol) + 1;
  return static_cast<int>(std::ceil(base * opt.cutoff_scale));
}

/// Amplitude tensor S[r_i][r_f][lambda_b][lambda_c] for two polarization
/// vectors per photon.
using AmplitudeTensor = std::array<std::array<std::array<std::array<cplx, 2>, 2>, 2>, 2>;

/// Evaluator for one open channel at fixed photon order.
///
/// Construction does all polarization-independent work (Bessel tables,
/// propagator denominators, s-sums); amplitude() is then cheap.
class NonperturbativeChannel {
 public:
  NonperturbativeChannel(const LaserConfig& laser, const ChannelKinematics& kin, const Regularization& reg,
                         const TruncationOptions& opt = {})
      : laser_(laser), kin_(kin), reg_(reg) {
    const FourVector& kappa = kin.kappa;
    kp_i_ = dot(kappa, kin.q_i);
    kp_f_ = dot(kappa, kin.q_f);
    const double m = units::electron_mass;
    for (Channel ch : {Channel::B, Channel::C}) {
      auto& d = side(ch);
      const FourVector& k = ch == Channel::B ? kin.k_b : kin.k_c;
      d.base = kin.q_i - k;  // p(s) = base + s kappa
      d.kp = dot(kappa, d.base);
      d.numerator0 = slash(d.base, kRep) - (laser.xi * laser.xi * m * m / (2.0 * d.kp)) * slash(kappa, kRep) +
                     m * DiracMatrix::identity();
      // p(s)^2 - m*^2 = -2 q_i.k + 2 s kappa.(q_i - k)
      d.den0 = -2.0 * dot(kin.q_i, k);
      d.den_slope = 2.0 * d.kp;

      const VertexArgs in_args = vertex_args(laser, kin.q_i, d.base);
      const VertexArgs out_args = vertex_args(laser, d.base, kin.q_f);
      const int cut_in = vertex_cutoff(laser, in_args, opt);
      const int cut_out = vertex_cutoff(laser, out_args, opt);
      // s in [-cut_in, cut_in] (first vertex), n - s in [-cut_out, cut_out]
      d.s_lo = std::max(-cut_in, kin.n - cut_out);
      d.s_hi = std::min(cut_in, kin.n + cut_out);
      if (d.s_lo > d.s_hi) {
        d.empty = true;
        continue;
      }
      d.first = VertexCoefficients(laser, in_args, d.s_lo, d.s_hi);
      d.second = VertexCoefficients(laser, out_args, kin.n - d.s_hi, kin.n - d.s_lo);
      accumulate_sums(d);
    }
  }

  const ChannelKinematics& kinematics() const { return kin_; }

  /// Range of s retained for channel b or c (empty range when lo > hi).
  std::pair<int, int> s_range(Channel ch) const {
    const auto& d = side(ch);
    return {d.s_lo, d.s_hi};
  }

  /// Reduced amplitude for given photon polarizations and electron spins.
  cplx amplitude(const CFourVector& eps_b, const CFourVector& eps_c, int r_i, int r_f) const {
    const BiSpinor u = free_spinor(kin_.p_i, r_i, units::electron_mass, kRep);
    const AdjointSpinor ub = bar(free_spinor(kin_.p_f, r_f, units::electron_mass, kRep), kRep);
    return side_amplitude(Channel::B, eps_b, eps_c, u, ub) + side_amplitude(Channel::C, eps_c, eps_b, u, ub);
  }

  /// Contribution of one channel (b emitted first or c emitted first).
  cplx channel_amplitude(Channel ch, const CFourVector& eps_b, const CFourVector& eps_c, int r_i, int r_f) const {
    const BiSpinor u = free_spinor(kin_.p_i, r_i, units::electron_mass, kRep);
    const AdjointSpinor ub = bar(free_spinor(kin_.p_f, r_f, units::electron_mass, kRep), kRep);
    return ch == Channel::B ? side_amplitude(Channel::B, eps_b, eps_c, u, ub)
                            : side_amplitude(Channel::C, eps_c, eps_b, u, ub);
  }

  /// Amplitudes for all spins and the two given polarization vectors of each photon.
  AmplitudeTensor amplitude_tensor(const std::array<CFourVector, 2>& eps_b,
                                   const std::array<CFourVector, 2>& eps_c) const {
    std::array<BiSpinor, 2> u{free_spinor(kin_.p_i, 1, units::electron_mass, kRep), free_spinor(kin_.p_i, 2, units::electron_mass, kRep)};
    std::array<AdjointSpinor, 2> ub{bar(free_spinor(kin_.p_f, 1, units::electron_mass, kRep), kRep), bar(free_spinor(kin_.p_f, 2, units::electron_mass, kRep), kRep)};
    AmplitudeTensor t{};
    for (int lb = 0; lb < 2; ++lb)
      for (int lc = 0; lc < 2; ++lc) {
        const auto vb = prepare(Channel::B, eps_b[lb], eps_c[lc]);
        const auto vc = prepare(Channel::C, eps_c[lc], eps_b[lb]);
        for (int ri = 0; ri < 2; ++ri)
          for (int rf = 0; rf < 2; ++rf)
            t[ri][rf][lb][lc] = contract(Channel::B, vb, u[ri], ub[rf]) + contract(Channel::C, vc, u[ri], ub[rf]);
      }
    return t;
  }

  /// Pulse-length regularization factor for this channel (1 for other schemes).
  double pulse_factor() const {
    if (reg_.kind != RegularizationKind::PulseFactor) return 1.0;
    if (!(reg_.tau > 0.0)) throw std::invalid_argument("pulse factor requires tau > 0");
    const double m3 = std::pow(units::electron_mass, 3);
    const double width = std::sqrt(60.0 * m3 / reg_.tau);  // exp(-60) is below round-off
    double phi = 1.0;
    for (Channel ch : {Channel::B, Channel::C}) {
      const auto& d = side(ch);
      const double lo = std::ceil((-width - d.den0) / d.den_slope);
      const double hi = std::floor((width - d.den0) / d.den_slope);
      for (double s = lo; s <= hi; s += 1.0) {
        const double den = d.den0 + s * d.den_slope;
        phi *= -std::expm1(-reg_.tau * den * den / m3);
      }
    }
    return phi;
  }

  /// Smallest |p^2 - m*^2| over all s for either propagator.
  double min_pole_distance() const {
    double best = INFINITY;
    for (Channel ch : {Channel::B, Channel::C}) {
      const auto& d = side(ch);
      const double s0 = std::round(-d.den0 / d.den_slope);
      for (double s = s0 - 1; s <= s0 + 1; s += 1.0) best = std::min(best, std::abs(d.den0 + s * d.den_slope));
    }
    return best;
  }

 private:
  struct Side {
    FourVector base;
    double kp = 0.0;
    DiracMatrix numerator0;
    double den0 = 0.0, den_slope = 0.0;
    int s_lo = 0, s_hi = -1;
    bool empty = false;
    VertexCoefficients first, second;
    // sum_s c2_k(n - s) c1_l(s) / D(s) and the same weighted by s
    std::array<std::array<cplx, 3>, 3> sum0{}, sum1{};
  };

  struct Prepared {
    std::array<DiracMatrix, 3> first, second;
  };

  Side& side(Channel ch) { return ch == Channel::B ? b_ : c_; }
  const Side& side(Channel ch) const { return ch == Channel::B ? b_ : c_; }

  cplx denominator(const Side& d, int s) const {
    cplx den = d.den0 + s * d.den_slope;
    if (reg_.kind == RegularizationKind::ImaginaryMass) {
      // Q_i -> Q_i - i m Gamma(kappa.q_i) / (2 Q_i), m -> m - i Gamma(kappa.p) / 2.
      // m*^2 = m^2 - e^2 a^2 / 2 and only the bare m^2 carries the width.
      const double m = units::electron_mass;
      const double q0 = kin_.q_i.t;
      const cplx dq{0.0, -m * compton_width(kp_i_) / (2.0 * q0)};
      const cplx dm{0.0, -compton_width(d.kp) / 2.0};
      const double p0 = d.base.t + s * kin_.kappa.t;
      den += 2.0 * p0 * dq + dq * dq - (2.0 * m * dm + dm * dm);
    } else if (reg_.kind == RegularizationKind::None && den == cplx{}) {
      throw PoleError("propagator pole hit without regularization");
    }
    return den;
  }

  void accumulate_sums(Side& d) {
    for (int s = d.s_lo; s <= d.s_hi; ++s) {
      const auto c1 = d.first(s);
      const auto c2 = d.second(kin_.n - s);
      const cplx den = denominator(d, s);
      if (reg_.kind == RegularizationKind::PulseFactor && den == cplx{}) continue;  // killed by the pulse factor
      const cplx inv = 1.0 / den;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const cplx w = c2[k] * c1[l] * inv;
          d.sum0[k][l] += w;
          d.sum1[k][l] += static_cast<double>(s) * w;
        }
    }
  }

  Prepared prepare(Channel ch, const CFourVector& eps_first, const CFourVector& eps_second) const {
    const auto& d = side(ch);
    Prepared p;
    if (d.empty) return p;
    p.first = vertex_matrices(laser_, eps_first, kp_i_, d.kp);
    p.second = vertex_matrices(laser_, eps_second, d.kp, kp_f_);
    return p;
  }

  cplx contract(Channel ch, const Prepared& p, const BiSpinor& u, const AdjointSpinor& ub) const {
    const auto& d = side(ch);
    if (d.empty) return {};
    const DiracMatrix ks = slash(kin_.kappa, kRep);
    std::array<BiSpinor, 3> v0, v1;
    for (int l = 0; l < 3; ++l) {
      const BiSpinor f = p.first[l] * u;
      v0[l] = d.numerator0 * f;
      v1[l] = ks * f;
    }
    cplx total{};
    for (int k = 0; k < 3; ++k) {
      const AdjointSpinor w = ub * p.second[k];
      for (int l = 0; l < 3; ++l) total += d.sum0[k][l] * (w * v0[l]) + d.sum1[k][l] * (w * v1[l]);
    }
    return total;
  }

  cplx side_amplitude(Channel ch, const CFourVector& eps_first, const CFourVector& eps_second,
                      const BiSpinor& u, const AdjointSpinor& ub) const {
    return contract(ch, prepare(ch, eps_first, eps_second), u, ub);
  }

  LaserConfig laser_;
  ChannelKinematics kin_;
  Regularization reg_;
  double kp_i_ = 0.0, kp_f_ = 0.0;
  Side b_, c_;
};

struct ReducedAmplitude {
  cplx value;
  int n = 0;
  cplx channel_b, channel_c;
};

/// Reduced amplitude for a fully specified configuration.  Throws when the
/// channel is kinematically closed.
inline ReducedAmplitude reduced_amplitude(const ScatterConfig& cfg, const TruncationOptions& opt = {}) {
  const auto kin = make_channel(cfg.laser, cfg.electron, cfg.n, cfg.omega_b, cfg.dir_b, cfg.dir_c);
  if (!kin) throw std::domain_error("reduced_amplitude: channel closed");
  NonperturbativeChannel ch(cfg.laser, *kin, cfg.reg, opt);
  ReducedAmplitude r;
  r.n = cfg.n;
  r.channel_b = ch.channel_amplitude(Channel::B, cfg.eps_b, cfg.eps_c, cfg.r_i, cfg.r_f);
  r.channel_c = ch.channel_amplitude(Channel::C, cfg.eps_b, cfg.eps_c, cfg.r_i, cfg.r_f);
  r.value = r.channel_b + r.channel_c;
  return r;
}

// ---------------------------------------------------------------------------
// Direct per-s evaluation.  Builds every current matrix explicitly from
// individually evaluated Bessel functions; used as a reference for the
// factorized evaluator above.

namespace detail {

struct DirectContext {
  ChannelKinematics kin;
  FourVector base;  // q_i - k for the selected channel
  CFourVector eps_first, eps_second;
};

inline DirectContext direct_context(const ScatterConfig& cfg, Channel ch) {
  const auto kin = make_channel(cfg.laser, cfg.electron, cfg.n, cfg.omega_b, cfg.dir_b, cfg.dir_c);
  if (!kin) throw std::domain_error("channel closed");
  DirectContext c{*kin, {}, {}, {}};
  c.base = kin->q_i - (ch == Channel::B ? kin->k_b : kin->k_c);
  c.eps_first = ch == Channel::B ? cfg.eps_b : cfg.eps_c;
  c.eps_second = ch == Channel::B ? cfg.eps_c : cfg.eps_b;
  return c;
}

// Linear-polarization vertex current with l absorbed laser photons.
inline DiracMatrix linear_current(const LaserConfig& laser, const CFourVector& eps, const FourVector& p_in,
                                  const FourVector& p_out, int l, Representation rep) {
  const FourVector kappa = laser.kappa();
  const auto v = vertex_matrices(laser, eps, dot(kappa, p_in), dot(kappa, p_out), rep);
  const VertexArgs va = vertex_args(laser, p_in, p_out);
  DiracMatrix r;
  for (int k = 0; k < 3; ++k) r += gen_bessel_a({k, l, va.alpha, va.beta}) * v[k];
  return r;
}

// Circular-polarization vertex current with l absorbed laser photons.
inline DiracMatrix circular_current(const LaserConfig& laser, const CFourVector& eps, const FourVector& p_in,
                                    const FourVector& p_out, int l, Representation rep) {
  const FourVector kappa = laser.kappa();
  const auto v = vertex_matrices(laser, eps, dot(kappa, p_in), dot(kappa, p_out), rep);
  const VertexArgs va = vertex_args(laser, p_in, p_out);
  const auto term = [&](int order) { return bessel_j(order, va.alpha_bar) * std::polar(1.0, order * va.phi); };
  return term(-l) * v[0] + (term(-l - 1) + term(-l + 1)) * v[1] + (term(-l - 1) - term(-l + 1)) * v[2];
}

}  // namespace detail

/// First-vertex current F^s (linear laser): s laser photons absorbed before
/// emitting the channel's first photon.
inline DiracMatrix current_f(const ScatterConfig& cfg, int s, Channel ch = Channel::B,
                             Representation rep = Representation::Dirac) {
  if (cfg.laser.polarization != LaserPolarization::Linear)
    throw std::invalid_argument("current_f: linear laser polarization required");
  const auto c = detail::direct_context(cfg, ch);
  return detail::linear_current(cfg.laser, c.eps_first, c.kin.q_i, c.base + static_cast<double>(s) * c.kin.kappa, s,
                              rep);
}

/// Second-vertex current M^{s-n} (linear laser).
inline DiracMatrix current_m(const ScatterConfig& cfg, int s, Channel ch = Channel::B,
                             Representation rep = Representation::Dirac) {
  if (cfg.laser.polarization != LaserPolarization::Linear)
    throw std::invalid_argument("current_m: linear laser polarization required");
  const auto c = detail::direct_context(cfg, ch);
  return detail::linear_current(cfg.laser, c.eps_second, c.base + static_cast<double>(s) * c.kin.kappa, c.kin.q_f,
                                cfg.n - s, rep);
}

/// (N^{s-n}, G^s) currents for circular laser polarization.
inline std::pair<DiracMatrix, DiracMatrix> current_n_g_circular(const ScatterConfig& cfg, int s,
                                                                Channel ch = Channel::B,
                                                                Representation rep = Representation::Dirac) {
  if (cfg.laser.polarization != LaserPolarization::Circular)
    throw std::invalid_argument("current_n_g_circular: circular laser polarization required");
  const auto c = detail::direct_context(cfg, ch);
  const FourVector p = c.base + static_cast<double>(s) * c.kin.kappa;
  return {detail::circular_current(cfg.laser, c.eps_second, p, c.kin.q_f, cfg.n - s, rep),
          detail::circular_current(cfg.laser, c.eps_first, c.kin.q_i, p, s, rep)};
}

/// Reduced amplitude summed over s in [s_lo, s_hi] by explicit matrix
/// products, regularization None.
inline cplx reduced_amplitude_direct(const ScatterConfig& cfg, int s_lo, int s_hi,
                                     Representation rep = Representation::Dirac) {
  const double m = units::electron_mass;
  const auto kin = make_channel(cfg.laser, cfg.electron, cfg.n, cfg.omega_b, cfg.dir_b, cfg.dir_c);
  if (!kin) throw std::domain_error("channel closed");
  const BiSpinor u = free_spinor(kin->p_i, cfg.r_i, m, rep);
  const AdjointSpinor ub = bar(free_spinor(kin->p_f, cfg.r_f, m, rep), rep);
  const double ms2 = effective_mass_sq(cfg.laser);
  cplx total{};
  for (Channel ch : {Channel::B, Channel::C}) {
    for (int s = s_lo; s <= s_hi; ++s) {
      DiracMatrix second, first;
      if (cfg.laser.polarization == LaserPolarization::Linear) {
        second = current_m(cfg, s, ch, rep);
        first = current_f(cfg, s, ch, rep);
      } else {
        std::tie(second, first) = current_n_g_circular(cfg, s, ch, rep);
      }
      const FourVector k = ch == Channel::B ? kin->k_b : kin->k_c;
      const FourVector p = kin->q_i + static_cast<double>(s) * kin->kappa - k;
      const double kp = dot(kin->kappa, p);
      const DiracMatrix num = slash(p, rep) - (cfg.laser.xi * cfg.laser.xi * m * m / (2.0 * kp)) * slash(kin->kappa, rep) +
                              m * DiracMatrix::identity();
      const double den = dot(p, p) - ms2;
      total += sandwich(ub, second * num * first, u) / den;
    }
  }
  return total;
}

}  // namespace ldcs
