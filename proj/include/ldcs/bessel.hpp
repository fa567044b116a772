#pragma once

// Ordinary Bessel functions of integer order and the two-argument
// generalized Bessel functions
//
//   A_k(n, alpha, beta) = 1/(2 pi) int_0^{2 pi} cos^k(t) exp(i n t - i alpha sin t + i beta sin 2t) dt
//
// that appear in the Fourier expansion of linearly polarized Volkov states.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "units.hpp"

namespace ldcs {

/// J_0(x) ... J_{nmax}(x) by normalized downward (Miller) recurrence.
inline std::vector<double> bessel_j_table(int nmax, double x) {
  if (nmax < 0) throw std::invalid_argument("bessel_j_table: negative order");
  std::vector<double> out(nmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);
  const int top = std::max(nmax, static_cast<int>(std::ceil(ax)));
  int start = top + static_cast<int>(std::sqrt(160.0 * top)) + 20;
  start += start % 2;

  const double rescale = 1e-250;
  double jp1 = 0.0, j = 1e-300, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm1 = (2.0 * k / ax) * j - jp1;
    jp1 = j;
    j = jm1;
    if (std::abs(j) > 1e250) {
      j *= rescale;
      jp1 *= rescale;
      norm *= rescale;
      for (auto& v : out) v *= rescale;
    }
    if (k - 1 <= nmax) out[k - 1] = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
  }
  norm += j;  // J_0 term
  for (auto& v : out) v /= norm;
  if (x < 0.0)
    for (int n = 1; n <= nmax; n += 2) out[n] = -out[n];
  return out;
}

/// Ordinary Bessel function J_n(x) for any integer n.
inline double bessel_j(int n, double x) {
  const int an = std::abs(n);
  const double v = bessel_j_table(an, x)[an];
  return (n < 0 && (an % 2 == 1)) ? -v : v;
}

/// J_n(x) for n in [nmin, nmax], indexed from nmin.
class BesselRange {
 public:
  BesselRange() = default;
  BesselRange(int nmin, int nmax, double x) : nmin_(nmin), nmax_(nmax) {
    const int top = std::max(std::abs(nmin), std::abs(nmax));
    const auto base = bessel_j_table(top, x);
    values_.resize(nmax - nmin + 1);
    for (int n = nmin; n <= nmax; ++n) {
      const int an = std::abs(n);
      values_[n - nmin] = (n < 0 && (an % 2 == 1)) ? -base[an] : base[an];
    }
  }

  /// Zero outside the tabulated range.
  double operator()(int n) const {
    return (n < nmin_ || n > nmax_) ? 0.0 : values_[n - nmin_];
  }
  int nmin() const { return nmin_; }
  int nmax() const { return nmax_; }

 private:
  int nmin_ = 0, nmax_ = -1;
  std::vector<double> values_;
};

struct GenBesselArgs {
  int k = 0;
  int n = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

namespace detail {

inline double gen_bessel_trapezoid(const GenBesselArgs& a, int nodes) {
  double sum = 0.0;
  const double h = 2.0 * std::numbers::pi / nodes;
  for (int j = 0; j < nodes; ++j) {
    const double t = j * h;
    const double phase = a.n * t - a.alpha * std::sin(t) + a.beta * std::sin(2.0 * t);
    const double c = std::cos(t);
    const double w = a.k == 0 ? 1.0 : a.k == 1 ? c : c * c;
    sum += w * std::cos(phase);  // imaginary part cancels by t -> -t symmetry
  }
  return sum / nodes;
}

// In-place radix-2 FFT, out[s] = sum_j in[j] exp(+2 pi i j s / N).
inline void fft_inverse_unscaled(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cplx u = a[i + j];
        const cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

/// Order beyond which |J_n| and |A_k(n, ...)| fall below tail_tol, for
/// arguments bounded by alpha_max and beta_max.
///
/// The phase derivative |alpha cos t - 2 beta cos 2t| is at most
/// |alpha| + 2|beta|; past that turning point the coefficients decay like
/// an Airy tail on the scale (|alpha| + 2|beta|)^(1/3).
inline int s_cutoff(double alpha_max, double beta_max, double tail_tol = 1e-14) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("s_cutoff: tail_tol must be positive");
  const double turning = std::abs(alpha_max) + 2.0 * std::abs(beta_max);
  const double airy = std::pow(1.5 * std::log(1.0 / std::min(tail_tol, 0.5)), 2.0 / 3.0);
  const double width = 2.0 * airy * std::cbrt(std::max(turning, 1.0));
  return static_cast<int>(std::ceil(turning + width)) + 8;
}

/// A_k(n, alpha, beta) for k in {0, 1, 2} by trapezoidal quadrature with
/// node doubling until consecutive estimates agree to 1e-14.
inline double gen_bessel_a(const GenBesselArgs& a) {
  if (a.k < 0 || a.k > 2) throw std::invalid_argument("gen_bessel_a: k must be 0, 1 or 2");
  int nodes = std::max(64, static_cast<int>(8.0 * (std::abs(a.alpha) + 2.0 * std::abs(a.beta) +
                                                  std::abs(a.n))));
  double prev = detail::gen_bessel_trapezoid(a, nodes);
  for (int iter = 0; iter < 12; ++iter) {
    nodes *= 2;
    const double next = detail::gen_bessel_trapezoid(a, nodes);
    if (std::abs(next - prev) < 1e-14) return next;
    prev = next;
  }
  return prev;
}

/// A_0, A_1, A_2 over a contiguous range of orders, all from one set of
/// quadrature samples (one FFT).  Orders outside [nmin, nmax] read as zero.
class GenBesselTable {
 public:
  GenBesselTable() = default;
  GenBesselTable(int nmin, int nmax, double alpha, double beta) : nmin_(nmin), nmax_(nmax) {
    if (nmax < nmin) return;
    const int need = std::max(std::abs(nmin), std::abs(nmax));
    const int cut = s_cutoff(alpha, beta, 1e-17);
    const auto nodes = std::bit_ceil(static_cast<std::uint32_t>(std::max(64, 2 * std::max(need, cut) + 16)));
    nodes_ = static_cast<int>(nodes);

    std::vector<cplx> g0(nodes), g1(nodes), g2(nodes);
    const double h = 2.0 * std::numbers::pi / nodes;
    for (std::uint32_t j = 0; j < nodes; ++j) {
      const double t = j * h;
      const double ph = -alpha * std::sin(t) + beta * std::sin(2.0 * t);
      const cplx e(std::cos(ph), std::sin(ph));
      const double c = std::cos(t);
      g0[j] = e;
      g1[j] = c * e;
      g2[j] = c * c * e;
    }
    detail::fft_inverse_unscaled(g0);
    detail::fft_inverse_unscaled(g1);
    detail::fft_inverse_unscaled(g2);

    const std::size_t count = nmax - nmin + 1;
    a_[0].resize(count);
    a_[1].resize(count);
    a_[2].resize(count);
    const double inv = 1.0 / nodes;
    for (int s = nmin; s <= nmax; ++s) {
      const std::size_t idx = static_cast<std::size_t>(((s % nodes_) + nodes_) % nodes_);
      a_[0][s - nmin] = g0[idx].real() * inv;
      a_[1][s - nmin] = g1[idx].real() * inv;
      a_[2][s - nmin] = g2[idx].real() * inv;
    }
  }

  double operator()(int k, int n) const {
    return (n < nmin_ || n > nmax_) ? 0.0 : a_[k][n - nmin_];
  }
  int nmin() const { return nmin_; }
  int nmax() const { return nmax_; }
  int nodes() const { return nodes_; }

 private:
  int nmin_ = 0, nmax_ = -1, nodes_ = 0;
  std::vector<double> a_[3];
};

/// (J_s^+, J_s^-) for the circular-polarization Volkov expansion.
inline std::pair<cplx, cplx> j_plus_minus(int s, double alpha, double phi) {
  const cplx lo = bessel_j(s - 1, alpha) * std::polar(1.0, (s - 1) * phi);
  const cplx hi = bessel_j(s + 1, alpha) * std::polar(1.0, (s + 1) * phi);
  const cplx i{0.0, 1.0};
  return {0.5 * (lo + hi), (lo - hi) / (2.0 * i)};
}

}  // namespace ldcs
