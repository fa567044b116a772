#pragma once

// Minkowski four-vectors, Dirac matrices in the standard (Dirac)
// representation, free bispinors and their bilinear contractions.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "units.hpp"

namespace ldcs {

/// Contravariant four-vector with metric diag(1,-1,-1,-1).
///
/// T is double for momenta and wave vectors, cplx for polarization vectors
/// (helicity states, circular laser polarization).  The scalar product is
/// bilinear; no complex conjugation is ever implied.
///
/// Besides t, x, y, z the vector carries its light-cone component t - z.
/// For an ultra-relativistic electron moving along +x3 that difference is
/// some 1e-6 of t and cannot be recovered from t and z; constructors that
/// know it exactly (on-shell momenta, photon directions) pass it in, and
/// linear combinations keep it.  Write to t or z only through set().
template <typename T>
struct BasicFourVector {
  T t{}, x{}, y{}, z{};
  T minus{};  // t - z

  constexpr BasicFourVector() = default;
  constexpr BasicFourVector(T t_, T x_, T y_, T z_) : t(t_), x(x_), y(y_), z(z_), minus(t_ - z_) {}
  constexpr BasicFourVector(T t_, T x_, T y_, T z_, T minus_) : t(t_), x(x_), y(y_), z(z_), minus(minus_) {}

  constexpr T plus() const { return t + z; }

  constexpr const T& operator[](int mu) const {
    return mu == 0 ? t : mu == 1 ? x : mu == 2 ? y : z;
  }
  constexpr void set(int mu, T v) {
    (mu == 0 ? t : mu == 1 ? x : mu == 2 ? y : z) = v;
    minus = t - z;
  }

  constexpr BasicFourVector& operator+=(const BasicFourVector& o) {
    t += o.t; x += o.x; y += o.y; z += o.z; minus += o.minus;
    return *this;
  }
  constexpr BasicFourVector& operator-=(const BasicFourVector& o) {
    t -= o.t; x -= o.x; y -= o.y; z -= o.z; minus -= o.minus;
    return *this;
  }
};

using FourVector = BasicFourVector<double>;
using CFourVector = BasicFourVector<cplx>;

template <typename T>
constexpr BasicFourVector<T> operator+(BasicFourVector<T> a, const BasicFourVector<T>& b) {
  return a += b;
}
template <typename T>
constexpr BasicFourVector<T> operator-(BasicFourVector<T> a, const BasicFourVector<T>& b) {
  return a -= b;
}
template <typename T>
constexpr BasicFourVector<T> operator-(const BasicFourVector<T>& a) {
  return {-a.t, -a.x, -a.y, -a.z, -a.minus};
}
template <typename T, typename S>
constexpr auto operator*(S s, const BasicFourVector<T>& a) {
  using R = decltype(s * a.t);
  return BasicFourVector<R>{s * a.t, s * a.x, s * a.y, s * a.z, s * a.minus};
}
template <typename T, typename S>
constexpr auto operator*(const BasicFourVector<T>& a, S s) {
  return s * a;
}

/// a.b in light-cone form, (a+ b- + a- b+)/2 - a_perp.b_perp.
template <typename A, typename B>
constexpr auto dot(const BasicFourVector<A>& a, const BasicFourVector<B>& b) {
  return 0.5 * (a.plus() * b.minus + a.minus * b.plus()) - a.x * b.x - a.y * b.y;
}

inline CFourVector to_complex(const FourVector& v) { return {v.t, v.x, v.y, v.z, v.minus}; }

inline CFourVector conj(const CFourVector& v) {
  return {std::conj(v.t), std::conj(v.x), std::conj(v.y), std::conj(v.z), std::conj(v.minus)};
}

/// On-shell momentum of the given mass from its spatial part, with t - z
/// taken from the mass shell rather than by subtraction.
inline FourVector on_shell(double px, double py, double pz, double mass) {
  const double perp2 = px * px + py * py;
  const double e = std::sqrt(mass * mass + perp2 + pz * pz);
  const double minus = pz > 0.0 ? (mass * mass + perp2) / (e + pz) : e - pz;
  return {e, px, py, pz, minus};
}

/// Complex 4x4 matrix acting on bispinors, row-major.
class DiracMatrix {
 public:
  constexpr DiracMatrix() = default;

  static constexpr DiracMatrix identity() {
    DiracMatrix m;
    for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }

  constexpr cplx& operator()(int r, int c) { return a_[4 * r + c]; }
  constexpr const cplx& operator()(int r, int c) const { return a_[4 * r + c]; }

  DiracMatrix& operator+=(const DiracMatrix& o) {
    for (int i = 0; i < 16; ++i) a_[i] += o.a_[i];
    return *this;
  }
  DiracMatrix& operator-=(const DiracMatrix& o) {
    for (int i = 0; i < 16; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  DiracMatrix& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend DiracMatrix operator+(DiracMatrix a, const DiracMatrix& b) { return a += b; }
  friend DiracMatrix operator-(DiracMatrix a, const DiracMatrix& b) { return a -= b; }
  friend DiracMatrix operator*(cplx s, DiracMatrix a) { return a *= s; }
  friend DiracMatrix operator*(DiracMatrix a, cplx s) { return a *= s; }
  friend DiracMatrix operator*(double s, DiracMatrix a) { return a *= cplx(s); }

  friend DiracMatrix operator*(const DiracMatrix& a, const DiracMatrix& b) {
    DiracMatrix r;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (int j = 0; j < 4; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  DiracMatrix adjoint() const {
    DiracMatrix r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::array<cplx, 16> a_{};
};

/// Column bispinor.
struct BiSpinor {
  std::array<cplx, 4> c{};

  cplx& operator[](int i) { return c[i]; }
  const cplx& operator[](int i) const { return c[i]; }
};

/// Row bispinor, e.g. the Dirac adjoint u^dagger gamma^0.
struct AdjointSpinor {
  std::array<cplx, 4> c{};

  cplx& operator[](int i) { return c[i]; }
  const cplx& operator[](int i) const { return c[i]; }
};

inline BiSpinor operator*(const DiracMatrix& m, const BiSpinor& u) {
  BiSpinor r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += m(i, j) * u[j];
  return r;
}

inline AdjointSpinor operator*(const AdjointSpinor& v, const DiracMatrix& m) {
  AdjointSpinor r;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) r[j] += v[i] * m(i, j);
  return r;
}

inline cplx operator*(const AdjointSpinor& v, const BiSpinor& u) {
  cplx s{};
  for (int i = 0; i < 4; ++i) s += v[i] * u[i];
  return s;
}

inline BiSpinor operator+(BiSpinor a, const BiSpinor& b) {
  for (int i = 0; i < 4; ++i) a[i] += b[i];
  return a;
}

inline BiSpinor operator*(cplx s, BiSpinor a) {
  for (auto& v : a.c) v *= s;
  return a;
}

/// Gamma-matrix representation.  Dirac is the reference; the chiral one
/// keeps the light-cone components of momenta as separate matrix entries,
/// which is what the amplitude evaluators use.  Spinor sandwiches agree
/// between the two.
enum class Representation { Dirac, Chiral };

namespace detail {

inline std::array<DiracMatrix, 4> make_gammas(Representation rep) {
  const cplx i{0.0, 1.0};
  std::array<DiracMatrix, 4> g;
  if (rep == Representation::Dirac) {
    // gamma^0 = diag(1, 1, -1, -1)
    g[0](0, 0) = 1.0; g[0](1, 1) = 1.0; g[0](2, 2) = -1.0; g[0](3, 3) = -1.0;
  } else {
    // gamma^0 = [[0, 1], [1, 0]]
    g[0](0, 2) = 1.0; g[0](1, 3) = 1.0; g[0](2, 0) = 1.0; g[0](3, 1) = 1.0;
  }
  // gamma^k = [[0, sigma_k], [-sigma_k, 0]] in both
  const std::array<std::array<cplx, 4>, 3> sigma{{
      {0.0, 1.0, 1.0, 0.0},  // sigma_1 row-major
      {0.0, -i, i, 0.0},     // sigma_2
      {1.0, 0.0, 0.0, -1.0}  // sigma_3
  }};
  for (int k = 0; k < 3; ++k)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        g[k + 1](r, c + 2) = sigma[k][2 * r + c];
        g[k + 1](r + 2, c) = -sigma[k][2 * r + c];
      }
  return g;
}

inline const std::array<DiracMatrix, 4>& gammas(Representation rep) {
  static const std::array<DiracMatrix, 4> dirac = make_gammas(Representation::Dirac);
  static const std::array<DiracMatrix, 4> chiral = make_gammas(Representation::Chiral);
  return rep == Representation::Dirac ? dirac : chiral;
}

}  // namespace detail

/// gamma^mu, Dirac representation unless asked otherwise.
inline const DiracMatrix& gamma(int mu, Representation rep = Representation::Dirac) {
  if (mu < 0 || mu > 3) throw std::out_of_range("gamma: index " + std::to_string(mu));
  return detail::gammas(rep)[mu];
}

/// Feynman slash: gamma^mu p_mu = p^0 gamma^0 - p^k gamma^k.
template <typename T>
DiracMatrix slash(const BasicFourVector<T>& p, Representation rep = Representation::Dirac) {
  const cplx t = p.t, x = p.x, y = p.y, z = p.z;
  const cplx i{0.0, 1.0};
  DiracMatrix m;
  if (rep == Representation::Chiral) {
    const cplx pl = p.plus(), mi = p.minus;
    // [[0, t - sigma.p], [t + sigma.p, 0]]
    m(0, 2) = mi;           m(0, 3) = -(x - i * y);
    m(1, 2) = -(x + i * y); m(1, 3) = pl;
    m(2, 0) = pl;           m(2, 1) = x - i * y;
    m(3, 0) = x + i * y;    m(3, 1) = mi;
    return m;
  }
  m(0, 0) = t;  m(1, 1) = t;  m(2, 2) = -t; m(3, 3) = -t;
  // -x gamma^1 - y gamma^2 - z gamma^3 in the off-diagonal blocks.
  // upper-right block: -(x s1 + y s2 + z s3)
  m(0, 2) = -z;           m(0, 3) = -(x - i * y);
  m(1, 2) = -(x + i * y); m(1, 3) = z;
  // lower-left block: +(x s1 + y s2 + z s3)
  m(2, 0) = z;            m(2, 1) = x - i * y;
  m(3, 0) = x + i * y;    m(3, 1) = -z;
  return m;
}

/// Dirac adjoint gamma^0 M^dagger gamma^0.
inline DiracMatrix dirac_adjoint(const DiracMatrix& m, Representation rep = Representation::Dirac) {
  const auto& g0 = gamma(0, rep);
  return g0 * m.adjoint() * g0;
}

inline AdjointSpinor bar(const BiSpinor& u, Representation rep = Representation::Dirac) {
  AdjointSpinor r;
  if (rep == Representation::Chiral) {
    r[0] = std::conj(u[2]);
    r[1] = std::conj(u[3]);
    r[2] = std::conj(u[0]);
    r[3] = std::conj(u[1]);
    return r;
  }
  r[0] = std::conj(u[0]);
  r[1] = std::conj(u[1]);
  r[2] = -std::conj(u[2]);
  r[3] = -std::conj(u[3]);
  return r;
}

/// Free positive-energy spinor u_r(p) normalized to ubar u = 1.
///
/// r = 1 has Dirac-representation upper components (1, 0), r = 2 has
/// (0, 1); for motion along +x3 these are the right- and left-handed states.
/// The chiral-representation spinor is the same state, T u with
/// T = [[1, -1], [1, 1]]/sqrt 2.  Rejects momenta whose invariant mass is
/// off the shell beyond round-off.
inline BiSpinor free_spinor(const FourVector& p, int r, double mass = units::electron_mass,
                            Representation rep = Representation::Dirac) {
  if (r != 1 && r != 2) throw std::invalid_argument("free_spinor: spin index must be 1 or 2");
  const double e = p.t;
  if (!(e > 0.0)) throw std::invalid_argument("free_spinor: non-positive energy");
  // Tolerance absorbs round-off in the kinematics of ultra-relativistic p.
  const double off_shell = std::abs(dot(p, p) - mass * mass);
  if (off_shell > 1e-6 * mass * mass + 1e-12 * e * e) {
    throw std::invalid_argument("free_spinor: momentum is off the mass shell");
  }
  const cplx chi0 = r == 1 ? 1.0 : 0.0;
  const cplx chi1 = r == 1 ? 0.0 : 1.0;
  const cplx i{0.0, 1.0};
  const cplx pt = cplx(p.x) - i * p.y, mt = cplx(p.x) + i * p.y;
  if (rep == Representation::Chiral) {
    // ((E + m - sigma.p) chi, (E + m + sigma.p) chi) / sqrt(4 m (E + m))
    const double norm = 1.0 / std::sqrt(4.0 * mass * (e + mass));
    const double lo = p.minus + mass, hi = p.plus() + mass;
    return BiSpinor{{norm * (lo * chi0 - pt * chi1), norm * (-mt * chi0 + hi * chi1),
                     norm * (hi * chi0 + pt * chi1), norm * (mt * chi0 + lo * chi1)}};
  }
  const double norm = std::sqrt((e + mass) / (2.0 * mass));
  // (sigma . p) chi
  const cplx s0 = p.z * chi0 + pt * chi1;
  const cplx s1 = mt * chi0 - p.z * chi1;
  const double inv = 1.0 / (e + mass);
  return BiSpinor{{norm * chi0, norm * chi1, norm * inv * s0, norm * inv * s1}};
}

/// ubar M u.
inline cplx sandwich(const AdjointSpinor& left, const DiracMatrix& m, const BiSpinor& right) {
  return left * (m * right);
}

}  // namespace ldcs
