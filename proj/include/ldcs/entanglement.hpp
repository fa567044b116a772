#pragma once

// Polarization density matrix of the emitted photon pair and its Wootters
// concurrence.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "amplitude.hpp"
#include "observables.hpp"
#include "perturbative.hpp"

namespace ldcs {

using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

enum class PolarizationBasisKind { Cartesian, Helicity };
enum class Theory { Nonperturbative, Perturbative };

/// Thrown when every amplitude vanishes and rho cannot be normalized.
class UndefinedDensityMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConcurrenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (eps1 + i eps2)/sqrt2 and (eps1 - i eps2)/sqrt2 in the photon's own basis.
inline std::array<CFourVector, 2> helicity_pair(const PhotonDirection& d) {
  const auto b = polarization_basis(d);
  const double r = 1.0 / std::sqrt(2.0);
  const CFourVector e1 = to_complex(b.eps1), e2 = to_complex(b.eps2);
  const cplx i{0.0, 1.0};
  return {r * (e1 + i * e2), r * (e1 - i * e2)};
}

inline std::array<CFourVector, 2> basis_pair(const PhotonDirection& d, PolarizationBasisKind k) {
  return k == PolarizationBasisKind::Cartesian ? detail::cartesian_pair(d) : helicity_pair(d);
}

/// Single-photon Cartesian -> helicity transform; amplitudes are linear in eps.
inline Eigen::Matrix2cd helicity_transform() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  u << cplx{r, 0.0}, cplx{0.0, r}, cplx{r, 0.0}, cplx{0.0, -r};
  return u;
}

inline Matrix4c two_photon_transform() {
  const Eigen::Matrix2cd u = helicity_transform();
  Matrix4c t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) t(2 * a + b, 2 * c + d) = u(a, c) * u(b, d);
  return t;
}

namespace detail {

// rho_{(lb lc),(lb' lc')} += w sum_spins S S*
inline void accumulate_rho(Matrix4c& rho, const AmplitudeTensor& t, double w) {
  for (int ri = 0; ri < 2; ++ri)
    for (int rf = 0; rf < 2; ++rf)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          rho(a, b) += w * t[ri][rf][a / 2][a % 2] * std::conj(t[ri][rf][b / 2][b % 2]);
}

inline Matrix4c normalize_rho(Matrix4c rho) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw UndefinedDensityMatrix("density matrix: all amplitudes vanish");
  rho /= tr;
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace detail

/// Normalized two-photon polarization density matrix, electron spins traced
/// out. Distinct photon orders are different final states and add
/// incoherently with their rate weights. Basis order |11>,|12>,|21>,|22>,
/// built on the given polarization vectors of each photon.
inline Matrix4c density_matrix(const RateQuery& q, const std::array<CFourVector, 2>& eb,
                               const std::array<CFourVector, 2>& ec, Theory theory = Theory::Nonperturbative,
                               const RateOptions& opt = {}) {
  q.laser.validate();
  Matrix4c rho = Matrix4c::Zero();
  if (theory == Theory::Perturbative) {
    const auto kin = make_perturbative_channel(q.laser, q.electron, q.omega_b, q.dir_b, q.dir_c);
    if (!kin) throw UndefinedDensityMatrix("density matrix: channel closed");
    detail::accumulate_rho(rho, PerturbativeChannel(q.laser, *kin).amplitude_tensor(eb, ec), 1.0);
    return detail::normalize_rho(rho);
  }
  double sum = 0.0;
  for (int n = 1; n <= opt.n_limit; ++n) {
    const auto kin = make_channel(q.laser, q.electron, n, q.omega_b, q.dir_b, q.dir_c);
    if (!kin) {
      if (n > opt.n_max) break;
      continue;
    }
    const NonperturbativeChannel ch(q.laser, *kin, q.reg, opt.truncation);
    const double w = ch.pulse_factor() * rate_prefactor(*kin);
    if (w == 0.0) continue;
    Matrix4c part = Matrix4c::Zero();
    detail::accumulate_rho(part, ch.amplitude_tensor(eb, ec), w);
    const double tr = part.trace().real();
    rho += part;
    sum += tr;
    if (n >= opt.n_max && tr <= opt.tail_tol * sum) break;
  }
  return detail::normalize_rho(rho);
}

inline Matrix4c density_matrix(const RateQuery& q, PolarizationBasisKind basis = PolarizationBasisKind::Cartesian,
                               Theory theory = Theory::Nonperturbative, const RateOptions& opt = {}) {
  return density_matrix(q, basis_pair(q.dir_b, basis), basis_pair(q.dir_c, basis), theory, opt);
}

/// sigma_y (x) sigma_y.
inline Matrix4c spin_flip() {
  Matrix4c y = Matrix4c::Zero();
  y(0, 3) = -1.0;
  y(1, 2) = 1.0;
  y(2, 1) = 1.0;
  y(3, 0) = -1.0;
  return y;
}

struct ConcurrenceResult {
  double concurrence = 0.0;
  std::array<double, 4> zeta{};  // descending, clipped at 0
};

/// C = max(0, l1 - l2 - l3 - l4), l^2 the eigenvalues of rho Y rho* Y.
///
/// With rho = W W^dagger the l are the singular values of the symmetric
/// matrix W^T Y W, which avoids square roots of eigenvalues that are zero up
/// to roundoff (those cost ~1e-8 in C for nearly pure states).
inline ConcurrenceResult concurrence(const Matrix4c& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10 || std::abs(rho.trace() - 1.0) > 1e-10)
    throw ConcurrenceError("concurrence: rho must be Hermitian with unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho + rho.adjoint()));
  if (es.info() != Eigen::Success) throw ConcurrenceError("concurrence: eigenvalue solver failed");
  if (es.eigenvalues().minCoeff() < -1e-10) throw ConcurrenceError("concurrence: rho is not positive semidefinite");
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c w = es.eigenvectors() * root.cast<cplx>().asDiagonal();
  const Matrix4c tau = w.transpose() * spin_flip() * w;
  Eigen::JacobiSVD<Matrix4c> svd(tau);
  ConcurrenceResult r;
  std::array<double, 4> l{};
  for (int i = 0; i < 4; ++i) l[i] = svd.singularValues()(i);
  std::sort(l.begin(), l.end(), std::greater<>());
  for (int i = 0; i < 4; ++i) r.zeta[i] = l[i] * l[i];
  r.concurrence = std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
  return r;
}

/// The zeta again, through the Hermitian form sqrt(rho) rho~ sqrt(rho).
inline std::array<double, 4> concurrence_eigenvalues_hermitian(const Matrix4c& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c sq = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const Matrix4c y = spin_flip();
  const Matrix4c h = sq * (y * rho.conjugate() * y) * sq;
  Eigen::SelfAdjointEigenSolver<Matrix4c> hs(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  std::array<double, 4> z{};
  for (int i = 0; i < 4; ++i) z[i] = std::max(0.0, hs.eigenvalues()(i));
  std::sort(z.begin(), z.end(), std::greater<>());
  return z;
}

}  // namespace ldcs
