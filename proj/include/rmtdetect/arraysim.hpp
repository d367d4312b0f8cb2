#pragma once

// Array-processing world: a uniform linear array with half-wavelength
// spacing receiving q narrow-band far-field sources,
//
//   X(t) = B V(t) + sigma W(t),   B = A C,   R = B B* + sigma^2 I,
//
// with V, W i.i.d. standardized complex Gaussian.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"
#include "rmtdetect/model.hpp"
#include "rmtdetect/random.hpp"

namespace rmtdetect {

template <typename Real = double>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

// Stream indices under the scenario seed.
inline constexpr std::uint64_t kMixingStream = 1;
inline constexpr std::uint64_t kPowerStream = 2;

/// A(k, i) = exp(-i pi (k - 1) sin(theta_i)), k = 1..p.
template <typename Real>
CMatrix<Real> steering_matrix(std::span<const Real> angles, int p) {
  if (p < 1) throw DomainError("steering_matrix: p must be >= 1");
  const auto q = static_cast<Eigen::Index>(angles.size());
  CMatrix<Real> a(p, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const Real th = angles[static_cast<std::size_t>(i)];
    if (!(std::abs(th) < std::numbers::pi_v<Real> / 2))
      throw DomainError("steering_matrix: angles must lie in (-pi/2, pi/2)");
    const Real phase = -std::numbers::pi_v<Real> * std::sin(th);
    for (Eigen::Index k = 0; k < p; ++k) a(k, i) = std::polar(Real(1), phase * static_cast<Real>(k));
  }
  return a;
}

template <typename Real = double>
struct Scenario {
  int p = 0;
  int q = 0;
  std::vector<Real> angles;  // radians
  std::vector<Real> snr_db;
  int bandwidth = 0;
  std::uint64_t seed = 0;
  Real sigma2 = 1;
  CMatrix<Real> A, C, B, R;
  CMatrix<Real> R_sqrt;  // Hermitian square root of R
  DiscreteSpectrum<Real> true_spectrum;

  NoiseSignalModel<Real> population_model(Real rel_tol = Real(1e-8)) const {
    return NoiseSignalModel<Real>::from_population_spectrum(true_spectrum, sigma2, rel_tol);
  }
};

template <typename Real>
DiscreteSpectrum<Real> hermitian_eigenvalues(const CMatrix<Real>& m);

namespace detail {

template <typename Real>
CMatrix<Real> banded_mixing_matrix(int q, int bandwidth, RandomStream& rs) {
  CMatrix<Real> c = CMatrix<Real>::Zero(q, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i)
      if (std::abs(i - j) <= bandwidth) c(i, j) = rs.standard_complex_gaussian<Real>();
  Real bound = 0;
  for (int i = 0; i < q; ++i) {
    Real s = 0;
    for (int j = 0; j < q; ++j)
      if (j != i) s += std::abs(c(i, j));
    bound = std::max(bound, s);
  }
  for (int i = 0; i < q; ++i) {
    const Real mag = std::abs(c(i, i));
    c(i, i) += mag > 0 ? c(i, i) / mag * (2 * bound) : std::complex<Real>(2 * bound);
  }
  return c;
}

}  // namespace detail

/// Scenario with a banded, diagonally dominant random mixing matrix C whose
/// rows are rescaled so that source j has power (C C*)_jj = sigma2 10^(snr_j/10).
template <typename Real>
Scenario<Real> build_scenario(int p, int q, std::span<const Real> angles, Real sigma2,
                              std::span<const Real> snr_db, int bandwidth, std::uint64_t seed) {
  if (p < 1 || q < 0 || q >= p) throw DomainError("build_scenario: need 0 <= q < p");
  if (angles.size() != static_cast<std::size_t>(q) || snr_db.size() != static_cast<std::size_t>(q))
    throw DomainError("build_scenario: angles and snr_db must have q entries");
  if (!(sigma2 > 0)) throw DomainError("build_scenario: sigma2 must be > 0");
  if (bandwidth < 0) throw DomainError("build_scenario: bandwidth must be >= 0");

  Scenario<Real> sc;
  sc.p = p;
  sc.q = q;
  sc.angles.assign(angles.begin(), angles.end());
  sc.snr_db.assign(snr_db.begin(), snr_db.end());
  sc.bandwidth = bandwidth;
  sc.seed = seed;
  sc.sigma2 = sigma2;
  sc.A = steering_matrix(angles, p);

  constexpr int kAttempts = 10;
  bool ok = q == 0;
  sc.C = CMatrix<Real>(q, q);
  for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
    auto rs = RandomStream::derive(seed, {kMixingStream, static_cast<std::uint64_t>(attempt)});
    CMatrix<Real> c = detail::banded_mixing_matrix<Real>(q, bandwidth, rs);
    Real row_norm_product = 1;
    for (int j = 0; j < q; ++j) {
      const Real target = sigma2 * std::pow(Real(10), snr_db[static_cast<std::size_t>(j)] / 10);
      const Real norm2 = c.row(j).squaredNorm();
      c.row(j) *= std::sqrt(target / norm2);
      row_norm_product *= std::sqrt(target);
    }
    // |det C| relative to Hadamard's bound.
    const Real ratio = std::abs(c.fullPivLu().determinant()) / row_norm_product;
    if (ratio > Real(1e-12)) {
      sc.C = std::move(c);
      ok = true;
    }
  }
  if (!ok) throw NumericError("build_scenario: mixing matrix singular after 10 attempts");

  sc.B = sc.A * sc.C;
  sc.R = sc.B * sc.B.adjoint();
  sc.R = (sc.R + sc.R.adjoint()).eval() / Real(2);
  sc.R.diagonal().array() += sigma2;
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(sc.R);
  sc.R_sqrt = es.eigenvectors() * es.eigenvalues().cwiseMax(Real(0)).cwiseSqrt().asDiagonal() *
              es.eigenvectors().adjoint();
  sc.true_spectrum = DiscreteSpectrum<Real>(
      std::vector<Real>(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()));
  return sc;
}

template <typename Real = double>
struct SnapshotBatch {
  CMatrix<Real> X;  // p x n
  int n = 0;
  std::uint64_t seed = 0;
};

template <typename Real>
CMatrix<Real> complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& rs) {
  CMatrix<Real> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rs.standard_complex_gaussian<Real>();
  return m;
}

/// n independent snapshots X(t) = B v + sigma w.
template <typename Real>
SnapshotBatch<Real> snapshots(const Scenario<Real>& sc, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("snapshots: n must be >= 1");
  RandomStream rs(seed);
  const CMatrix<Real> v = complex_gaussian_matrix<Real>(sc.q, n, rs);
  const CMatrix<Real> w = complex_gaussian_matrix<Real>(sc.p, n, rs);
  SnapshotBatch<Real> batch;
  batch.n = n;
  batch.seed = seed;
  batch.X = std::sqrt(sc.sigma2) * w;
  if (sc.q > 0) batch.X.noalias() += sc.B * v;
  return batch;
}

/// (1/n) X X*, Hermitian to the last bit.
template <typename Real>
CMatrix<Real> sample_covariance(const SnapshotBatch<Real>& batch) {
  if (batch.n < 1 || batch.X.cols() != batch.n) throw DomainError("sample_covariance: empty batch");
  CMatrix<Real> m = batch.X * batch.X.adjoint() / static_cast<Real>(batch.n);
  m = (m + m.adjoint()).eval() / Real(2);
  return m;
}

/// (1/n) Y Y* (B B* + sigma2 I) with Y p x n standardized complex Gaussian.
/// Not Hermitian, but similar to R^{1/2} (1/n) Y Y* R^{1/2}.
template <typename Real>
CMatrix<Real> sample_covariance_equiv(const Scenario<Real>& sc, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_covariance_equiv: n must be >= 1");
  RandomStream rs(seed);
  const CMatrix<Real> y = complex_gaussian_matrix<Real>(sc.p, n, rs);
  return (y * y.adjoint() / static_cast<Real>(n)) * sc.R;
}

/// Spectrum of sample_covariance_equiv(sc, n, seed), computed through the
/// Hermitian similar matrix R^{1/2} (1/n) Y Y* R^{1/2}.
template <typename Real>
DiscreteSpectrum<Real> equivalent_spectrum(const Scenario<Real>& sc, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("equivalent_spectrum: n must be >= 1");
  RandomStream rs(seed);
  const CMatrix<Real> y = complex_gaussian_matrix<Real>(sc.p, n, rs);
  CMatrix<Real> m = sc.R_sqrt * (y * y.adjoint() / static_cast<Real>(n)) * sc.R_sqrt;
  m = (m + m.adjoint()).eval() / Real(2);
  return hermitian_eigenvalues(m);
}

template <typename Real>
DiscreteSpectrum<Real> hermitian_eigenvalues(const CMatrix<Real>& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("hermitian_eigenvalues: need a square matrix");
  const Real norm = m.norm();
  if ((m - m.adjoint()).norm() > Real(1e-10) * std::max(norm, std::numeric_limits<Real>::min()))
    throw DomainError("hermitian_eigenvalues: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("hermitian_eigenvalues: eigensolver failed");
  const auto& ev = es.eigenvalues();
  return DiscreteSpectrum<Real>(std::vector<Real>(ev.data(), ev.data() + ev.size()));
}

/// Eigenvalues of a matrix known to have a real nonnegative spectrum (e.g. a
/// product of Hermitian nonnegative matrices). Imaginary parts above
/// rel_tol * ||m|| are rejected.
template <typename Real>
DiscreteSpectrum<Real> real_spectrum(const CMatrix<Real>& m, Real rel_tol = Real(1e-9)) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("real_spectrum: need a square matrix");
  Eigen::ComplexEigenSolver<CMatrix<Real>> es(m, false);
  if (es.info() != Eigen::Success) throw NumericError("real_spectrum: eigensolver failed");
  const Real norm = m.norm();
  std::vector<Real> v;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > rel_tol * norm) throw DomainError("real_spectrum: eigenvalue not real");
    v.push_back(ev.real());
  }
  return DiscreteSpectrum<Real>(std::move(v), rel_tol);
}

}  // namespace rmtdetect
