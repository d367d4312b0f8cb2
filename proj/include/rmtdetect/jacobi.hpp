#pragma once

// Cyclic Jacobi eigenvalue iteration for complex Hermitian matrices.
// Self-contained fallback for the library eigensolver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rmtdetect/errors.hpp"

namespace rmtdetect {

template <typename Real>
std::vector<Real> jacobi_hermitian_eigenvalues(
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> a, Real tol = Real(1e-12),
    int max_sweeps = 100) {
  using C = std::complex<Real>;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("jacobi_hermitian_eigenvalues: matrix not square");
  const Real norm = a.norm();
  auto off = [&] {
    Real s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off() > tol * norm) {
    if (++sweep > max_sweeps) {
      std::ostringstream os;
      os << "jacobi_hermitian_eigenvalues: off-diagonal norm " << off() << " after " << max_sweeps
         << " sweeps";
      throw NumericError(os.str());
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Real mag = std::abs(a(p, q));
        if (mag == 0) continue;
        // Phase so that the (p, q) entry becomes real positive, then a real
        // rotation zeroing it.
        const C phase = std::conj(a(p, q)) / mag;
        a.col(q) *= phase;
        a.row(q) *= std::conj(phase);
        const Real app = a(p, p).real();
        const Real aqq = a(q, q).real();
        const Real theta = (aqq - app) / (2 * mag);
        const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const Real c = 1 / std::sqrt(t * t + 1);
        const Real s = t * c;
        const Eigen::Matrix<C, Eigen::Dynamic, 1> colp = a.col(p);
        const Eigen::Matrix<C, Eigen::Dynamic, 1> colq = a.col(q);
        a.col(p) = c * colp - s * colq;
        a.col(q) = s * colp + c * colq;
        const Eigen::Matrix<C, 1, Eigen::Dynamic> rowp = a.row(p);
        const Eigen::Matrix<C, 1, Eigen::Dynamic> rowq = a.row(q);
        a.row(p) = c * rowp - s * rowq;
        a.row(q) = s * rowp + c * rowq;
        a(p, q) = 0;
        a(q, p) = 0;
      }
    }
  }
  std::vector<Real> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace rmtdetect
