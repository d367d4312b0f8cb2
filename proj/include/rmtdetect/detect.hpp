#pragma once

// Source enumeration from an observed spectrum.

#include <cmath>
#include <limits>
#include <string_view>

#include "rmtdetect/arraysim.hpp"
#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"
#include "rmtdetect/support.hpp"

namespace rmtdetect {

enum class DetectionMethod { model_based, blind_gap };

inline std::string_view to_string(DetectionMethod m) {
  return m == DetectionMethod::model_based ? "model_based" : "blind_gap";
}

template <typename Real = double>
struct DetectionResult {
  int q_hat = 0;
  Real sigma2_hat = 0;
  int gap_index = 0;  // number of eigenvalues classified as noise
  Real gap_ratio = 1;  // lambda_{k+1} / lambda_k at the boundary
  DetectionMethod method = DetectionMethod::blind_gap;
  bool consistent = true;  // false when every eigenvalue was classified as signal
};

/// Mean of the p - q_hat smallest eigenvalues.
template <typename Real>
Real estimate_sigma2(const DiscreteSpectrum<Real>& spec, int q_hat) {
  const int p = static_cast<int>(spec.size());
  if (q_hat < 0 || q_hat >= p) throw DomainError("estimate_sigma2: need 0 <= q_hat < p");
  Real s = 0;
  for (int i = 0; i < p - q_hat; ++i) s += spec[static_cast<std::size_t>(i)];
  return s / static_cast<Real>(p - q_hat);
}

namespace detail {

template <typename Real>
Real boundary_ratio(const DiscreteSpectrum<Real>& spec, int k) {
  const int p = static_cast<int>(spec.size());
  if (k < 1 || k >= p) return std::numeric_limits<Real>::quiet_NaN();
  const Real lo = spec[static_cast<std::size_t>(k - 1)];
  const Real hi = spec[static_cast<std::size_t>(k)];
  return lo > 0 ? hi / lo : std::numeric_limits<Real>::infinity();
}

}  // namespace detail

/// Threshold at the middle of the theoretical gap (x2 + x3)/2.
template <typename Real>
DetectionResult<Real> detect_model_based(const DiscreteSpectrum<Real>& spec, const SupportLayout<Real>& layout) {
  if (spec.empty()) throw DomainError("detect_model_based: empty spectrum");
  if (!layout.split())
    throw DomainError("detect_model_based: support does not split at this y; use detect_blind");
  const int p = static_cast<int>(spec.size());
  const Real t = (layout.x2() + layout.x3()) / 2;
  int q_hat = 0;
  for (Real v : spec.values())
    if (v > t) ++q_hat;
  DetectionResult<Real> r;
  r.method = DetectionMethod::model_based;
  r.q_hat = q_hat;
  r.gap_index = p - q_hat;
  r.gap_ratio = detail::boundary_ratio(spec, r.gap_index);
  if (q_hat < p) {
    r.sigma2_hat = estimate_sigma2(spec, q_hat);
  } else {
    r.consistent = false;
    r.sigma2_hat = spec.min();
  }
  return r;
}

/// Largest relative gap lambda_{k+1}/lambda_k over k >= ceil(min_noise_fraction p);
/// ties go to the larger k (fewer signals).
template <typename Real>
DetectionResult<Real> detect_blind(const DiscreteSpectrum<Real>& spec, Real min_noise_fraction = Real(0.1)) {
  const int p = static_cast<int>(spec.size());
  if (p < 3) throw DomainError("detect_blind: need at least 3 eigenvalues");
  if (!(min_noise_fraction > 0 && min_noise_fraction < 1))
    throw DomainError("detect_blind: min_noise_fraction must lie in (0, 1)");
  DetectionResult<Real> r;
  r.method = DetectionMethod::blind_gap;
  const Real top = spec.max();
  if (top - spec.min() <= Real(1e-12) * top) {
    r.q_hat = 0;
    r.gap_index = p;
    r.gap_ratio = 1;
    r.sigma2_hat = estimate_sigma2(spec, 0);
    return r;
  }
  const int k_min = std::max(1, static_cast<int>(std::ceil(min_noise_fraction * static_cast<Real>(p))));
  const Real zero = Real(1e-12) * top;
  int best_k = p;
  Real best = Real(1);
  for (int k = k_min; k < p; ++k) {
    if (spec[static_cast<std::size_t>(k - 1)] <= zero) continue;
    const Real ratio = detail::boundary_ratio(spec, k);
    if (ratio >= best) {
      best = ratio;
      best_k = k;
    }
  }
  r.q_hat = p - best_k;
  r.gap_index = best_k;
  r.gap_ratio = best;
  r.sigma2_hat = estimate_sigma2(spec, r.q_hat);
  return r;
}

template <typename Real = double>
struct ProductBound {
  Real lhs;  // F^{AB}(alpha beta)
  Real rhs;  // F^A(alpha) + F^B(beta)
  bool holds(Real slack = Real(0)) const { return lhs <= rhs + slack; }
};

/// Both sides of F^{AB}(alpha beta) <= F^A(alpha) + F^B(beta) for Hermitian
/// nonnegative A, B of equal size. The spectrum of AB is taken from the
/// similar Hermitian matrix A^{1/2} B A^{1/2}.
template <typename Real>
ProductBound<Real> product_spectrum_bound(const CMatrix<Real>& a, const CMatrix<Real>& b, Real alpha, Real beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("product_spectrum_bound: size mismatch");
  if (!(alpha > 0 && beta > 0)) throw DomainError("product_spectrum_bound: need alpha, beta > 0");
  const auto ea = hermitian_eigenvalues(a);
  const auto eb = hermitian_eigenvalues(b);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(a);
  const CMatrix<Real> root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(Real(0)).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  CMatrix<Real> m = root * b * root;
  m = (m + m.adjoint()).eval() / Real(2);
  const auto eab = hermitian_eigenvalues(m);
  return {empirical_df(eab)(alpha * beta), empirical_df(ea)(alpha) + empirical_df(eb)(beta)};
}

}  // namespace rmtdetect
