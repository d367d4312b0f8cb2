#pragma once

// Moment map between the population spectrum H and the limiting spectrum F
// of (1/n) Y Y* T:
//
//   nu_k = sum_{w=1}^{k} y^{k-w} sum k! / (m_1! ... m_w! w!) mu_1^{m_1} ... mu_w^{m_w}
//
// with the inner sum over nonnegative (m_1..m_w), sum m_i = k-w+1,
// sum i*m_i = k. Coefficients are exact 64-bit integers (k <= 20).

#include <cmath>
#include <cstdint>
#include <vector>

#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"

namespace rmtdetect {

inline constexpr int kMaxMomentOrder = 20;  // 20! is the largest factorial in uint64

template <typename Real = double>
struct MomentSequence {
  std::vector<Real> values;  // values[k-1] is the k-th moment

  int order() const { return static_cast<int>(values.size()); }
  Real moment(int k) const { return values[static_cast<std::size_t>(k - 1)]; }
};

struct MomentTerm {
  int w;
  std::uint64_t coefficient;
  std::vector<int> exponents;  // m_1..m_w
};

namespace detail {

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

inline void enumerate_tuples(int i, int remaining_count, int remaining_weight, std::vector<int>& m,
                             std::vector<std::vector<int>>& out) {
  if (i == 1) {
    if (remaining_count == remaining_weight) {
      m[0] = remaining_count;
      out.push_back(m);
    }
    return;
  }
  const int cap = std::min(remaining_count, remaining_weight / i);
  for (int mi = 0; mi <= cap; ++mi) {
    m[static_cast<std::size_t>(i - 1)] = mi;
    enumerate_tuples(i - 1, remaining_count - mi, remaining_weight - i * mi, m, out);
  }
  m[static_cast<std::size_t>(i - 1)] = 0;
}

}  // namespace detail

/// All (w, coefficient, m-tuple) terms contributing to nu_k.
inline std::vector<MomentTerm> moment_terms(int k) {
  if (k < 1 || k > kMaxMomentOrder) throw DomainError("moment_terms: order out of range [1, 20]");
  std::vector<MomentTerm> terms;
  const std::uint64_t kfact = detail::factorial(k);
  for (int w = 1; w <= k; ++w) {
    std::vector<std::vector<int>> tuples;
    std::vector<int> m(static_cast<std::size_t>(w), 0);
    detail::enumerate_tuples(w, k - w + 1, k, m, tuples);
    for (auto& t : tuples) {
      std::uint64_t denom = detail::factorial(w);
      for (int mi : t) denom *= detail::factorial(mi);
      terms.push_back({w, kfact / denom, std::move(t)});
    }
  }
  return terms;
}

struct MomentOptions {
  int max_order = kMaxMomentOrder;
};

namespace detail {

template <typename Real>
Real term_value(const MomentTerm& t, const std::vector<Real>& mu, Real y, int k) {
  Real v = static_cast<Real>(t.coefficient);
  v *= std::pow(y, k - t.w);
  for (std::size_t i = 0; i < t.exponents.size(); ++i)
    if (t.exponents[i] > 0) v *= std::pow(mu[i], t.exponents[i]);
  return v;
}

inline void check_order(int order, const MomentOptions& opt) {
  if (opt.max_order > kMaxMomentOrder)
    throw DomainError("moment options: max_order above the exact-arithmetic limit of 20");
  if (order < 1) throw DomainError("moment sequence must have order >= 1");
  if (order > opt.max_order) throw DomainError("moment order exceeds configured cap");
}

}  // namespace detail

/// Limiting moments nu_1..nu_K of F from population moments mu_1..mu_K.
template <typename Real>
MomentSequence<Real> nu_from_mu(const MomentSequence<Real>& mu, Real y, MomentOptions opt = {}) {
  detail::check_order(mu.order(), opt);
  if (y < 0) throw DomainError("nu_from_mu: y must be >= 0");
  MomentSequence<Real> nu{std::vector<Real>(mu.values.size(), Real(0))};
  for (int k = 1; k <= mu.order(); ++k) {
    Real s = 0;
    for (const auto& t : moment_terms(k)) s += detail::term_value(t, mu.values, y, k);
    nu.values[static_cast<std::size_t>(k - 1)] = s;
  }
  return nu;
}

/// Inverse map. mu_k enters nu_k only through the w = k term (coefficient 1),
/// so the system is unit lower-triangular and solved by forward substitution.
template <typename Real>
MomentSequence<Real> mu_from_nu(const MomentSequence<Real>& nu, Real y, MomentOptions opt = {}) {
  detail::check_order(nu.order(), opt);
  if (y < 0) throw DomainError("mu_from_nu: y must be >= 0");
  MomentSequence<Real> mu{std::vector<Real>(nu.values.size(), Real(0))};
  for (int k = 1; k <= nu.order(); ++k) {
    Real rest = 0;
    for (const auto& t : moment_terms(k))
      if (t.w != k) rest += detail::term_value(t, mu.values, y, k);
    mu.values[static_cast<std::size_t>(k - 1)] = nu.moment(k) - rest;
  }
  return mu;
}

/// k-th entry = (1/m) sum lambda_i^k.
template <typename Real>
MomentSequence<Real> spectrum_moments(const DiscreteSpectrum<Real>& spec, int order) {
  if (spec.empty()) throw DomainError("spectrum_moments: empty spectrum");
  if (order < 1) throw DomainError("spectrum_moments: order must be >= 1");
  MomentSequence<Real> out{std::vector<Real>(static_cast<std::size_t>(order), Real(0))};
  for (Real v : spec.values()) {
    Real p = 1;
    for (int k = 0; k < order; ++k) out.values[static_cast<std::size_t>(k)] += (p *= v);
  }
  for (Real& x : out.values) x /= static_cast<Real>(spec.size());
  return out;
}

}  // namespace rmtdetect
