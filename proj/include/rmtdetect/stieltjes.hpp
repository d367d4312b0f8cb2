#pragma once

// The limiting d.f. F itself, through the Stieltjes transform A(z) of
// K = (1 - y) 1[0,inf) + y F, the unique solution with Im A > 0 of
//
//   A = 1 / (-z + y * integral x dH(x) / (1 + x A)),      Im z > 0,
//
// and the transform of F, B(z) = (A(z) + (1 - y)/z) / y. The density of F
// is recovered as lim Im B(x + i eta) / pi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"
#include "rmtdetect/model.hpp"
#include "rmtdetect/quadrature.hpp"
#include "rmtdetect/support.hpp"

namespace rmtdetect {

/// Marchenko-Pastur density (pure noise). The atom 1 - 1/y at 0 for y > 1 is
/// not part of the density.
template <typename Real>
Real mp_density(Real x, Real y, Real sigma2) {
  if (!(y > 0) || !(sigma2 > 0)) throw DomainError("mp_density: need y > 0 and sigma2 > 0");
  const Real sy = std::sqrt(y);
  const Real lo = sigma2 * (1 - sy) * (1 - sy);
  const Real hi = sigma2 * (1 + sy) * (1 + sy);
  if (!(x > lo && x < hi)) return 0;
  return std::sqrt((x - lo) * (hi - x)) / (2 * std::numbers::pi_v<Real> * sigma2 * y * x);
}

template <typename Real = double>
struct StieltjesSolution {
  std::complex<Real> z;
  std::complex<Real> a_value;  // transform of K
  Real residual;               // |A (-z + y S(A)) - 1|
  int iterations;

  /// Transform of F.
  std::complex<Real> b_value(Real y) const { return (a_value + (1 - y) / z) / y; }
};

struct StieltjesOptions {
  double tolerance = 1e-12;
  int max_iterations = 5000;
  double damping = 0.5;
};

namespace detail {

template <typename Real>
class StieltjesEquation {
 public:
  StieltjesEquation(Real y, const NoiseSignalModel<Real>& model) : y_(y), atoms_(model.population_atoms()) {}

  using C = std::complex<Real>;

  // S(a) and S'(a) for S(a) = sum h x / (1 + x a).
  std::pair<C, C> s_terms(C a) const {
    C s{0}, ds{0};
    for (const auto& at : atoms_) {
      const C d = Real(1) + at.location * a;
      s += at.mass * at.location / d;
      ds -= at.mass * at.location * at.location / (d * d);
    }
    return {s, ds};
  }

  Real residual(C z, C a) const { return std::abs(a * (-z + y_ * s_terms(a).first) - Real(1)); }

  C fixed_point_map(C z, C a) const { return Real(1) / (-z + y_ * s_terms(a).first); }

  // Newton on phi(a) = a (-z + y S(a)) - 1. Returns false if it does not
  // converge to the upper half-plane.
  bool newton(C z, C& a, Real tol, int max_iter, int& iterations) const {
    C cur = a;
    int polish = 0;
    for (int it = 0; it < max_iter; ++it) {
      auto [s, ds] = s_terms(cur);
      const C phi = cur * (-z + y_ * s) - Real(1);
      ++iterations;
      // Two extra steps once within tolerance push the residual to rounding level.
      if (std::abs(phi) <= tol && cur.imag() > 0 && (++polish > 2 || phi == C(0))) {
        a = cur;
        return true;
      }
      const C dphi = (-z + y_ * s) + cur * y_ * ds;
      if (dphi == C(0)) return false;
      C next = cur - phi / dphi;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) return false;
      cur = next;
    }
    if (residual(z, cur) <= tol && cur.imag() > 0) {
      a = cur;
      return true;
    }
    return false;
  }

  Real scale() const {
    Real m = 0;
    for (const auto& at : atoms_) m = std::max(m, at.location);
    return m * (1 + std::sqrt(y_)) * (1 + std::sqrt(y_));
  }

 private:
  Real y_;
  std::vector<Atom<Real>> atoms_;
};

}  // namespace detail

/// Solve for A(z), Im z > 0.
///
/// With a guess, Newton is tried first. Otherwise (or if that fails) the
/// solve starts far from the real axis, where the damped fixed-point
/// iteration contracts quickly, and tracks the Herglotz branch down to
/// Im z by continuation in eta with Newton correction steps.
template <typename Real>
StieltjesSolution<Real> solve_stieltjes(std::complex<Real> z, Real y, const NoiseSignalModel<Real>& model,
                                        StieltjesOptions opt = {},
                                        std::optional<std::complex<Real>> guess = std::nullopt) {
  using C = std::complex<Real>;
  if (!(z.imag() > 0)) throw DomainError("solve_stieltjes: Im z must be > 0");
  if (!(y > 0)) throw DomainError("solve_stieltjes: y must be > 0");
  const detail::StieltjesEquation<Real> eq(y, model);
  const Real tol = static_cast<Real>(opt.tolerance);
  int iterations = 0;

  if (guess && guess->imag() > 0) {
    C a = *guess;
    if (eq.newton(z, a, tol, 60, iterations)) return {z, a, eq.residual(z, a), iterations};
  }

  const Real x = z.real();
  const Real eta = z.imag();
  Real eta_k = std::max(eta, 4 * (std::abs(x) + eq.scale()));
  C zk{x, eta_k};
  C a = Real(-1) / zk;

  // Damped fixed point at large eta.
  Real damping = 1;
  Real prev = eq.residual(zk, a);
  for (int it = 0; it < 500 && prev > Real(1e-6); ++it) {
    a = (1 - damping) * a + damping * eq.fixed_point_map(zk, a);
    ++iterations;
    const Real r = eq.residual(zk, a);
    if (r > prev) damping = static_cast<Real>(opt.damping);
    prev = r;
  }
  if (!eq.newton(zk, a, tol, 60, iterations)) {
    std::ostringstream os;
    os << "solve_stieltjes: start-up solve failed at z=" << zk << ", last iterate " << a
       << ", residual " << eq.residual(zk, a);
    throw NumericError(os.str());
  }

  Real ratio = Real(0.1);
  while (eta_k > eta) {
    if (iterations > opt.max_iterations || ratio > Real(0.9999)) {
      std::ostringstream os;
      os << "solve_stieltjes: continuation stalled at eta=" << eta_k << " (target " << eta
         << "), z=" << z << ", last iterate " << a << ", residual " << eq.residual(zk, a)
         << ", iterations " << iterations;
      throw NumericError(os.str());
    }
    const Real eta_next = std::max(eta, eta_k * ratio);
    const C z_next{x, eta_next};
    C trial = a;
    if (eq.newton(z_next, trial, tol, 40, iterations)) {
      a = trial;
      eta_k = eta_next;
      zk = z_next;
      ratio = std::max(Real(0.01), ratio * ratio);
    } else {
      ratio = std::sqrt(ratio);
    }
  }
  return {z, a, eq.residual(z, a), iterations};
}

namespace detail {

template <typename Real>
Real density_from_solution(const StieltjesSolution<Real>& s, Real y) {
  return s.b_value(y).imag() / std::numbers::pi_v<Real>;
}

}  // namespace detail

/// Smoothing width used for density inversion over a support piece of
/// width `width`.
template <typename Real>
Real default_eta(Real width) {
  return std::max(Real(1e-7), Real(1e-3) * width / Real(512));
}

/// F'(x) from Im B(x + i eta)/pi with one Richardson step over (eta, eta/2).
template <typename Real>
Real limiting_density(Real x, Real y, const NoiseSignalModel<Real>& model, Real eta,
                      std::optional<std::complex<Real>>* warm = nullptr) {
  if (!(x > 0)) throw DomainError("limiting_density: x must be > 0");
  if (!(eta > 0)) throw DomainError("limiting_density: eta must be > 0");
  std::optional<std::complex<Real>> guess = warm ? *warm : std::nullopt;
  const auto s1 = solve_stieltjes(std::complex<Real>{x, eta}, y, model, {}, guess);
  const auto s2 = solve_stieltjes(std::complex<Real>{x, eta / 2}, y, model, {},
                                  std::optional<std::complex<Real>>{s1.a_value});
  if (warm) *warm = s2.a_value;
  const Real d = 2 * detail::density_from_solution(s2, y) - detail::density_from_solution(s1, y);
  return std::max(Real(0), d);
}

/// Density along a grid with warm-start continuation from point to point.
template <typename Real>
std::vector<Real> density_curve(const std::vector<Real>& xs, Real y, const NoiseSignalModel<Real>& model,
                                Real eta) {
  std::vector<Real> out;
  out.reserve(xs.size());
  std::optional<std::complex<Real>> warm;
  for (Real x : xs) out.push_back(limiting_density(x, y, model, eta, &warm));
  return out;
}

struct MassOptions {
  double tolerance = 1e-10;
  std::optional<double> eta;  // defaults to default_eta(component width)
};

namespace detail {

// Integral of F' over [lo, hi], a subset of one support component, with the
// substitution x = lo + (hi - lo)(1 - cos t)/2 that smooths square-root edges.
template <typename Real>
Real component_integral(Real lo, Real hi, Real y, const NoiseSignalModel<Real>& model, Real eta,
                        Real tol) {
  const Real half = (hi - lo) / 2;
  auto integrand = [&](Real t) {
    const Real x = lo + half * (1 - std::cos(t));
    if (!(x > 0)) return Real(0);
    return limiting_density(x, y, model, std::min(eta, Real(1e-3) * x)) * half * std::sin(t);
  };
  return integrate(integrand, Real(0), std::numbers::pi_v<Real>, tol, 24);
}

}  // namespace detail

/// Mass of F on [lo, hi] (excluding any atom at 0), by quadrature of the
/// density split at the support endpoints.
template <typename Real>
Real interval_mass(Real lo, Real hi, Real y, const NoiseSignalModel<Real>& model, MassOptions opt = {}) {
  if (!(lo >= 0 && hi > lo)) throw DomainError("interval_mass: need 0 <= lo < hi");
  const auto layout = find_support_layout(y, model);
  Real total = 0;
  for (const auto& iv : layout.intervals) {
    const Real a = std::max(lo, iv.lo);
    const Real b = std::min(hi, iv.hi);
    if (!(b > a)) continue;
    const Real eta = opt.eta ? static_cast<Real>(*opt.eta) : default_eta(iv.hi - iv.lo);
    total += detail::component_integral(a, b, y, model, eta, static_cast<Real>(opt.tolerance));
  }
  return total;
}

template <typename Real = double>
struct LimitingCdf {
  StepDF<Real> cdf;
  SupportLayout<Real> layout;
  // Largest |numeric component mass - exact component mass| before the
  // continuous part was rescaled to the exact masses.
  Real max_mass_defect;
};

/// F as a StepDF: atom at 0 (y > 1) plus the cdf sampled on `points_per_interval`
/// Chebyshev-spaced nodes per support component.
template <typename Real>
LimitingCdf<Real> limiting_cdf(Real y, const NoiseSignalModel<Real>& model, int points_per_interval = 200) {
  if (points_per_interval < 2) throw DomainError("limiting_cdf: need at least 2 points per interval");
  auto layout = find_support_layout(y, model);
  SampledCdf<Real> cont;
  Real offset = 0;
  Real defect = 0;
  for (const auto& iv : layout.intervals) {
    const Real eta = default_eta(iv.hi - iv.lo);
    const Real half = (iv.hi - iv.lo) / 2;
    auto integrand = [&](Real t) {
      const Real x = iv.lo + half * (1 - std::cos(t));
      if (!(x > 0)) return Real(0);
      return limiting_density(x, y, model, std::min(eta, Real(1e-3) * x)) * half * std::sin(t);
    };
    std::vector<Real> xs, cum;
    Real acc = 0;
    const Real step = std::numbers::pi_v<Real> / points_per_interval;
    xs.push_back(iv.lo);
    cum.push_back(0);
    for (int i = 1; i <= points_per_interval; ++i) {
      acc += integrate_panel(integrand, step * (i - 1), step * i);
      xs.push_back(i == points_per_interval ? iv.hi : iv.lo + half * (1 - std::cos(step * i)));
      cum.push_back(acc);
    }
    defect = std::max(defect, std::abs(acc - iv.mass));
    const Real scale = acc > 0 ? iv.mass / acc : Real(0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!cont.grid.empty() && xs[i] <= cont.grid.back()) continue;
      cont.grid.push_back(xs[i]);
      cont.cdf.push_back(offset + cum[i] * scale);
    }
    offset += iv.mass;
    if (!cont.cdf.empty()) cont.cdf.back() = offset;
  }
  std::vector<Atom<Real>> atoms;
  if (layout.atom_at_zero > 0) atoms.push_back({Real(0), layout.atom_at_zero});
  return {StepDF<Real>(std::move(atoms), std::move(cont)), std::move(layout), defect};
}

}  // namespace rmtdetect
