#pragma once

// Support geometry of the limiting d.f. F.
//
// On the real line outside the support of K = (1 - y) 1[0,inf) + y F, the
// Stieltjes transform of K is real and increasing; its inverse is
//
//   f(a) = -1/a + y * integral dH(x) / (a + 1/x),
//
// so every maximal alpha-interval where f' > 0 maps onto a gap of the
// support. With g(a) = y * integral (a / (a + 1/x))^2 dH(x) one has
// f'(a) = (1 - g(a)) / a^2, so gaps are exactly the alpha-sets where g < 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rmtdetect/errors.hpp"
#include "rmtdetect/model.hpp"
#include "rmtdetect/roots.hpp"

namespace rmtdetect {

namespace detail {

template <typename Real>
void check_pole(Real alpha, Real x) {
  const Real d = 1 + alpha * x;
  if (std::abs(d) <= 8 * std::numeric_limits<Real>::epsilon())
    throw DomainError("alpha lies on a pole -1/x of the population spectrum");
}

}  // namespace detail

template <typename Real>
Real f_alpha(Real alpha, Real y, const NoiseSignalModel<Real>& model) {
  if (alpha == 0) throw DomainError("f_alpha: alpha = 0 is a pole");
  Real s = 0;
  for (const auto& a : model.population_atoms()) {
    detail::check_pole(alpha, a.location);
    s += a.mass * a.location / (1 + alpha * a.location);
  }
  return -1 / alpha + y * s;
}

template <typename Real>
Real g_alpha(Real alpha, Real y, const NoiseSignalModel<Real>& model) {
  Real s = 0;
  for (const auto& a : model.population_atoms()) {
    detail::check_pole(alpha, a.location);
    const Real r = alpha * a.location / (1 + alpha * a.location);
    s += a.mass * r * r;
  }
  return y * s;
}

/// g and its first two derivatives in alpha.
template <typename Real>
std::array<Real, 3> g_derivatives(Real alpha, Real y, const NoiseSignalModel<Real>& model) {
  std::array<Real, 3> out{0, 0, 0};
  for (const auto& a : model.population_atoms()) {
    const Real x = a.location;
    detail::check_pole(alpha, x);
    const Real d = 1 + alpha * x;
    const Real r = alpha * x / d;
    out[0] += a.mass * r * r;
    out[1] += a.mass * 2 * alpha * x * x / (d * d * d);
    out[2] += a.mass * 2 * x * x * (1 - 2 * alpha * x) / (d * d * d * d);
  }
  for (auto& v : out) v *= y;
  return out;
}

/// f'(alpha) through the closed form (1 - g) / alpha^2.
template <typename Real>
Real f_prime(Real alpha, Real y, const NoiseSignalModel<Real>& model) {
  if (alpha == 0) throw DomainError("f_prime: alpha = 0 is a pole");
  return (1 - g_alpha(alpha, y, model)) / (alpha * alpha);
}

template <typename Real = double>
struct SupportInterval {
  Real lo;
  Real hi;
  Real mass;
  // Stationary points of f mapping to lo and hi (NaN for lo = 0 at y = 1).
  Real alpha_lo;
  Real alpha_hi;
};

template <typename Real = double>
struct SupportLayout {
  Real y = 0;
  Real atom_at_zero = 0;
  std::vector<SupportInterval<Real>> intervals;

  bool split() const { return intervals.size() >= 2; }
  Real total_mass() const {
    Real m = atom_at_zero;
    for (const auto& i : intervals) m += i.mass;
    return m;
  }
  // Endpoints in the x1 <= x2 < x3 <= x4 convention: [x1, x2] is the
  // leftmost component, [x3, x4] the smallest interval holding the rest.
  Real x1() const { return intervals.front().lo; }
  Real x2() const { return split() ? intervals.front().hi : std::numeric_limits<Real>::quiet_NaN(); }
  Real x3() const { return split() ? intervals[1].lo : std::numeric_limits<Real>::quiet_NaN(); }
  Real x4() const { return intervals.back().hi; }
};

struct LayoutOptions {
  int grid_points = 256;
  double alpha_tolerance = 1e-12;
  double end_margin = 1e-12;  // closest relative approach of the grid to a pole
};

namespace detail {

enum class EndKind { NegInf, Pole, Zero, PosInf };

template <typename Real>
struct Piece {
  Real lo, hi;
  EndKind lo_kind, hi_kind;
};

template <typename Real>
std::vector<Real> piece_grid(const Piece<Real>& pc, Real scale, int n, Real margin) {
  std::vector<Real> g;
  const Real tmin = std::log10(margin);
  if (pc.lo_kind == EndKind::NegInf) {
    const Real s = std::abs(pc.hi);
    for (int k = 0; k < n; ++k) {
      const Real t = tmin + (-2 * tmin) * Real(k) / Real(n - 1);
      g.push_back(pc.hi - s * std::pow(Real(10), t));
    }
  } else if (pc.hi_kind == EndKind::PosInf) {
    for (int k = 0; k < n; ++k) {
      const Real t = tmin + (-2 * tmin) * Real(k) / Real(n - 1);
      g.push_back(scale * std::pow(Real(10), t));
    }
  } else {
    const Real w = pc.hi - pc.lo;
    const int half = std::max(2, n / 2);
    const Real tmax = std::log10(Real(0.5));
    for (int k = 0; k < half; ++k) {
      const Real t = tmin + (tmax - tmin) * Real(k) / Real(half - 1);
      const Real d = w * std::pow(Real(10), t);
      g.push_back(pc.lo + d);
      g.push_back(pc.hi - d);
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  g.erase(std::remove_if(g.begin(), g.end(), [&](Real a) { return !(a > pc.lo && a < pc.hi); }),
          g.end());
  return g;
}

// Poles of f and g on the negative axis, ascending: -1/sigma2 < -1/b_1 < ...
template <typename Real>
std::vector<Real> negative_poles(const NoiseSignalModel<Real>& model) {
  std::vector<Real> p;
  for (const auto& a : model.population_atoms()) p.push_back(-1 / a.location);
  std::sort(p.begin(), p.end());
  return p;
}

// Critical points of g (roots of g') inside a sorted grid.
template <typename Real>
std::vector<Real> g_critical_points(const std::vector<Real>& grid, Real y,
                                    const NoiseSignalModel<Real>& model, Real tol) {
  std::vector<Real> crit;
  auto gp = [&](Real a) {
    auto d = g_derivatives(a, y, model);
    return std::pair<Real, Real>{d[1], d[2]};
  };
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const Real d0 = g_derivatives(grid[i - 1], y, model)[1];
    const Real d1 = g_derivatives(grid[i], y, model)[1];
    if (d0 == 0) {
      crit.push_back(grid[i - 1]);
    } else if ((d0 > 0) != (d1 > 0) && d1 != 0) {
      crit.push_back(safeguarded_newton(gp, grid[i - 1], grid[i], tol).root);
    }
  }
  return crit;
}

// Roots of 1 - g (stationary points of f) in one piece.
template <typename Real>
std::vector<Real> stationary_points(const std::vector<Real>& grid, Real y,
                                    const NoiseSignalModel<Real>& model, Real tol) {
  std::vector<Real> nodes;
  nodes.push_back(grid.front());
  for (Real c : g_critical_points(grid, y, model, tol))
    if (c > nodes.back()) nodes.push_back(c);
  if (grid.back() > nodes.back()) nodes.push_back(grid.back());

  auto h = [&](Real a) {
    auto d = g_derivatives(a, y, model);
    return std::pair<Real, Real>{1 - d[0], -d[1]};
  };
  std::vector<Real> roots;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Real h0 = 1 - g_alpha(nodes[i - 1], y, model);
    const Real h1 = 1 - g_alpha(nodes[i], y, model);
    if ((h0 > 0) != (h1 > 0)) roots.push_back(safeguarded_newton(h, nodes[i - 1], nodes[i], tol).root);
  }
  return roots;
}

template <typename Real>
Real end_limit_of_f(EndKind kind, bool is_left_end) {
  constexpr Real inf = std::numeric_limits<Real>::infinity();
  switch (kind) {
    case EndKind::NegInf:
    case EndKind::PosInf:
      return 0;
    case EndKind::Zero:
      return is_left_end ? -inf : inf;
    case EndKind::Pole:
      return is_left_end ? inf : -inf;
  }
  return 0;
}

template <typename Real>
struct Gap {
  Real x_lo, x_hi;
  Real alpha_lo, alpha_hi;  // NaN when the end is a limit, not a stationary point
};

}  // namespace detail

/// Support intervals of F (and the atom at 0 when y > 1).
///
/// Masses: atom 1 - 1/y at 0 for y > 1. A non-leftmost component carries the
/// H-mass of every pole -1/x enclosed by its alpha-range (residue of the
/// contour integral); the leftmost component takes the remainder, which is
/// 1 - y1 (y < 1) or 1/y - y1 (y >= 1) when noise and signal separate.
template <typename Real>
SupportLayout<Real> find_support_layout(Real y, const NoiseSignalModel<Real>& model,
                                        LayoutOptions opt = {}) {
  using detail::EndKind;
  if (!(y > 0)) throw DomainError("find_support_layout: y must be > 0");
  const Real nan = std::numeric_limits<Real>::quiet_NaN();
  const Real tol = static_cast<Real>(opt.alpha_tolerance);
  const Real margin = static_cast<Real>(opt.end_margin);

  const auto poles = detail::negative_poles(model);
  std::vector<detail::Piece<Real>> pieces;
  pieces.push_back({-std::numeric_limits<Real>::infinity(), poles.front(), EndKind::NegInf, EndKind::Pole});
  for (std::size_t i = 1; i < poles.size(); ++i)
    pieces.push_back({poles[i - 1], poles[i], EndKind::Pole, EndKind::Pole});
  pieces.push_back({poles.back(), Real(0), EndKind::Pole, EndKind::Zero});
  pieces.push_back({Real(0), std::numeric_limits<Real>::infinity(), EndKind::Zero, EndKind::PosInf});

  std::vector<detail::Gap<Real>> gaps;
  for (const auto& pc : pieces) {
    const auto grid = detail::piece_grid(pc, 1 / model.sigma2(), opt.grid_points, margin);
    const auto roots = detail::stationary_points(grid, y, model, tol);

    // Boundaries: piece ends and stationary points; test each segment's sign.
    std::vector<Real> bounds;
    bounds.push_back(pc.lo);
    bounds.insert(bounds.end(), roots.begin(), roots.end());
    bounds.push_back(pc.hi);
    for (std::size_t s = 1; s < bounds.size(); ++s) {
      const Real a = bounds[s - 1];
      const Real b = bounds[s];
      Real probe = nan;
      for (Real gpt : grid)
        if (gpt > a && gpt < b) {
          probe = gpt;
          break;
        }
      if (std::isnan(probe)) {
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        probe = (a + b) / 2;
      }
      if (!(1 - g_alpha(probe, y, model) > 0)) continue;
      const bool left_is_root = s - 1 > 0;
      const bool right_is_root = s < bounds.size() - 1;
      detail::Gap<Real> gap;
      gap.alpha_lo = left_is_root ? a : nan;
      gap.alpha_hi = right_is_root ? b : nan;
      gap.x_lo = left_is_root ? f_alpha(a, y, model) : detail::end_limit_of_f<Real>(pc.lo_kind, true);
      gap.x_hi = right_is_root ? f_alpha(b, y, model) : detail::end_limit_of_f<Real>(pc.hi_kind, false);
      gaps.push_back(gap);
    }
  }
  std::sort(gaps.begin(), gaps.end(), [](const auto& l, const auto& r) { return l.x_lo < r.x_lo; });

  SupportLayout<Real> layout;
  layout.y = y;
  layout.atom_at_zero = y > 1 ? 1 - 1 / y : Real(0);
  Real cursor = 0;
  Real cursor_alpha = nan;
  for (const auto& gp : gaps) {
    if (gp.x_hi <= 0) continue;
    if (gp.x_lo > cursor) layout.intervals.push_back({cursor, gp.x_lo, Real(0), cursor_alpha, gp.alpha_lo});
    if (gp.x_hi > cursor) {
      cursor = gp.x_hi;
      cursor_alpha = gp.alpha_hi;
    }
  }
  if (layout.intervals.empty())
    throw NumericError("find_support_layout: no support component located");

  const auto h_atoms = model.population_atoms();
  Real rest = 0;
  for (std::size_t i = 1; i < layout.intervals.size(); ++i) {
    auto& iv = layout.intervals[i];
    Real m = 0;
    for (const auto& a : h_atoms) {
      const Real pole = -1 / a.location;
      if (pole > iv.alpha_lo && pole < iv.alpha_hi) m += a.mass;
    }
    iv.mass = m;
    rest += m;
  }
  layout.intervals.front().mass = 1 - layout.atom_at_zero - rest;
  return layout;
}

/// Limit y -> 0: F = H, so the "support" is the set of population atoms.
template <typename Real>
SupportLayout<Real> population_layout(const NoiseSignalModel<Real>& model) {
  SupportLayout<Real> layout;
  const Real nan = std::numeric_limits<Real>::quiet_NaN();
  layout.intervals.push_back({model.sigma2(), model.sigma2(), 1 - model.y1(), nan, nan});
  if (model.has_signal())
    layout.intervals.push_back({model.b_first(), model.b_last(), model.y1(), nan, nan});
  return layout;
}

template <typename Real = double>
struct SplitResult {
  bool splits;
  Real alpha_star;  // minimiser of g over (-1/sigma2, -1/b_1)
  Real g_min;
};

namespace detail {

template <typename Real>
SplitResult<Real> minimise_g_between_noise_and_signal(Real y, const NoiseSignalModel<Real>& model,
                                                      int grid_points = 256) {
  const Real lo = -1 / model.sigma2();
  const Real hi = -1 / model.b_first();
  const Piece<Real> pc{lo, hi, EndKind::Pole, EndKind::Pole};
  const auto grid = piece_grid(pc, Real(1), grid_points, Real(1e-9));
  auto crit = g_critical_points(grid, y, model, Real(1e-14));
  Real best_a = grid.front();
  Real best_g = g_alpha(best_a, y, model);
  for (Real a : grid) {
    const Real v = g_alpha(a, y, model);
    if (v < best_g) best_g = v, best_a = a;
  }
  for (Real a : crit) {
    const Real v = g_alpha(a, y, model);
    if (v <= best_g) best_g = v, best_a = a;
  }
  return {best_g < 1, best_a, best_g};
}

}  // namespace detail

/// Whether the noise component separates from the signal part: true iff
/// min g over (-1/sigma2, -1/b_1) is below 1.
template <typename Real>
SplitResult<Real> split_exists(Real y, const NoiseSignalModel<Real>& model) {
  if (!model.has_signal()) return {false, std::numeric_limits<Real>::quiet_NaN(), Real(0)};
  if (!(y > 0)) throw DomainError("split_exists: y must be > 0");
  return detail::minimise_g_between_noise_and_signal(y, model);
}

/// Largest y for which noise and signal separate. g is linear in y, so this
/// is 1 / min g(.; y = 1). +inf for a pure-noise model.
template <typename Real>
Real critical_y(const NoiseSignalModel<Real>& model) {
  if (!model.has_signal()) return std::numeric_limits<Real>::infinity();
  return 1 / detail::minimise_g_between_noise_and_signal(Real(1), model).g_min;
}

template <typename Real>
Real single_spike_split_lhs(Real y, Real y1, Real sigma2, Real b) {
  if (!(b > sigma2) || !(sigma2 > 0)) throw DomainError("single spike: need b > sigma2 > 0");
  if (!(y1 > 0 && y1 < 1)) throw DomainError("single spike: need 0 < y1 < 1");
  if (!(y > 0)) throw DomainError("single spike: need y > 0");
  const Real s = std::cbrt(b * b * y1) + std::cbrt(sigma2 * sigma2 * (1 - y1));
  return y * s * s * s / ((b - sigma2) * (b - sigma2));
}

/// Closed-form split condition for G = delta(b).
template <typename Real>
bool single_spike_split(Real y, Real y1, Real sigma2, Real b) {
  return single_spike_split_lhs(y, y1, sigma2, b) < 1;
}

template <typename Real>
Real single_spike_critical_y(Real y1, Real sigma2, Real b) {
  return 1 / single_spike_split_lhs(Real(1), y1, sigma2, b);
}

}  // namespace rmtdetect
