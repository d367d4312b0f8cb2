#pragma once

// Empirical and limiting distribution functions.
//
// A StepDF is a mixed distribution: a set of atoms plus an optional
// continuous part stored as cumulative mass sampled on a grid and linearly
// interpolated between samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rmtdetect/errors.hpp"

namespace rmtdetect {

/// Sorted nonnegative eigenvalue list (with repetitions).
///
/// Tiny negative values produced by floating point eigensolvers (within
/// `negative_tolerance` relative to the largest magnitude) are clamped to 0;
/// anything more negative is rejected.
template <typename Real = double>
class DiscreteSpectrum {
 public:
  DiscreteSpectrum() = default;

  explicit DiscreteSpectrum(std::vector<Real> values, Real negative_tolerance = Real(1e-9))
      : values_(std::move(values)) {
    Real scale = 0;
    for (Real v : values_) {
      if (std::isnan(v)) throw DomainError("DiscreteSpectrum: NaN eigenvalue");
      scale = std::max(scale, std::abs(v));
    }
    for (Real& v : values_) {
      if (v < 0) {
        if (-v > negative_tolerance * std::max(scale, Real(1)))
          throw DomainError("DiscreteSpectrum: negative eigenvalue");
        v = 0;
      }
    }
    std::sort(values_.begin(), values_.end());
  }

  std::span<const Real> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  Real operator[](std::size_t i) const { return values_[i]; }
  Real min() const { return values_.front(); }
  Real max() const { return values_.back(); }

  DiscreteSpectrum scaled(Real c) const {
    std::vector<Real> v(values_);
    for (Real& x : v) x *= c;
    return DiscreteSpectrum(std::move(v));
  }

 private:
  std::vector<Real> values_;
};

template <typename Real = double>
struct Atom {
  Real location;
  Real mass;
};

/// Continuous part of a d.f.: cumulative continuous mass at strictly
/// increasing grid points, starting at 0.
template <typename Real = double>
struct SampledCdf {
  std::vector<Real> grid;
  std::vector<Real> cdf;
};

/// Right-continuous distribution function made of atoms and an optional
/// grid-sampled continuous part.
template <typename Real = double>
class StepDF {
 public:
  static constexpr double kMassTolerance = 1e-12;

  explicit StepDF(std::vector<Atom<Real>> atoms,
                  std::optional<SampledCdf<Real>> continuous = std::nullopt)
      : continuous_(std::move(continuous)) {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom<Real>& a, const Atom<Real>& b) { return a.location < b.location; });
    for (const auto& a : atoms) {
      if (!(a.mass >= 0)) throw DomainError("StepDF: negative atom mass");
      if (a.mass == 0) continue;
      if (!atoms_.empty() && atoms_.back().location == a.location)
        atoms_.back().mass += a.mass;
      else
        atoms_.push_back(a);
    }
    cumulative_.reserve(atoms_.size());
    Real acc = 0;
    for (const auto& a : atoms_) cumulative_.push_back(acc += a.mass);

    if (continuous_) {
      const auto& c = *continuous_;
      if (c.grid.size() != c.cdf.size() || c.grid.size() < 2)
        throw DomainError("StepDF: continuous part needs matching grid/cdf of length >= 2");
      if (std::abs(c.cdf.front()) > Real(kMassTolerance))
        throw DomainError("StepDF: continuous cdf must start at 0");
      for (std::size_t i = 1; i < c.grid.size(); ++i) {
        if (!(c.grid[i] > c.grid[i - 1])) throw DomainError("StepDF: grid not strictly increasing");
        if (c.cdf[i] < c.cdf[i - 1]) throw DomainError("StepDF: cdf samples decreasing");
      }
      if (c.cdf.back() > Real(1) + Real(kMassTolerance))
        throw DomainError("StepDF: cdf samples exceed 1");
    }
    if (std::abs(total_mass() - Real(1)) > Real(kMassTolerance))
      throw DomainError("StepDF: total mass differs from 1");
  }

  Real operator()(Real x) const { return atom_mass_upto(x, false) + continuous_at(x); }
  Real left_limit(Real x) const { return atom_mass_upto(x, true) + continuous_at(x); }

  Real total_mass() const {
    Real m = cumulative_.empty() ? Real(0) : cumulative_.back();
    if (continuous_) m += continuous_->cdf.back();
    return m;
  }

  const std::vector<Atom<Real>>& atoms() const { return atoms_; }
  const std::optional<SampledCdf<Real>>& continuous() const { return continuous_; }

  /// Atom locations and grid points, sorted and deduplicated.
  std::vector<Real> breakpoints() const {
    std::vector<Real> pts;
    for (const auto& a : atoms_) pts.push_back(a.location);
    if (continuous_) pts.insert(pts.end(), continuous_->grid.begin(), continuous_->grid.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  /// Largest cdf increment between adjacent grid samples (0 for pure step
  /// functions). Bounds the error of the linear interpolation.
  Real max_grid_increment() const {
    Real m = 0;
    if (continuous_)
      for (std::size_t i = 1; i < continuous_->cdf.size(); ++i)
        m = std::max(m, continuous_->cdf[i] - continuous_->cdf[i - 1]);
    return m;
  }

 private:
  Real atom_mass_upto(Real x, bool strict) const {
    auto it = strict ? std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                        [](const Atom<Real>& a, Real v) { return a.location < v; })
                     : std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                        [](Real v, const Atom<Real>& a) { return v < a.location; });
    const auto k = static_cast<std::size_t>(it - atoms_.begin());
    return k == 0 ? Real(0) : cumulative_[k - 1];
  }

  Real continuous_at(Real x) const {
    if (!continuous_) return 0;
    const auto& g = continuous_->grid;
    const auto& c = continuous_->cdf;
    if (x <= g.front()) return c.front();
    if (x >= g.back()) return c.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
    const auto lo = hi - 1;
    const Real t = (x - g[lo]) / (g[hi] - g[lo]);
    return c[lo] + t * (c[hi] - c[lo]);
  }

  std::vector<Atom<Real>> atoms_;
  std::vector<Real> cumulative_;
  std::optional<SampledCdf<Real>> continuous_;
};

/// Empirical d.f.: mass 1/m at each of the m eigenvalues.
template <typename Real>
StepDF<Real> empirical_df(const DiscreteSpectrum<Real>& spec) {
  if (spec.empty()) throw DomainError("empirical_df: empty spectrum");
  const auto m = spec.size();
  std::vector<Atom<Real>> atoms;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && spec[j] == spec[i]) ++j;
    atoms.push_back({spec[i], Real(j - i) / Real(m)});
    i = j;
  }
  return StepDF<Real>(std::move(atoms));
}

template <typename Real = double>
struct KolmogorovDistance {
  Real distance;
  // Max grid increment of either continuous part: the distance to the
  // underlying (un-interpolated) curves can differ by at most this much.
  Real interpolation_bound;
};

/// Kolmogorov (sup) distance with the interpolation error bound.
///
/// Between consecutive breakpoints both functions are constant or linear, so
/// the supremum is attained at a breakpoint value or left limit. The result is
/// exact for the represented functions.
template <typename Real>
KolmogorovDistance<Real> sup_distance_report(const StepDF<Real>& a, const StepDF<Real>& b) {
  std::vector<Real> pts = a.breakpoints();
  const auto pb = b.breakpoints();
  pts.insert(pts.end(), pb.begin(), pb.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  Real d = 0;
  for (Real x : pts) {
    d = std::max(d, std::abs(a(x) - b(x)));
    d = std::max(d, std::abs(a.left_limit(x) - b.left_limit(x)));
  }
  return {d, std::max(a.max_grid_increment(), b.max_grid_increment())};
}

template <typename Real>
Real sup_distance(const StepDF<Real>& a, const StepDF<Real>& b) {
  return sup_distance_report(a, b).distance;
}

template <typename Real = double>
struct Histogram {
  std::vector<Real> bin_edges;
  std::vector<std::size_t> counts;

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

/// Counts over half-open bins [e_i, e_{i+1}); the last bin is closed.
template <typename Real>
Histogram<Real> histogram(const DiscreteSpectrum<Real>& spec, std::span<const Real> edges) {
  if (edges.size() < 2) throw DomainError("histogram: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw DomainError("histogram: edges not strictly increasing");
  Histogram<Real> h{std::vector<Real>(edges.begin(), edges.end()),
                    std::vector<std::size_t>(edges.size() - 1, 0)};
  for (Real v : spec.values()) {
    if (v < edges.front() || v > edges.back())
      throw DomainError("histogram: eigenvalue outside edge range");
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    if (bin >= h.counts.size()) bin = h.counts.size() - 1;
    ++h.counts[bin];
  }
  return h;
}

}  // namespace rmtdetect
