#pragma once

// Population spectrum H = (1 - y1) * delta(sigma2) + y1 * G, with G a finite
// mixture of atoms strictly above the noise level.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"

namespace rmtdetect {

template <typename Real = double>
struct SignalAtom {
  Real location;  // b_j
  Real weight;    // w_j, mass within G
};

template <typename Real = double>
class NoiseSignalModel {
 public:
  NoiseSignalModel(Real sigma2, Real y1, std::vector<SignalAtom<Real>> signal)
      : sigma2_(sigma2), y1_(y1), signal_(std::move(signal)) {
    if (!(sigma2_ > 0)) throw DomainError("NoiseSignalModel: sigma2 must be > 0");
    if (!(y1_ >= 0 && y1_ < 1)) throw DomainError("NoiseSignalModel: y1 must lie in [0, 1)");
    if ((y1_ == 0) != signal_.empty())
      throw DomainError("NoiseSignalModel: y1 = 0 exactly when G is empty");
    Real total = 0;
    for (std::size_t j = 0; j < signal_.size(); ++j) {
      if (!(signal_[j].weight > 0)) throw DomainError("NoiseSignalModel: signal weights must be > 0");
      if (!(signal_[j].location > sigma2_))
        throw DomainError("NoiseSignalModel: signal atoms must lie above sigma2");
      if (j > 0 && !(signal_[j].location > signal_[j - 1].location))
        throw DomainError("NoiseSignalModel: signal atoms must be strictly increasing");
      total += signal_[j].weight;
    }
    if (!signal_.empty()) {
      if (std::abs(total - 1) > Real(1e-9)) throw DomainError("NoiseSignalModel: G weights must sum to 1");
      for (auto& a : signal_) a.weight /= total;
    }
  }

  static NoiseSignalModel pure_noise(Real sigma2) { return NoiseSignalModel(sigma2, 0, {}); }

  static NoiseSignalModel single_spike(Real sigma2, Real y1, Real b) {
    return NoiseSignalModel(sigma2, y1, {{b, Real(1)}});
  }

  /// Model whose H is the empirical d.f. of a population spectrum (e.g. the
  /// eigenvalues of R = BB* + sigma2 I). Eigenvalues within `rel_tol` of
  /// sigma2 count as noise; signal eigenvalues within `rel_tol` of each other
  /// are merged into one atom.
  static NoiseSignalModel from_population_spectrum(const DiscreteSpectrum<Real>& spec, Real sigma2,
                                                   Real rel_tol = Real(1e-8)) {
    if (spec.empty()) throw DomainError("from_population_spectrum: empty spectrum");
    std::vector<SignalAtom<Real>> atoms;
    std::size_t signal_count = 0;
    for (Real v : spec.values()) {
      if (v < sigma2 * (1 - rel_tol))
        throw DomainError("from_population_spectrum: eigenvalue below the noise level");
      if (v <= sigma2 * (1 + rel_tol)) continue;
      ++signal_count;
      if (!atoms.empty() && v <= atoms.back().location * (1 + rel_tol))
        atoms.back().weight += 1;
      else
        atoms.push_back({v, Real(1)});
    }
    if (signal_count == spec.size())
      throw DomainError("from_population_spectrum: no eigenvalue at the noise level");
    for (auto& a : atoms) a.weight /= static_cast<Real>(signal_count);
    return NoiseSignalModel(sigma2, static_cast<Real>(signal_count) / static_cast<Real>(spec.size()),
                            std::move(atoms));
  }

  Real sigma2() const { return sigma2_; }
  Real y1() const { return y1_; }
  const std::vector<SignalAtom<Real>>& signal() const { return signal_; }
  bool has_signal() const { return !signal_.empty(); }
  Real b_first() const { return signal_.front().location; }
  Real b_last() const { return signal_.back().location; }

  /// Atoms of H itself: (sigma2, 1 - y1) followed by (b_j, y1 * w_j).
  std::vector<Atom<Real>> population_atoms() const {
    std::vector<Atom<Real>> h{{sigma2_, 1 - y1_}};
    for (const auto& a : signal_) h.push_back({a.location, y1_ * a.weight});
    return h;
  }

  NoiseSignalModel scaled(Real c) const {
    auto s = signal_;
    for (auto& a : s) a.location *= c;
    return NoiseSignalModel(sigma2_ * c, y1_, std::move(s));
  }

 private:
  Real sigma2_;
  Real y1_;
  std::vector<SignalAtom<Real>> signal_;
};

}  // namespace rmtdetect
