#pragma once

// Safeguarded Newton on a bracket: Newton steps that leave the bracket or
// fail to halve it fall back to bisection.

#include <cmath>
#include <sstream>
#include <utility>

#include "rmtdetect/errors.hpp"

namespace rmtdetect {

template <typename Real = double>
struct RootResult {
  Real root;
  int iterations;
};

/// `fn(x)` returns {value, derivative}. Requires a sign change on [lo, hi].
template <typename Real, typename Fn>
RootResult<Real> safeguarded_newton(Fn&& fn, Real lo, Real hi, Real x_tol, int max_iter = 200) {
  auto [flo, dlo] = fn(lo);
  auto [fhi, dhi] = fn(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0) return {lo, 0};
  if (fhi == 0) return {hi, 0};
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os << "safeguarded_newton: no sign change on [" << lo << ", " << hi << "]";
    throw NumericError(os.str());
  }
  // Orient so that f(a) < 0 < f(b).
  Real a = flo < 0 ? lo : hi;
  Real b = flo < 0 ? hi : lo;
  Real x = (lo + hi) / 2;
  Real dx_old = std::abs(hi - lo);
  Real dx = dx_old;
  auto [f, df] = fn(x);
  for (int it = 1; it <= max_iter; ++it) {
    const bool newton_out = ((x - b) * df - f) * ((x - a) * df - f) > 0;
    const bool slow = std::abs(2 * f) > std::abs(dx_old * df);
    dx_old = dx;
    if (newton_out || slow || df == 0) {
      dx = (b - a) / 2;
      x = a + dx;
    } else {
      dx = f / df;
      x -= dx;
    }
    if (std::abs(dx) <= x_tol * std::max(Real(1), std::abs(x))) return {x, it};
    std::tie(f, df) = fn(x);
    if (f == 0) return {x, it};
    if (f < 0)
      a = x;
    else
      b = x;
    if (std::abs(b - a) <= x_tol * std::max(Real(1), std::abs(x))) return {x, it};
  }
  std::ostringstream os;
  os << "safeguarded_newton: no convergence after " << max_iter << " iterations, last x=" << x
     << ", f=" << f;
  throw NumericError(os.str());
}

}  // namespace rmtdetect
