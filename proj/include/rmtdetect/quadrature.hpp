#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature.

#include <array>
#include <cmath>
#include <sstream>

#include "rmtdetect/errors.hpp"

namespace rmtdetect {

namespace detail {

struct GK15 {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <typename Real, typename Fn>
void gk15(Fn& fn, Real a, Real b, Real& result, Real& error) {
  const Real c = (a + b) / 2;
  const Real h = (b - a) / 2;
  const Real fc = fn(c);
  Real kron = fc * Real(GK15::wk[7]);
  Real gauss = fc * Real(GK15::wg[3]);
  for (int j = 0; j < 7; ++j) {
    const Real dx = h * Real(GK15::xk[static_cast<std::size_t>(j)]);
    const Real f1 = fn(c - dx);
    const Real f2 = fn(c + dx);
    kron += Real(GK15::wk[static_cast<std::size_t>(j)]) * (f1 + f2);
    if (j % 2 == 1) gauss += Real(GK15::wg[static_cast<std::size_t>(j / 2)]) * (f1 + f2);
  }
  result = kron * h;
  error = std::abs((kron - gauss) * h);
}

template <typename Real, typename Fn>
Real adaptive(Fn& fn, Real a, Real b, Real tol, int depth, int max_depth) {
  Real r, e;
  gk15(fn, a, b, r, e);
  if (e <= tol || depth >= max_depth) {
    if (e > tol && depth >= max_depth) {
      std::ostringstream os;
      os << "integrate: tolerance " << tol << " not met on [" << a << ", " << b
         << "], estimated error " << e;
      throw NumericError(os.str());
    }
    return r;
  }
  const Real m = (a + b) / 2;
  return adaptive(fn, a, m, tol / 2, depth + 1, max_depth) +
         adaptive(fn, m, b, tol / 2, depth + 1, max_depth);
}

}  // namespace detail

/// Integral of fn over [a, b] to absolute tolerance `tol`.
template <typename Real, typename Fn>
Real integrate(Fn&& fn, Real a, Real b, Real tol, int max_depth = 30) {
  return detail::adaptive(fn, a, b, tol, 0, max_depth);
}

/// Single GK15 panel, no adaptivity.
template <typename Real, typename Fn>
Real integrate_panel(Fn&& fn, Real a, Real b) {
  Real r, e;
  detail::gk15(fn, a, b, r, e);
  return r;
}

}  // namespace rmtdetect
