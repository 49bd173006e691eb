#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace memristor::quad {

// Thin wrappers over Boost.Math so the numerics code reads uniformly.

inline constexpr double kDefaultRelTol = 1e-13;

/// Adaptive 31-point Gauss-Kronrod on [a, b], at most 12 bisection levels; a > b flips the sign.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kDefaultRelTol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, rel_tol);
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, rel_tol, &err);
}

/// Fixed 10-point Gauss-Legendre on panels of width at most `width`. For
/// integrands analytic in a strip of half-width pi around the real axis (the
/// Fermi-Dirac family) unit panels are accurate to roundoff, and unlike the
/// adaptive rules the cost does not blow up when the integral is tiny.
template <class F>
double integrate_panels(F&& f, double a, double b, double width = 1.0) {
  if (a == b) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / width)));
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == panels) ? b : lo + h;
    total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
  }
  return total;
}

/// tanh-sinh on a finite interval; tolerates integrable endpoint singularities.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = kDefaultRelTol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate_singular(f, b, a, rel_tol);
  // integrate() is non-const and grows its tables lazily, hence thread_local.
  thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
  return rule.integrate(f, a, b, rel_tol);
}

/// exp-sinh on [a, inf).
template <class F>
double integrate_to_infinity(F&& f, double a, double rel_tol = kDefaultRelTol) {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  return rule.integrate([&](double t) { return f(t); }, a, std::numeric_limits<double>::infinity(),
                        rel_tol);
}

}  // namespace memristor::quad
