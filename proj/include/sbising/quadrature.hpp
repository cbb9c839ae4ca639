#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "errors.hpp"

namespace sbising {

struct QuadratureSettings {
  double relative_tolerance = 1e-9;
  unsigned max_subdivision_depth = 20;
  /// Results whose magnitude falls below this are accepted on absolute error.
  double absolute_floor = 1e-300;
};

/// Adaptive Gauss–Kronrod (61-point) integral of `f` over [a, b]; `b` may be +inf.
/// Throws NumericalError when the error estimate misses the tolerance.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSettings& settings = {}) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, settings.max_subdivision_depth, settings.relative_tolerance, &error, &l1);
  const double allowed = std::max(settings.relative_tolerance * l1, settings.absolute_floor);
  // Boost stops at max depth without signalling; a generous factor absorbs its
  // conservative error estimate.
  if (!std::isfinite(value) || error > 10.0 * allowed) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate " << error
        << " exceeds tolerance " << allowed;
    throw NumericalError(msg.str());
  }
  return value;
}

/// Tanh-sinh integral over a finite [a, b], for integrands with algebraic
/// endpoint singularities. Same failure contract as `integrate`.
template <class F>
double integrate_endpoint_singular(F&& f, double a, double b, const QuadratureSettings& settings = {}) {
  if (a == b) return 0.0;
  // The rule grows its abscissa tables lazily, so each thread keeps its own.
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  double error = 0.0;
  double l1 = 0.0;
  const double value = rule.integrate(f, a, b, settings.relative_tolerance, &error, &l1);
  const double allowed = std::max(settings.relative_tolerance * l1, settings.absolute_floor);
  if (!std::isfinite(value) || error > 10.0 * allowed) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate " << error
        << " exceeds tolerance " << allowed;
    throw NumericalError(msg.str());
  }
  return value;
}

/// Integral over [0, inf) split at `split` so the finite head and the tail are
/// resolved separately.
template <class F>
double integrate_half_line(F&& f, double split, const QuadratureSettings& settings = {}) {
  return integrate(f, 0.0, split, settings) +
         integrate(f, split, std::numeric_limits<double>::infinity(), settings);
}

}  // namespace sbising
