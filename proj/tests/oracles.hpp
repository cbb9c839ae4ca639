#pragma once

// Independent numerical routes used as test oracles. Deliberately plain:
// composite Simpson on a fixed grid, no adaptivity, no shared code with the
// library's quadrature.

#include <cmath>
#include <cstddef>

namespace oracle {

template <class F>
double simpson(F&& f, double a, double b, std::size_t n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// ∫_a^b ds ∫_c^d dt g(t - s) by a tensor midpoint rule.
template <class G>
double box_midpoint(G&& g, double a, double b, double c, double d, std::size_t n = 800) {
  const double hs = (b - a) / static_cast<double>(n), ht = (d - c) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += g((c + (j + 0.5) * ht) - (a + (i + 0.5) * hs));
  return s * hs * ht;
}

}  // namespace oracle
