#pragma once

// The spin-spin interaction kernel g(t) = ∫ |v(k)|² e^{-|t| ω(k)} dk, its first
// and second antiderivatives, and the integrals of g that the estimators need.
//
// Every supported kernel is a nonnegative mixture of decaying exponentials,
// which makes g even, nonnegative and nonincreasing in |t| and the second
// antiderivative G convex with G(0) = 0.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "quadrature.hpp"

namespace sbising {

struct Mode {
  double weight = 0.0;     ///< |v_j|², nonnegative
  double frequency = 1.0;  ///< ω_j, strictly positive
};

/// g(t) = Σ_j weight_j e^{-frequency_j |t|}.
struct ModeList {
  std::vector<Mode> modes;
};

/// ω(k) = |k|, v(k) = 1_{|k|≤K} |k|^{-δ} in d dimensions.
struct PowerLaw {
  int dimension = 3;
  double exponent = 0.5;  ///< δ
  double cutoff = 1.0;    ///< K
};

/// g(t) = C / (1 + t²).
struct Poly {
  double amplitude = 1.0;
};

using SpectralData = std::variant<ModeList, PowerLaw, Poly>;

namespace detail {

// (y - 1 + e^{-y}) / y², stable near 0.
inline double second_mode_factor(double y) {
  if (y < 0.1) {
    double term = 0.5, sum = 0.0;
    for (int k = 2; k < 14; ++k) {
      sum += term;
      term *= -y / static_cast<double>(k + 1);
    }
    return sum;
  }
  return (y + std::expm1(-y)) / (y * y);
}

// (1 - e^{-y}(1 + y)) / y², stable near 0.
inline double moment_mode_factor(double y) {
  if (y < 0.1) {
    // Σ_{k≥2} (-1)^k (k-1) y^{k-2} / k!
    double sum = 0.0, power = 1.0, fact = 2.0;
    for (int k = 2; k < 16; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1) * power / fact;
      power *= y;
      fact *= static_cast<double>(k + 1);
    }
    return sum;
  }
  return (-std::expm1(-y) - y * std::exp(-y)) / (y * y);
}

// Per-mode closed forms; a kernel is a nonnegative mixture of these.
inline double mode_value(double w, double f, double t) { return w * std::exp(-f * std::abs(t)); }
inline double mode_first(double w, double f, double x) {
  const double y = f * x;
  return y < 1e-12 ? w * x : w * (-std::expm1(-y)) / f;
}
inline double mode_second(double w, double f, double x) { return w * x * x * second_mode_factor(f * x); }
inline double mode_overlap(double w, double f) { return w / ((f + 2.0) * (f + 2.0)); }
inline double mode_moment(double w, double f, double horizon) {
  return w * horizon * horizon * moment_mode_factor(f * horizon);
}

inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw ValidationError("power-law kernel: dimension must be 1, 2 or 3");
  }
}

}  // namespace detail

enum class InfraredLabel { Regular, DivergentLog, DivergentPower, Unresolved };

inline const char* to_string(InfraredLabel label) {
  switch (label) {
    case InfraredLabel::Regular: return "REGULAR";
    case InfraredLabel::DivergentLog: return "DIVERGENT-LOG";
    case InfraredLabel::DivergentPower: return "DIVERGENT-POWER";
    case InfraredLabel::Unresolved: return "UNRESOLVED";
  }
  return "?";
}

inline bool is_divergent(InfraredLabel label) {
  return label == InfraredLabel::DivergentLog || label == InfraredLabel::DivergentPower;
}

/// ∫_0^T t g(t) dt along increasing horizons, with a heuristic verdict.
/// The verdict is a finite-horizon diagnostic; the underlying statement is asymptotic.
struct InfraredReport {
  std::vector<double> horizons;
  std::vector<double> values;
  /// Least-squares slope of log(value) against log(T).
  double growth_exponent = 0.0;
  InfraredLabel label = InfraredLabel::Unresolved;
};

/// Immutable kernel. Safe for concurrent reads; evaluation is deterministic.
class Kernel {
 public:
  explicit Kernel(SpectralData spectral, QuadratureSettings quadrature = {})
      : spectral_(std::move(spectral)), quadrature_(quadrature) {
    validate();
  }

  static Kernel modes(std::vector<Mode> m) { return Kernel(ModeList{std::move(m)}); }
  static Kernel single_mode(double weight, double frequency) { return modes({{weight, frequency}}); }
  static Kernel power_law(int d, double delta, double cutoff) { return Kernel(PowerLaw{d, delta, cutoff}); }
  static Kernel poly(double amplitude) { return Kernel(Poly{amplitude}); }

  const SpectralData& spectral() const noexcept { return spectral_; }
  const QuadratureSettings& quadrature() const noexcept { return quadrature_; }

  /// g(|t|).
  double operator()(double t) const {
    t = std::abs(t);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double sum = 0.0;
            for (const auto& m : s.modes) sum += detail::mode_value(m.weight, m.frequency, t);
            return sum;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return s.amplitude / (1.0 + t * t);
          } else {
            const double p = radial_power(s);
            const double area = detail::sphere_area(s.dimension);
            const double rounded = std::round(p);
            if (std::abs(p - rounded) < 1e-12 && rounded >= 0.0 && rounded <= 2.0) {
              const double a = rounded + 1.0;
              if (t == 0.0) return area * std::pow(s.cutoff, a) / a;
              return area * boost::math::tgamma_lower(a, t * s.cutoff) / std::pow(t, a);
            }
            return radial([&](double r) { return detail::mode_value(1.0, r, t); });
          }
        },
        spectral_);
  }

  double at_zero() const { return (*this)(0.0); }

  /// F(x) = ∫_0^x g, extended as an odd function.
  double first_antiderivative(double x) const {
    if (x < 0.0) return -first_antiderivative(-x);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double sum = 0.0;
            for (const auto& m : s.modes) sum += detail::mode_first(m.weight, m.frequency, x);
            return sum;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return s.amplitude * std::atan(x);
          } else {
            return radial([&](double r) { return detail::mode_first(1.0, r, x); });
          }
        },
        spectral_);
  }

  /// G(x) = ∫_0^{|x|} F; even, convex, G(0) = 0.
  double second_antiderivative(double x) const {
    x = std::abs(x);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double sum = 0.0;
            for (const auto& m : s.modes) sum += detail::mode_second(m.weight, m.frequency, x);
            return sum;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return s.amplitude * (x * std::atan(x) - 0.5 * std::log1p(x * x));
          } else {
            return radial([&](double r) { return detail::mode_second(1.0, r, x); });
          }
        },
        spectral_);
  }

  /// ∫_a^b ds ∫_c^d dt g(t - s).
  double box_integral(double a, double b, double c, double d) const {
    if (a > b || c > d) throw UsageError("box_integral: requires a <= b and c <= d");
    if (a == b || c == d) return 0.0;
    const double value = second_antiderivative(d - a) - second_antiderivative(d - b) -
                         second_antiderivative(c - a) + second_antiderivative(c - b);
    return value < 0.0 ? 0.0 : value;
  }

  /// ∫_0^∞ t g(t) e^{-2t} dt.
  double overlap_bound_integral() const {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double sum = 0.0;
            for (const auto& m : s.modes) sum += detail::mode_overlap(m.weight, m.frequency);
            return sum;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return s.amplitude *
                   integrate_half_line([](double t) { return t * std::exp(-2.0 * t) / (1.0 + t * t); }, 1.0,
                                       quadrature_);
          } else {
            return radial([](double r) { return detail::mode_overlap(1.0, r); });
          }
        },
        spectral_);
  }

  /// ∫_0^T t g(t) dt.
  double first_moment(double horizon) const {
    if (horizon < 0.0) throw UsageError("first_moment: negative horizon");
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double sum = 0.0;
            for (const auto& m : s.modes) sum += detail::mode_moment(m.weight, m.frequency, horizon);
            return sum;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return 0.5 * s.amplitude * std::log1p(horizon * horizon);
          } else {
            return radial([&](double r) { return detail::mode_moment(1.0, r, horizon); });
          }
        },
        spectral_);
  }

  /// Length scale over which g decays appreciably.
  double decay_scale() const {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            double slowest = 0.0;
            for (const auto& m : s.modes)
              if (m.weight > 0.0) slowest = std::max(slowest, 1.0 / m.frequency);
            return slowest > 0.0 ? slowest : 1.0;
          } else if constexpr (std::is_same_v<S, Poly>) {
            return 1.0;
          } else {
            return 1.0 / s.cutoff;
          }
        },
        spectral_);
  }

  /// Short human-readable identifier used in CSV output.
  std::string id() const {
    std::ostringstream out;
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            out << "modes[";
            for (std::size_t i = 0; i < s.modes.size(); ++i)
              out << (i ? ";" : "") << s.modes[i].weight << "@" << s.modes[i].frequency;
            out << "]";
          } else if constexpr (std::is_same_v<S, Poly>) {
            out << "poly(C=" << s.amplitude << ")";
          } else {
            out << "powerlaw(d=" << s.dimension << ",delta=" << s.exponent << ",K=" << s.cutoff << ")";
          }
        },
        spectral_);
    return out.str();
  }

 private:
  static double radial_power(const PowerLaw& s) { return s.dimension - 1 - 2.0 * s.exponent; }

  // S_{d-1} ∫_0^K r^p h(r) dr. The weight r^p is singular or non-smooth at 0
  // unless p is a nonnegative integer, so a tanh-sinh rule is used throughout.
  template <class H>
  double radial(H&& h) const {
    const auto& s = std::get<PowerLaw>(spectral_);
    const double p = radial_power(s);
    return detail::sphere_area(s.dimension) *
           integrate_endpoint_singular([&](double r) { return r > 0.0 ? std::pow(r, p) * h(r) : (p == 0.0 ? h(r) : 0.0); },
                                       0.0, s.cutoff, quadrature_);
  }

  void validate() const {
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ModeList>) {
            for (const auto& m : s.modes) {
              if (!(m.weight >= 0.0) || !std::isfinite(m.weight))
                throw ValidationError("kernel: mode weights must be finite and nonnegative");
              if (!(m.frequency > 0.0) || !std::isfinite(m.frequency))
                throw ValidationError("kernel: mode frequencies must be finite and strictly positive");
            }
          } else if constexpr (std::is_same_v<S, Poly>) {
            if (!(s.amplitude > 0.0) || !std::isfinite(s.amplitude))
              throw ValidationError("kernel: poly amplitude must be positive");
          } else {
            detail::sphere_area(s.dimension);
            if (!(s.cutoff > 0.0) || !std::isfinite(s.cutoff))
              throw ValidationError("kernel: power-law cutoff must be positive");
            if (!(s.exponent < 0.5 * s.dimension))
              throw ValidationError("kernel: power-law exponent must satisfy delta < d/2");
          }
        },
        spectral_);
    if (!(quadrature_.relative_tolerance > 0.0)) throw ValidationError("kernel: quadrature tolerance must be positive");
  }

  SpectralData spectral_;
  QuadratureSettings quadrature_;
};

/// Tabulates ∫_0^T t g(t) dt over `horizons` and labels the infrared behaviour.
///
/// REGULAR when the last two values differ relatively by less than
/// `regular_tolerance`. Otherwise the growth per unit log T between
/// consecutive horizons decides: constant slope means logarithmic growth,
/// an increasing slope means power growth, and a slope that is still
/// collapsing means the horizons are too short to tell.
inline InfraredReport classify_infrared(const Kernel& kernel, const std::vector<double>& horizons,
                                        double regular_tolerance = 1e-3) {
  if (horizons.size() < 3) throw UsageError("classify_infrared: at least 3 horizons are required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw UsageError("classify_infrared: horizons must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw UsageError("classify_infrared: horizons must increase");
  }

  InfraredReport report;
  report.horizons = horizons;
  for (double h : horizons) report.values.push_back(kernel.first_moment(h));

  const std::size_t n = horizons.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.values[i] <= 0.0) continue;
    const double x = std::log(horizons[i]), y = std::log(report.values[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++used;
  }
  if (used >= 2) {
    const double denom = static_cast<double>(used) * sxx - sx * sx;
    report.growth_exponent = denom > 0.0 ? (static_cast<double>(used) * sxy - sx * sy) / denom : 0.0;
  }

  const double last = report.values[n - 1], prev = report.values[n - 2];
  if (last == 0.0 || std::abs(last - prev) <= regular_tolerance * std::abs(last)) {
    report.label = InfraredLabel::Regular;
    return report;
  }
  auto log_slope = [&](std::size_t i) {
    return (report.values[i + 1] - report.values[i]) / std::log(horizons[i + 1] / horizons[i]);
  };
  const double s_prev = log_slope(n - 3), s_last = log_slope(n - 2);
  if (s_prev <= 0.0 || s_last <= 0.0) {
    report.label = InfraredLabel::Unresolved;
    return report;
  }
  // Local power of the slope: slope ∝ T^b. b ≈ 0 is logarithmic growth.
  const double mid_prev = std::sqrt(horizons[n - 3] * horizons[n - 2]);
  const double mid_last = std::sqrt(horizons[n - 2] * horizons[n - 1]);
  const double b = std::log(s_last / s_prev) / std::log(mid_last / mid_prev);
  if (b > 0.25)
    report.label = InfraredLabel::DivergentPower;
  else if (b > -0.25)
    report.label = InfraredLabel::DivergentLog;
  else
    report.label = InfraredLabel::Unresolved;
  return report;
}

}  // namespace sbising
