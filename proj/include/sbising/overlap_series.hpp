#pragma once

// Truncated correlation-function series for the inverse vacuum overlap,
//
//   1/ρ(λ) = Σ_n (2α)^n / n! ∫_{[0,∞)^n} (τ_n * τ_n)(t) ∏ g(t_i) dt_i,
//
// restricted to n ≤ n_max and t ∈ [0, T_max]^n. Every dropped term is
// nonnegative, so 1/S(n_max) bounds ρ from above.
//
// Each term is estimated by importance sampling: t_i has density g / F(T_max)
// on [0, T_max] and s_i is uniform on [0, t_i], which turns the convolution
// into t_i · τ_n(s) τ_n(t - s). The two τ factors come from two independent
// chains conditioned on X_0 = +1, so their product is unbiased.

#include <array>
#include <cmath>
#include <vector>

#include "continuum_ising.hpp"
#include "kernel.hpp"
#include "statistics.hpp"

namespace sbising {

struct SeriesSettings {
  int n_max = 2;
  double horizon = 0.0;  ///< T_max; 0 selects 50 decay scales
  std::size_t points_per_sweep = 16;
  int max_order = 3;  ///< cost guard on n_max
};

struct SeriesReport {
  double alpha = 0.0;
  double horizon = 0.0;
  Estimate partial_sum;        ///< S(n_max), including the n = 0 term 1
  Estimate overlap_bound;      ///< 1 / S(n_max), an upper estimate of ρ
  std::vector<Estimate> terms;  ///< n = 1..n_max
  /// Terms divided by (2α)^n/n!: the bare integrals ∫ (τ_n * τ_n) ∏ g.
  std::vector<Estimate> normalized_terms;
  /// n = 1 term restricted to t ≤ h for h = T_max/4, T_max/2, T_max.
  std::array<double, 3> first_term_horizons{};
  std::array<Estimate, 3> first_term_by_horizon{};
  InfraredLabel first_term_label = InfraredLabel::Unresolved;
  bool horizon_warning = false;  ///< T_max short compared to the kernel's decay
};

/// Inverts t ↦ F(t) on [0, horizon]: the point with F(t) = target. Newton from
/// the left never overshoots because F is concave.
inline double invert_first_antiderivative(const Kernel& kernel, double target, double horizon) {
  if (target <= 0.0) return 0.0;
  double t = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double g = kernel(t);
    if (g <= 0.0) break;
    const double step = (target - kernel.first_antiderivative(t)) / g;
    t += step;
    if (t >= horizon) return horizon;
    if (std::abs(step) <= 1e-13 * (1.0 + t)) break;
  }
  return t;
}

inline SeriesReport estimate_rho_series(double lambda, const Kernel& kernel, SeriesSettings settings,
                                        const ChainRun& run) {
  if (settings.n_max < 0 || settings.n_max > settings.max_order)
    throw UsageError("estimate_rho_series: n_max exceeds the configured cost guard");
  if (settings.points_per_sweep == 0) throw UsageError("estimate_rho_series: need at least one point per sweep");
  run.validate();
  const double T = settings.horizon > 0.0 ? settings.horizon : 50.0 * kernel.decay_scale();
  const double alpha = alpha_from_lambda(lambda);

  SeriesReport report;
  report.alpha = alpha;
  report.horizon = T;
  report.horizon_warning = T < 5.0 * kernel.decay_scale();
  report.first_term_horizons = {T / 4.0, T / 2.0, T};
  const auto n_max = static_cast<std::size_t>(settings.n_max);

  if (alpha == 0.0 || n_max == 0) {
    report.partial_sum = Estimate{1.0, 0.0, run.measured(), 0.5, run.seed, false};
    report.overlap_bound = report.partial_sum;
    report.terms.assign(n_max, Estimate{0.0, 0.0, run.measured(), 0.5, run.seed, false});
    report.normalized_terms = report.terms;
    report.first_term_by_horizon.fill(Estimate{0.0, 0.0, run.measured(), 0.5, run.seed, false});
    report.first_term_label = InfraredLabel::Regular;
    return report;
  }

  const double mass = kernel.first_antiderivative(T);
  std::vector<double> coefficient(n_max + 1, 1.0);   // (2α F(T))^n / n!
  std::vector<double> normalizer(n_max + 1, 1.0);    // F(T)^n
  for (std::size_t n = 1; n <= n_max; ++n) {
    coefficient[n] = coefficient[n - 1] * 2.0 * alpha * mass / static_cast<double>(n);
    normalizer[n] = normalizer[n - 1] * mass;
  }

  // Observables per sweep: S, terms 1..n_max, first-term pieces on
  // [0,T/4], (T/4,T/2], (T/2,T].
  const std::size_t n_obs = 1 + n_max + 3;
  std::vector<std::vector<std::vector<double>>> series(n_obs, std::vector<std::vector<double>>(run.chains));
  IsingParams conditioned{alpha, T, kernel, true};
  std::vector<double> s(n_max), t(n_max);

  for (std::size_t c = 0; c < run.chains; ++c) {
    PathChain left(conditioned, split_seed(split_seed(run.seed, c), 0));
    PathChain right(conditioned, split_seed(split_seed(run.seed, c), 1));
    Rng points(split_seed(split_seed(run.seed, c), 2));
    for (std::uint64_t sweep = 0; sweep < run.n_sweeps; ++sweep) {
      left.sweep();
      right.sweep();
      if (sweep < run.burn_in) continue;
      std::vector<double> acc(n_obs, 0.0);
      for (std::size_t q = 0; q < settings.points_per_sweep; ++q) {
        for (std::size_t n = 1; n <= n_max; ++n) {
          double value = 1.0;
          for (std::size_t i = 0; i < n; ++i) {
            t[i] = invert_first_antiderivative(kernel, points.uniform() * mass, T);
            s[i] = points.uniform() * t[i];
            value *= t[i] * left.path().spin_at(s[i]) * right.path().spin_at(t[i] - s[i]);
          }
          acc[n] += value;
          if (n == 1) {
            const std::size_t piece = t[0] <= T / 4.0 ? 0 : (t[0] <= T / 2.0 ? 1 : 2);
            acc[1 + n_max + piece] += value;
          }
        }
      }
      const double m = static_cast<double>(settings.points_per_sweep);
      double sum = 1.0;
      for (std::size_t n = 1; n <= n_max; ++n) {
        series[n][c].push_back(acc[n] / m);
        sum += coefficient[n] * acc[n] / m;
      }
      series[0][c].push_back(sum);
      for (std::size_t p = 0; p < 3; ++p) series[1 + n_max + p][c].push_back(coefficient[1] * acc[1 + n_max + p] / m);
    }
  }

  report.partial_sum = batch_means(series[0], run.seed);
  report.overlap_bound = reciprocal(report.partial_sum);
  for (std::size_t n = 1; n <= n_max; ++n) {
    Estimate raw = batch_means(series[n], run.seed);
    Estimate normalized = raw;
    normalized.mean *= normalizer[n];
    normalized.std_error *= normalizer[n];
    Estimate term = raw;
    term.mean *= coefficient[n];
    term.std_error *= coefficient[n];
    report.terms.push_back(term);
    report.normalized_terms.push_back(normalized);
  }

  // Cumulative first-term values and the increments between horizons.
  const auto& pieces = series;
  auto cumulative = [&](std::size_t upto) {
    std::vector<std::vector<double>> out(run.chains);
    for (std::size_t c = 0; c < run.chains; ++c) {
      out[c].assign(pieces[1 + n_max][c].size(), 0.0);
      for (std::size_t p = 0; p <= upto; ++p)
        for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] += pieces[1 + n_max + p][c][i];
    }
    return out;
  };
  for (std::size_t p = 0; p < 3; ++p) report.first_term_by_horizon[p] = batch_means(cumulative(p), run.seed);
  const Estimate inc_mid = batch_means(pieces[1 + n_max + 1], run.seed);
  const Estimate inc_last = batch_means(pieces[1 + n_max + 2], run.seed);

  // Growth per doubling of the horizon: constant increments are the
  // logarithmic divergence of ∫ t g(t) τ(t)² dt under long range order.
  const double total = report.first_term_by_horizon[2].mean;
  if (inc_last.mean <= 2.0 * inc_last.std_error || inc_last.mean <= 1e-3 * std::abs(total)) {
    report.first_term_label = InfraredLabel::Regular;
  } else if (inc_mid.mean > 2.0 * inc_mid.std_error && inc_last.mean >= 0.5 * inc_mid.mean) {
    report.first_term_label = inc_last.mean > 1.5 * inc_mid.mean ? InfraredLabel::DivergentPower
                                                                  : InfraredLabel::DivergentLog;
  } else {
    report.first_term_label = InfraredLabel::Unresolved;
  }
  return report;
}

}  // namespace sbising
