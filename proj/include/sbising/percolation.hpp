#pragma once

// Continuum percolation on [0, T]: splitting points ξ₁ (Poisson, rate 2) cut
// the line into intervals, bonds ξ₂ (Poisson on {s < t}, intensity 2αg(t-s))
// join the intervals containing their endpoints. The derived site-bond models
// on ℕ and ℤ live below it, together with the grid-convergence experiment and
// the long-range-order scan.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "continuum_ising.hpp"
#include "discrete_ising.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "overlap_series.hpp"
#include "rng.hpp"
#include "statistics.hpp"
#include "union_find.hpp"

namespace sbising {

struct ContinuumPercConfig {
  double horizon = 0.0;
  std::vector<double> splits;                      ///< ξ₁, sorted
  std::vector<std::pair<double, double>> bonds;    ///< ξ₂, s < t
  UnionFind clusters;                              ///< over intervals 0..splits.size()

  std::size_t interval_count() const noexcept { return splits.size() + 1; }
  std::size_t interval_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(splits.begin(), splits.end(), x) - splits.begin());
  }
  bool connected(double x, double y) { return clusters.connected(interval_of(x), interval_of(y)); }
};

/// Sampler for the continuum configuration on a fixed horizon. The bond
/// triangle is split into bands of the distance d = t - s over which g drops
/// by at most a factor 2; each band is thinned against its own bound.
class ContinuumSampler {
 public:
  ContinuumSampler(double alpha, double horizon, Kernel kernel)
      : alpha_(alpha), horizon_(horizon), kernel_(std::move(kernel)) {
    if (!(alpha_ >= 0.0)) throw ValidationError("continuum percolation: alpha must be nonnegative");
    if (!(horizon_ > 0.0)) throw ValidationError("continuum percolation: T must be positive");
    const double g0 = kernel_.at_zero();
    if (!std::isfinite(g0)) throw ValidationError("continuum percolation: g(0) must be finite");
    if (alpha_ > 0.0) build_bands();
  }

  double alpha() const noexcept { return alpha_; }
  double horizon() const noexcept { return horizon_; }

  ContinuumPercConfig sample(Rng& rng) const {
    ContinuumPercConfig cfg;
    cfg.horizon = horizon_;
    for (double x = rng.exponential(2.0); x < horizon_; x += rng.exponential(2.0)) cfg.splits.push_back(x);
    cfg.clusters.reset(cfg.interval_count());
    for (const auto& band : bands_) {
      const std::uint64_t count = rng.poisson(2.0 * alpha_ * band.bound * band.mass);
      const double top = (horizon_ - band.lo) * (horizon_ - band.lo);
      const double bottom = (horizon_ - band.hi) * (horizon_ - band.hi);
      for (std::uint64_t k = 0; k < count; ++k) {
        // d has density ∝ (T - d) on the band; s is uniform given d.
        const double d = horizon_ - std::sqrt(top - rng.uniform() * (top - bottom));
        const double s = rng.uniform() * (horizon_ - d);
        if (rng.uniform() * band.bound >= kernel_(d)) continue;
        cfg.bonds.emplace_back(s, s + d);
        cfg.clusters.unite(cfg.interval_of(s), cfg.interval_of(s + d));
      }
    }
    return cfg;
  }

 private:
  struct Band {
    double lo, hi, bound, mass;
  };

  void build_bands() {
    constexpr std::size_t kMaxBands = 64;
    double lo = 0.0;
    while (lo < horizon_) {
      const double bound = kernel_(lo);
      if (!(bound > 0.0)) break;
      double hi = horizon_;
      if (bands_.size() + 1 < kMaxBands && kernel_(horizon_) < 0.5 * bound) {
        double a = lo, b = horizon_;
        for (int it = 0; it < 60; ++it) {
          const double m = 0.5 * (a + b);
          (kernel_(m) >= 0.5 * bound ? a : b) = m;
        }
        hi = std::max(b, lo + 1e-9 * horizon_);
      }
      const double mass = 0.5 * ((horizon_ - lo) * (horizon_ - lo) - (horizon_ - hi) * (horizon_ - hi));
      bands_.push_back({lo, hi, bound, mass});
      lo = hi;
    }
  }

  double alpha_;
  double horizon_;
  Kernel kernel_;
  std::vector<Band> bands_;
};

inline ContinuumPercConfig sample_continuum(double alpha, double horizon, const Kernel& kernel, std::uint64_t seed) {
  Rng rng(seed);
  return ContinuumSampler(alpha, horizon, kernel).sample(rng);
}

/// P(x ↔ y) for the continuum percolation on [0, T].
inline Estimate continuum_two_point(double alpha, double horizon, const Kernel& kernel, double x, double y,
                                    std::uint64_t n_samples, std::uint64_t seed) {
  if (!(x >= 0.0 && x <= horizon && y >= 0.0 && y <= horizon))
    throw UsageError("continuum_two_point: points must lie in [0, T]");
  if (n_samples == 0) throw UsageError("continuum_two_point: need at least one sample");
  if (x == y) return Estimate{1.0, 0.0, n_samples, 0.5, seed, false};
  ContinuumSampler sampler(alpha, horizon, kernel);
  Rng rng(seed);
  std::vector<double> series;
  series.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    auto cfg = sampler.sample(rng);
    series.push_back(cfg.connected(x, y) ? 1.0 : 0.0);
  }
  return batch_means(series, seed);
}

/// Probability that [0, 1] is alive (all of its ξ₁-intervals joined by bonds
/// with both ends in [0, 1]) for each α. All α share the same random numbers,
/// so the estimates are monotone in α sample by sample.
inline std::vector<Estimate> estimate_p0(const std::vector<double>& alphas, const Kernel& kernel,
                                         std::uint64_t n_samples, std::uint64_t seed) {
  if (alphas.empty()) return {};
  if (n_samples == 0) throw UsageError("estimate_p0: need at least one sample");
  for (double a : alphas)
    if (!(a >= 0.0)) throw ValidationError("estimate_p0: alpha must be nonnegative");
  const double alpha_max = *std::max_element(alphas.begin(), alphas.end());
  const double g0 = kernel.at_zero();
  if (!std::isfinite(g0)) throw ValidationError("estimate_p0: g(0) must be finite");

  Rng rng(seed);
  std::vector<std::vector<double>> series(alphas.size());
  std::vector<double> splits;
  struct Candidate {
    double s, t, level;  // bond present for α iff level < α
  };
  std::vector<Candidate> candidates;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    splits.clear();
    for (double x = rng.exponential(2.0); x < 1.0; x += rng.exponential(2.0)) splits.push_back(x);
    candidates.clear();
    const std::uint64_t count = rng.poisson(alpha_max * g0);  // 2 α g(0) · area 1/2
    for (std::uint64_t k = 0; k < count; ++k) {
      double s = rng.uniform(), t = rng.uniform();
      if (s > t) std::swap(s, t);
      candidates.push_back({s, t, rng.uniform() * alpha_max * g0 / kernel(t - s)});
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      if (splits.empty()) {
        series[a].push_back(1.0);
        continue;
      }
      UnionFind uf(splits.size() + 1);
      auto interval = [&](double x) {
        return static_cast<std::size_t>(std::upper_bound(splits.begin(), splits.end(), x) - splits.begin());
      };
      for (const auto& c : candidates)
        if (c.level < alphas[a]) uf.unite(interval(c.s), interval(c.t));
      series[a].push_back(uf.components() == 1 ? 1.0 : 0.0);
    }
  }
  std::vector<Estimate> out;
  for (const auto& s : series) out.push_back(batch_means(s, seed));
  return out;
}

inline Estimate estimate_p0(double alpha, const Kernel& kernel, std::uint64_t n_samples, std::uint64_t seed) {
  return estimate_p0(std::vector<double>{alpha}, kernel, n_samples, seed).front();
}

/// Map ℕ → ℤ: 0, 1, 2, 3, 4, ... ↦ 0, -1, 1, -2, 2, ...
inline std::int64_t phi_map(std::int64_t n) {
  if (n < 0) throw UsageError("phi_map: argument must be nonnegative");
  return n % 2 == 0 ? n / 2 : -(n + 1) / 2;
}

enum class SiteDomain { Natural, Integer };

inline const char* to_string(SiteDomain d) { return d == SiteDomain::Natural ? "N" : "Z"; }

/// Site-bond percolation induced by the continuum model: site n is alive with
/// probability p₀, edge {n, m} is open with probability
/// p_{n,m} = 1 - exp(-2α ∬_{[n,n+1)×[m,m+1)} g).
/// Truncated to {0..L} (ℕ) or {-L..L} (ℤ).
class SiteBondModel {
 public:
  SiteBondModel(SiteDomain domain, std::int64_t truncation, double alpha, Kernel kernel, double p0,
                bool nearest_neighbour_only = false)
      : domain_(domain), truncation_(truncation), alpha_(alpha), p0_(p0), nearest_only_(nearest_neighbour_only) {
    if (truncation_ < 1) throw ValidationError("SiteBondModel: truncation L must be at least 1");
    if (!(alpha_ >= 0.0)) throw ValidationError("SiteBondModel: alpha must be nonnegative");
    if (!(p0_ >= 0.0 && p0_ <= 1.0)) throw ValidationError("SiteBondModel: p0 must lie in [0, 1]");
    const auto span = static_cast<std::size_t>(domain_ == SiteDomain::Natural ? truncation_ : 2 * truncation_);
    edge_.assign(span + 1, 0.0);
    for (std::size_t k = 1; k <= span; ++k) {
      if (nearest_only_ && k > 1) break;
      const double w = kernel.box_integral(0.0, 1.0, static_cast<double>(k), static_cast<double>(k) + 1.0);
      edge_[k] = -std::expm1(-2.0 * alpha_ * w);
    }
  }

  SiteDomain domain() const noexcept { return domain_; }
  std::int64_t truncation() const noexcept { return truncation_; }
  double alpha() const noexcept { return alpha_; }
  double p0() const noexcept { return p0_; }
  std::int64_t lowest() const noexcept { return domain_ == SiteDomain::Natural ? 0 : -truncation_; }
  std::int64_t highest() const noexcept { return truncation_; }
  std::size_t site_count() const noexcept { return static_cast<std::size_t>(highest() - lowest() + 1); }
  bool contains(std::int64_t n) const noexcept { return n >= lowest() && n <= highest(); }

  double edge_probability(std::int64_t n, std::int64_t m) const {
    if (!contains(n) || !contains(m)) throw UsageError("SiteBondModel: site outside the truncated domain");
    const auto k = static_cast<std::size_t>(n > m ? n - m : m - n);
    return edge_[k];
  }

 private:
  SiteDomain domain_;
  std::int64_t truncation_;
  double alpha_;
  double p0_;
  bool nearest_only_;
  std::vector<double> edge_;
};

/// P(a ↔ b) through alive sites only (both endpoints alive).
inline Estimate discrete_two_point(const SiteBondModel& model, std::int64_t a, std::int64_t b,
                                   std::uint64_t n_samples, std::uint64_t seed) {
  if (!model.contains(a) || !model.contains(b)) throw UsageError("discrete_two_point: endpoint outside the domain");
  if (n_samples == 0) throw UsageError("discrete_two_point: need at least one sample");
  const std::size_t n = model.site_count();
  const std::int64_t lo = model.lowest();
  std::vector<double> prob(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) prob[k] = model.edge_probability(0, static_cast<std::int64_t>(k));

  Rng rng(seed);
  std::vector<char> alive(n);
  std::vector<double> series;
  series.reserve(n_samples);
  const auto ia = static_cast<std::size_t>(a - lo), ib = static_cast<std::size_t>(b - lo);
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    for (auto& x : alive) x = rng.bernoulli(model.p0()) ? 1 : 0;
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        // Draw every edge so the random stream does not depend on aliveness.
        const bool open = rng.bernoulli(prob[j - i]);
        if (open && alive[i] && alive[j]) uf.unite(i, j);
      }
    series.push_back(alive[ia] && alive[ib] && uf.connected(ia, ib) ? 1.0 : 0.0);
  }
  return batch_means(series, seed);
}

/// Default truncation for the discrete models: 4 · max(|a|, |b|), at least 1.
inline std::int64_t default_truncation(std::int64_t a, std::int64_t b) {
  return std::max<std::int64_t>(1, 4 * std::max(std::abs(a), std::abs(b)));
}

struct ConvergenceRow {
  std::size_t grid = 0;  ///< N, points per unit time
  Estimate discrete;
  Estimate continuum;
  double gap = 0.0;         ///< |discrete - continuum|
  double gap_stderr = 0.0;  ///< combined
  double closed_form_gap = 0.0;  ///< α = 0 only: |(1 - 2/N)^{Nn} - e^{-2n}|, else NaN
};

/// |(1 - 2/N)^{Nn} - e^{-2n}|, the α = 0 grid error of P(0 ↔ n).
inline double free_convergence_gap(std::size_t grid, int n) {
  const double nn = static_cast<double>(grid) * n;
  return std::abs(std::exp(nn * std::log1p(-2.0 / static_cast<double>(grid))) - std::exp(-2.0 * n));
}

/// Bond percolation on the grid (1/N)ℤ ∩ [0, T] against continuum percolation,
/// for the connection 0 ↔ n and every N in `grids`.
inline std::vector<ConvergenceRow> appendix_convergence_experiment(double alpha, int horizon, const Kernel& kernel,
                                                                   int n, const std::vector<std::size_t>& grids,
                                                                   std::uint64_t n_samples, std::uint64_t seed) {
  if (horizon < 1 || n < 0 || n > horizon) throw UsageError("appendix_convergence: need integers 0 ≤ n ≤ T, T ≥ 1");
  const double T = horizon;
  const Estimate continuum = continuum_two_point(alpha, T, kernel, 0.0, n, n_samples, split_seed(seed, 0));
  std::vector<ConvergenceRow> rows;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const std::size_t N = grids[g];
    if (N < 3) throw UsageError("appendix_convergence: grid sizes must be at least 3");
    LatticeModel lattice(T, N * static_cast<std::size_t>(horizon), alpha, kernel);
    ConvergenceRow row;
    row.grid = N;
    row.continuum = continuum;
    row.discrete = bond_percolation_two_point(lattice, 0, N * static_cast<std::size_t>(n), n_samples,
                                              split_seed(seed, g + 1));
    row.gap = std::abs(row.discrete.mean - continuum.mean);
    row.gap_stderr = combined_stderr(row.discrete, continuum);
    row.closed_form_gap = alpha == 0.0 ? free_convergence_gap(N, n) : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

enum class OrderLabel { Decay, Plateau, Unresolved };

inline const char* to_string(OrderLabel l) {
  switch (l) {
    case OrderLabel::Decay: return "DECAY";
    case OrderLabel::Plateau: return "PLATEAU";
    default: return "UNRESOLVED";
  }
}

inline constexpr double kOrderThreshold = 0.05;

/// DECAY: the value at the largest t is below the threshold and still falling.
/// PLATEAU: above the threshold and the last step is flat within 2 stderr.
inline OrderLabel classify_order(const std::vector<Estimate>& curve) {
  if (curve.size() < 2) throw UsageError("classify_order: need at least two points");
  const Estimate& last = curve.back();
  const Estimate& prev = curve[curve.size() - 2];
  const double step = last.mean - prev.mean;
  const double sigma = combined_stderr(last, prev);
  if (last.mean < kOrderThreshold && (step < 0.0 || std::abs(step) <= 2.0 * sigma)) return OrderLabel::Decay;
  if (last.mean > kOrderThreshold && std::abs(step) <= 2.0 * sigma) return OrderLabel::Plateau;
  return OrderLabel::Unresolved;
}

struct LroSettings {
  std::vector<double> alphas{0.1, 1.0, 5.0, 20.0};
  std::vector<double> times{1.0, 2.0, 4.0, 8.0};
  double horizon = 16.0;
  ChainRun run{};
  std::uint64_t percolation_samples = 20000;
  bool with_series = true;
  SeriesSettings series{1, 0.0, 16, 3};
  ChainRun series_run{4000, 400, 0, 1};
};

struct LroRow {
  double alpha = 0.0;
  std::vector<Estimate> correlation;  ///< τ(t) on the time grid
  std::vector<Estimate> percolation;  ///< P(0 ↔ t), a lower bound for τ(t)
  OrderLabel label = OrderLabel::Unresolved;
  Estimate plateau;                   ///< τ at the largest t
  InfraredLabel series_label = InfraredLabel::Unresolved;
  Estimate series_first_term;
};

struct LroReport {
  std::vector<LroRow> rows;
  /// Largest α labelled DECAY and smallest α labelled PLATEAU (NaN if none).
  double crossover_low = std::nan("");
  double crossover_high = std::nan("");
  bool plateau_monotone = true;  ///< plateau levels nondecreasing in α within 3 stderr
};

inline LroReport long_range_order_scan(const Kernel& kernel, const LroSettings& settings, std::uint64_t seed) {
  if (settings.times.size() < 2) throw UsageError("lro_scan: need at least two times");
  for (double t : settings.times)
    if (!(t > 0.0 && t <= settings.horizon)) throw UsageError("lro_scan: times must lie in (0, T]");
  LroReport report;
  std::vector<std::vector<double>> sets;
  for (double t : settings.times) sets.push_back({t});
  for (std::size_t i = 0; i < settings.alphas.size(); ++i) {
    const double alpha = settings.alphas[i];
    LroRow row;
    row.alpha = alpha;
    ChainRun run = settings.run;
    run.seed = split_seed(seed, 3 * i);
    row.correlation = estimate_correlations(IsingParams{alpha, settings.horizon, kernel, false}, sets, run);
    for (std::size_t k = 0; k < settings.times.size(); ++k)
      row.percolation.push_back(continuum_two_point(alpha, settings.horizon, kernel, 0.0, settings.times[k],
                                                    settings.percolation_samples, split_seed(seed, 3 * i + 1) ^ k));
    row.label = classify_order(row.correlation);
    row.plateau = row.correlation.back();
    if (settings.with_series) {
      ChainRun srun = settings.series_run;
      srun.seed = split_seed(seed, 3 * i + 2);
      const auto series = estimate_rho_series(std::sqrt(8.0 * alpha), kernel, settings.series, srun);
      row.series_label = series.first_term_label;
      if (!series.normalized_terms.empty()) row.series_first_term = series.normalized_terms.front();
    }
    report.rows.push_back(row);
  }
  for (const auto& r : report.rows) {
    if (r.label == OrderLabel::Decay) report.crossover_low = std::isnan(report.crossover_low) ? r.alpha
                                                               : std::max(report.crossover_low, r.alpha);
    if (r.label == OrderLabel::Plateau) report.crossover_high = std::isnan(report.crossover_high) ? r.alpha
                                                                 : std::min(report.crossover_high, r.alpha);
  }
  std::vector<const LroRow*> sorted;
  for (const auto& r : report.rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->alpha < b->alpha; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->plateau.mean < sorted[i - 1]->plateau.mean - 3.0 * combined_stderr(sorted[i]->plateau,
                                                                                      sorted[i - 1]->plateau))
      report.plateau_monotone = false;
  return report;
}

}  // namespace sbising
