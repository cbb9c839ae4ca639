#pragma once

// Path-space Metropolis–Hastings sampler for the continuum Ising measure
//
//   P_{α,T}(dX) = Z_{α,T}^{-1} exp(α ∬_{[0,T]²} g(t-s) X_s X_t ds dt) P(dX),
//
// where P is the rate-1 continuous-time random walk on {-1,+1} with uniform
// initial spin, together with the estimators built on it: correlation
// functions, partition functions and their ratios, the vacuum overlap and the
// susceptibility functional.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "rng.hpp"
#include "spin_path.hpp"
#include "statistics.hpp"

namespace sbising {

struct IsingParams {
  double alpha = 0.0;
  double horizon = 1.0;
  Kernel kernel = Kernel::modes({});
  /// Fix X_0 = +1 (and disable the global flip move).
  bool condition_start = false;

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("IsingParams: alpha must be >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("IsingParams: horizon must be > 0");
  }
};

/// α(λ) = λ²/8.
inline double alpha_from_lambda(double lambda) { return lambda * lambda / 8.0; }

enum class MoveKind : std::size_t { Insert, Delete, Relocate, PairInsert, PairDelete, Flip };
inline constexpr std::size_t kMoveKinds = 6;

struct MoveStatistics {
  std::array<std::uint64_t, kMoveKinds> proposed{};
  std::array<std::uint64_t, kMoveKinds> accepted{};

  double acceptance(MoveKind k) const {
    const auto i = static_cast<std::size_t>(k);
    return proposed[i] ? static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]) : 0.0;
  }
};

/// Proposal probabilities. Birth/death pairs must carry equal weight.
struct MoveMix {
  double insert = 0.25;
  double remove = 0.25;
  double relocate = 0.20;
  double pair_insert = 0.10;
  double pair_remove = 0.10;
  double flip = 0.10;
};

/// A single Markov chain over spin paths with a cached energy.
///
/// Each move flips the spins on one stretch of [0, T] (or globally), so the
/// energy change reduces to cross terms between the stretch and its
/// complement. The cache is recomputed from scratch every
/// `drift_check_interval` steps and must agree to 1e-8 relative.
class PathChain {
 public:
  static constexpr std::uint64_t drift_check_interval = 10000;
  static constexpr double drift_tolerance = 1e-8;

  PathChain(IsingParams params, std::uint64_t seed, MoveMix mix = {})
      : params_(std::move(params)), rng_(seed), path_(params_.horizon, 1) {
    params_.validate();
    if (mix.insert != mix.remove || mix.pair_insert != mix.pair_remove)
      throw ValidationError("MoveMix: birth and death moves need equal weights");
    if (params_.condition_start) mix.flip = 0.0;
    const double total = mix.insert + mix.remove + mix.relocate + mix.pair_insert + mix.pair_remove + mix.flip;
    const std::array<double, kMoveKinds> w{mix.insert, mix.remove, mix.relocate, mix.pair_insert, mix.pair_remove,
                                           mix.flip};
    double acc = 0.0;
    for (std::size_t i = 0; i < kMoveKinds; ++i) {
      acc += w[i] / total;
      cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
    pair_span_ = std::min(params_.horizon, 1.0);
    local_span_ = std::min(0.5, 0.5 * params_.horizon);
    if (!params_.condition_start && rng_.bernoulli(0.5)) path_.flip_all();
    energy_ = path_energy(path_, params_.kernel, params_.alpha);
    energy_scale_ = params_.alpha * params_.kernel.box_integral(0.0, params_.horizon, 0.0, params_.horizon);
  }

  const SpinPath& path() const noexcept { return path_; }
  const IsingParams& params() const noexcept { return params_; }
  double energy() const noexcept { return energy_; }
  const MoveStatistics& statistics() const noexcept { return stats_; }
  Rng& rng() noexcept { return rng_; }

  /// Proposals per sweep.
  std::size_t sweep_length() const { return static_cast<std::size_t>(std::ceil(4.0 * params_.horizon)) + 4; }

  void sweep() {
    for (std::size_t i = sweep_length(); i > 0; --i) step();
  }

  /// One Metropolis–Hastings proposal.
  void step() {
    const double r = rng_.uniform();
    std::size_t kind = 0;
    while (kind + 1 < kMoveKinds && r >= cumulative_[kind]) ++kind;
    const auto move = static_cast<MoveKind>(kind);
    ++stats_.proposed[kind];
    if (attempt(move)) ++stats_.accepted[kind];
    if (++steps_ % drift_check_interval == 0) check_drift();
  }

  /// Recomputes the energy from scratch; throws NumericalError on drift.
  void check_drift() {
    const double fresh = path_energy(path_, params_.kernel, params_.alpha);
    if (std::abs(fresh - energy_) > drift_tolerance * std::max({1.0, std::abs(fresh), energy_scale_}))
      throw NumericalError("PathChain: cached energy drifted from recomputation");
    energy_ = fresh;
  }

  /// Energy change (including α) of flipping [a, b] on the current path.
  double flip_delta(double a, double b) const {
    if (params_.alpha == 0.0) return 0.0;
    return params_.alpha * segment_flip_delta(path_, params_.kernel, a, b);
  }

 private:
  bool accept(double log_ratio) {
    if (log_ratio >= 0.0) return true;
    return rng_.uniform() < std::exp(log_ratio);
  }

  // Stretch whose flip turns the path with one jump more/less at u into the
  // other; the shorter side of u is used since both give the same energy.
  double tail_flip_delta(double u) const {
    const auto left = static_cast<std::size_t>(
        std::lower_bound(path_.jumps().begin(), path_.jumps().end(), u) - path_.jumps().begin());
    return (left <= path_.jump_count() - left) ? flip_delta(0.0, u) : flip_delta(u, params_.horizon);
  }

  std::size_t short_gaps() const {
    const auto j = path_.jumps();
    std::size_t m = 0;
    for (std::size_t i = 0; i + 1 < j.size(); ++i)
      if (j[i + 1] - j[i] < pair_span_) ++m;
    return m;
  }

  bool attempt(MoveKind move) {
    const double T = params_.horizon;
    const std::size_t k = path_.jump_count();
    switch (move) {
      case MoveKind::Insert: {
        const double u = rng_.uniform(0.0, T);
        if (u <= 0.0 || path_.contains_jump(u)) return false;
        const double dE = tail_flip_delta(u);
        // Rate-1 Poisson prior: ratio T/(k+1); birth and death weights are equal.
        if (!accept(dE + std::log(T / static_cast<double>(k + 1)))) return false;
        path_.insert_jump(u);
        energy_ += dE;
        return true;
      }
      case MoveKind::Delete: {
        if (k == 0) return false;
        const std::size_t i = rng_.index(k);
        const double u = path_.jumps()[i];
        const double dE = tail_flip_delta(u);
        if (!accept(dE + std::log(static_cast<double>(k) / T))) return false;
        path_.erase_jump(i);
        energy_ += dE;
        return true;
      }
      case MoveKind::Relocate: {
        if (k == 0) return false;
        const std::size_t i = rng_.index(k);
        const double u = path_.jumps()[i];
        // Even mixture of a global and a local uniform proposal; both symmetric.
        const double v = rng_.bernoulli(0.5) ? rng_.uniform(0.0, T) : u + rng_.uniform(-local_span_, local_span_);
        if (!(v > 0.0 && v < T) || path_.contains_jump(v)) return false;
        const double dE = flip_delta(std::min(u, v), std::max(u, v));
        if (!accept(dE)) return false;
        path_.erase_jump(i);
        path_.insert_jump(v);
        energy_ += dE;
        return true;
      }
      case MoveKind::PairInsert: {
        const double u = rng_.uniform(0.0, T);
        const double v = u + rng_.uniform(0.0, pair_span_);
        if (!(u > 0.0) || !(v < T) || !(v > u) || path_.contains_jump(u) || path_.contains_jump(v)) return false;
        const auto ju = path_.jumps();
        const auto lo = std::upper_bound(ju.begin(), ju.end(), u);
        if (lo != ju.end() && *lo < v) return false;  // the pair must end up adjacent
        // Short gaps after insertion: u..v is one; a gap (a,b) containing u,v is split.
        std::size_t gaps_after = short_gaps() + 1;
        const double before = (lo == ju.begin()) ? -1.0 : *(lo - 1);
        const double after = (lo == ju.end()) ? -1.0 : *lo;
        if (before >= 0.0 && after >= 0.0 && after - before < pair_span_) --gaps_after;
        if (before >= 0.0 && u - before < pair_span_) ++gaps_after;
        if (after >= 0.0 && after - v < pair_span_) ++gaps_after;
        const double dE = flip_delta(u, v);
        const double log_q = std::log(T * pair_span_ / static_cast<double>(gaps_after));
        if (!accept(dE + log_q)) return false;
        path_.insert_jump(u);
        path_.insert_jump(v);
        energy_ += dE;
        return true;
      }
      case MoveKind::PairDelete: {
        const std::size_t m = short_gaps();
        if (m == 0) return false;
        std::size_t pick = rng_.index(m);
        const auto j = path_.jumps();
        std::size_t i = 0;
        for (; i + 1 < j.size(); ++i) {
          if (j[i + 1] - j[i] < pair_span_) {
            if (pick == 0) break;
            --pick;
          }
        }
        const double u = j[i], v = j[i + 1];
        const double dE = flip_delta(u, v);
        const double log_q = std::log(static_cast<double>(m) / (T * pair_span_));
        if (!accept(dE + log_q)) return false;
        path_.erase_jump(i + 1);
        path_.erase_jump(i);
        energy_ += dE;
        return true;
      }
      case MoveKind::Flip:
        path_.flip_all();
        return true;
    }
    return false;
  }

  IsingParams params_;
  Rng rng_;
  SpinPath path_;
  double energy_ = 0.0;
  double energy_scale_ = 0.0;
  std::array<double, kMoveKinds> cumulative_{};
  double pair_span_ = 1.0;
  double local_span_ = 0.5;
  MoveStatistics stats_;
  std::uint64_t steps_ = 0;
};

/// Run control shared by the chain-based estimators.
struct ChainRun {
  std::uint64_t n_sweeps = 10000;  ///< total sweeps per chain, burn-in included
  std::uint64_t burn_in = 1000;
  std::uint64_t seed = 0;
  std::size_t chains = 1;  ///< independent chains, seeds split from `seed`
  std::size_t workers = 1;  ///< chains run concurrently; results do not depend on it

  void validate() const {
    if (burn_in >= n_sweeps) throw UsageError("burn_in must be smaller than n_sweeps");
    if (chains == 0) throw UsageError("at least one chain is required");
  }
  std::uint64_t measured() const { return n_sweeps - burn_in; }
};

/// Runs `run.chains` chains and records `measure(path)` (a fixed-length vector)
/// once per sweep after burn-in. Returns one Estimate per observable.
template <class Measure>
std::vector<Estimate> sample_observables(const IsingParams& params, const ChainRun& run, std::size_t n_observables,
                                         Measure&& measure) {
  run.validate();
  std::vector<std::vector<std::vector<double>>> series(n_observables,
                                                       std::vector<std::vector<double>>(run.chains));
  auto run_chain = [&](std::size_t c) {
    PathChain chain(params, split_seed(run.seed, c));
    for (auto& s : series) s[c].reserve(run.measured());
    for (std::uint64_t sweep = 0; sweep < run.n_sweeps; ++sweep) {
      chain.sweep();
      if (sweep < run.burn_in) continue;
      const auto values = measure(chain.path());
      for (std::size_t o = 0; o < n_observables; ++o) series[o][c].push_back(values[o]);
    }
  };
  // Each chain writes only its own column of `series`.
  const std::size_t workers = std::max<std::size_t>(1, std::min(run.workers, run.chains));
  for (std::size_t first = 0; first < run.chains; first += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t c = first; c < std::min(run.chains, first + workers); ++c)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_chain, c));
    for (auto& f : batch) f.get();
  }
  std::vector<Estimate> out;
  out.reserve(n_observables);
  for (const auto& s : series) out.push_back(batch_means(s, run.seed));
  return out;
}

/// ∏ X_{t_i} times X_0 when the number of points is odd: the correlation
/// conditioned on X_0 = +1. For one point this is X_0 X_t.
inline double conditioned_product(const SpinPath& path, std::span<const double> times) {
  int p = path.spin_product(times);
  if (times.size() % 2 == 1) p *= path.spin_at(0.0);
  return p;
}

/// τ_{α,n,T}(t_1..t_n) = E_{α,T}[∏ X_{t_i} | X_0 = 1] for each time set,
/// estimated from an unconditioned chain.
inline std::vector<Estimate> estimate_correlations(const IsingParams& params,
                                                   const std::vector<std::vector<double>>& time_sets,
                                                   const ChainRun& run) {
  for (const auto& set : time_sets)
    for (double t : set)
      if (!(t >= 0.0 && t <= params.horizon)) throw UsageError("estimate_correlation: times must lie in [0, T]");
  return sample_observables(params, run, time_sets.size(), [&](const SpinPath& p) {
    std::vector<double> v;
    v.reserve(time_sets.size());
    for (const auto& set : time_sets) v.push_back(conditioned_product(p, set));
    return v;
  });
}

inline Estimate estimate_correlation(const IsingParams& params, const std::vector<double>& times,
                                     const ChainRun& run) {
  return estimate_correlations(params, {times}, run).front();
}

/// Unconditioned moments E_{α,T}[∏ X_{s_i}] for each time set.
inline std::vector<Estimate> estimate_spin_products(const IsingParams& params,
                                                    const std::vector<std::vector<double>>& time_sets,
                                                    const ChainRun& run) {
  return sample_observables(params, run, time_sets.size(), [&](const SpinPath& p) {
    std::vector<double> v;
    v.reserve(time_sets.size());
    for (const auto& set : time_sets) v.push_back(p.spin_product(set));
    return v;
  });
}

/// (1/T) ∬ E_{α,T}[X_t X_s] dt ds from per-sample (1/T)(∫_0^T X_t dt)².
inline Estimate estimate_susceptibility(const IsingParams& params, const ChainRun& run) {
  return sample_observables(params, run, 1, [&](const SpinPath& p) {
           const double m = p.time_integral();
           return std::array<double, 1>{m * m / params.horizon};
         }).front();
}

/// A free path: uniform initial spin, rate-1 Poisson jumps on (0, T).
inline SpinPath sample_free_path(double horizon, Rng& rng) {
  const int spin = rng.bernoulli(0.5) ? 1 : -1;
  std::vector<double> jumps;
  for (double t = rng.exponential(1.0); t < horizon; t += rng.exponential(1.0)) jumps.push_back(t);
  return SpinPath(horizon, spin, std::move(jumps));
}

/// Z_{α,T} = E_P[exp(α ∬ g X X)] by direct sampling of free paths. Flags
/// `high_variance` when the relative standard error exceeds 0.05.
inline Estimate estimate_partition_function_direct(const IsingParams& params, std::uint64_t n_samples,
                                                   std::uint64_t seed) {
  params.validate();
  if (params.alpha == 0.0) return Estimate{1.0, 0.0, n_samples, 0.5, seed, false};
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const SpinPath p = sample_free_path(params.horizon, rng);
    values.push_back(std::exp(path_energy(p, params.kernel, params.alpha)));
  }
  Estimate e = batch_means(values, seed);
  e.autocorrelation_time = 0.5;
  e.high_variance = e.std_error > 0.05 * std::abs(e.mean);
  return e;
}

/// Z_{α,2T} / Z_{α,T}² as the mean of exp(2α ∬_{[0,T]×[T,2T]} g X X) under the
/// glued measure: two independent chains conditioned on X_0 = +1, one
/// reflected onto [0, T], the other shifted onto [T, 2T].
inline Estimate estimate_partition_ratio(const IsingParams& params, const ChainRun& run) {
  params.validate();
  run.validate();
  if (params.alpha == 0.0) return Estimate{1.0, 0.0, run.measured(), 0.5, run.seed, false};
  IsingParams conditioned = params;
  conditioned.condition_start = true;
  std::vector<std::vector<double>> series(run.chains);
  for (std::size_t c = 0; c < run.chains; ++c) {
    PathChain left(conditioned, split_seed(split_seed(run.seed, c), 0));
    PathChain right(conditioned, split_seed(split_seed(run.seed, c), 1));
    series[c].reserve(run.measured());
    for (std::uint64_t sweep = 0; sweep < run.n_sweeps; ++sweep) {
      left.sweep();
      right.sweep();
      if (sweep < run.burn_in) continue;
      series[c].push_back(std::exp(2.0 * params.alpha * glued_cross_energy(left.path(), right.path(), params.kernel)));
    }
  }
  return batch_means(series, run.seed);
}

struct RhoRatioReport {
  std::vector<double> horizons;
  std::vector<Estimate> values;  ///< Z_T² / Z_{2T} per horizon
  /// Index of the first of three successive horizons that agree pairwise
  /// within 2 combined standard errors (heuristic plateau detection).
  std::optional<std::size_t> plateau_start;
  Estimate plateau;  ///< value at the largest horizon
};

/// Sequence Z_T² / Z_{2T} along increasing horizons; the plateau estimates ρ(λ).
inline RhoRatioReport estimate_rho_ratio(double lambda, const Kernel& kernel, const std::vector<double>& horizons,
                                         const ChainRun& run) {
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (!(horizons[i] > horizons[i - 1])) throw UsageError("estimate_rho_ratio: horizons must increase");
  RhoRatioReport report;
  report.horizons = horizons;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    IsingParams p{alpha_from_lambda(lambda), horizons[i], kernel, false};
    ChainRun r = run;
    r.seed = split_seed(run.seed, 1000 + i);
    report.values.push_back(reciprocal(estimate_partition_ratio(p, r)));
  }
  auto agree = [&](std::size_t i, std::size_t j) {
    return std::abs(report.values[i].mean - report.values[j].mean) <=
           2.0 * combined_stderr(report.values[i], report.values[j]);
  };
  for (std::size_t i = 0; i + 2 < report.values.size(); ++i) {
    if (agree(i, i + 1) && agree(i + 1, i + 2) && agree(i, i + 2)) {
      report.plateau_start = i;
      break;
    }
  }
  if (!report.values.empty()) report.plateau = report.values.back();
  return report;
}

/// exp(-(λ²/4) ∫_0^∞ t g(t) e^{-2t} dt).
inline double overlap_upper_bound(double lambda, const Kernel& kernel) {
  return std::exp(-0.25 * lambda * lambda * kernel.overlap_bound_integral());
}

}  // namespace sbising
