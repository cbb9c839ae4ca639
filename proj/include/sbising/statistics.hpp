#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"

namespace sbising {

/// A Monte Carlo result. `std_error` is a batch-means standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  double autocorrelation_time = 0.5;
  std::uint64_t seed = 0;
  /// Set by estimators whose variance guard tripped (relative error too large).
  bool high_variance = false;

  double lower(double k = 3.0) const { return mean - k * std_error; }
  double upper(double k = 3.0) const { return mean + k * std_error; }
};

inline constexpr std::size_t kDefaultBatches = 32;

/// Combined standard error of a difference (or sum) of independent estimates.
inline double combined_stderr(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

/// Integrated autocorrelation time with Sokal's self-consistent window (c = 6).
/// Returns 0.5 for an uncorrelated or constant series. Only the first 2^16
/// samples enter the computation.
inline double integrated_autocorrelation_time(std::span<const double> x, double window_factor = 6.0) {
  x = x.first(std::min<std::size_t>(x.size(), std::size_t{1} << 16));
  const std::size_t n = x.size();
  if (n < 4) return 0.5;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;

  double tau = 0.5;
  const std::size_t max_lag = n / 10;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
    c /= static_cast<double>(n - lag);
    tau += c / c0;
    if (static_cast<double>(lag) >= window_factor * tau) break;
  }
  return std::max(tau, 0.5);
}

/// Pools per-chain measurement series into an Estimate using batch means.
///
/// Each chain contributes an equal number of equally sized batches so that no
/// batch straddles two chains; the batch count is `batches` rounded up to a
/// multiple of the chain count. Trailing samples that do not fill a batch are
/// dropped.
inline Estimate batch_means(const std::vector<std::vector<double>>& chains, std::uint64_t seed,
                            std::size_t batches = kDefaultBatches) {
  if (chains.empty()) throw UsageError("batch_means: no chains");
  if (batches < 20) throw UsageError("batch_means: at least 20 batches are required");
  const std::size_t n_chains = chains.size();
  const std::size_t per_chain = (batches + n_chains - 1) / n_chains;
  std::size_t shortest = chains.front().size();
  for (const auto& c : chains) shortest = std::min(shortest, c.size());
  const std::size_t batch_size = shortest / per_chain;
  if (batch_size == 0) throw UsageError("batch_means: fewer samples than batches");

  std::vector<double> means;
  means.reserve(per_chain * n_chains);
  double tau_sum = 0.0;
  for (const auto& c : chains) {
    for (std::size_t b = 0; b < per_chain; ++b) {
      double s = 0.0;
      for (std::size_t i = b * batch_size; i < (b + 1) * batch_size; ++i) s += c[i];
      means.push_back(s / static_cast<double>(batch_size));
    }
    tau_sum += integrated_autocorrelation_time(std::span<const double>(c.data(), per_chain * batch_size));
  }

  const double nb = static_cast<double>(means.size());
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= nb;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (nb - 1.0);

  Estimate e;
  e.mean = mean;
  e.std_error = std::sqrt(var / nb);
  e.n_samples = static_cast<std::uint64_t>(means.size() * batch_size);
  e.autocorrelation_time = tau_sum / static_cast<double>(n_chains);
  e.seed = seed;
  return e;
}

inline Estimate batch_means(const std::vector<double>& series, std::uint64_t seed,
                            std::size_t batches = kDefaultBatches) {
  return batch_means(std::vector<std::vector<double>>{series}, seed, batches);
}

/// Estimate of 1/X from an estimate of X (delta method).
inline Estimate reciprocal(const Estimate& x) {
  Estimate r = x;
  r.mean = 1.0 / x.mean;
  r.std_error = x.std_error / (x.mean * x.mean);
  return r;
}

}  // namespace sbising
