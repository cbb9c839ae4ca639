#pragma once

// Lattice discretization of the continuum Ising model on Λ(T,N) = {kδ : 0 ≤ k ≤ N},
// δ = T/N, with weight
//
//   P_{α,T,N}(σ) ∝ exp( Σ_{i<j} J(i,j) σ_i σ_j ),
//   J(i,j) = 2αδ² g((j-i)δ) for |i-j| > 1,   J(i,i+1) = -½ log δ,
//
// plus its Fortuin–Kasteleyn representation (edge probability 1 - e^{-2J})
// and the dominated independent bond percolation. Sites are integer indices.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "rng.hpp"
#include "statistics.hpp"
#include "union_find.hpp"

namespace sbising {

class LatticeModel {
 public:
  LatticeModel(double horizon, std::size_t n, double alpha, Kernel kernel)
      : horizon_(horizon), n_(n), alpha_(alpha), kernel_(std::move(kernel)) {
    if (!(horizon_ > 0.0)) throw ValidationError("LatticeModel: T must be positive");
    if (n_ < 1) throw ValidationError("LatticeModel: N must be at least 1");
    if (!(alpha_ >= 0.0)) throw ValidationError("LatticeModel: alpha must be nonnegative");
    if (!(spacing() < 1.0)) throw ValidationError("LatticeModel: spacing T/N must be < 1 for ferromagnetic neighbours");
    const double d = spacing();
    coupling_.assign(n_ + 1, 0.0);
    if (n_ >= 1) coupling_[1] = -0.5 * std::log(d);
    for (std::size_t k = 2; k <= n_; ++k) coupling_[k] = 2.0 * alpha_ * d * d * kernel_(static_cast<double>(k) * d);
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t intervals() const noexcept { return n_; }
  std::size_t sites() const noexcept { return n_ + 1; }
  double alpha() const noexcept { return alpha_; }
  double spacing() const noexcept { return horizon_ / static_cast<double>(n_); }
  const Kernel& kernel() const noexcept { return kernel_; }

  /// J(i, j); depends on |i - j| only. Zero on the diagonal.
  double coupling(std::size_t i, std::size_t j) const noexcept { return coupling_[i > j ? i - j : j - i]; }

  /// Largest grid index not to the right of t.
  std::size_t grid_index(double t) const {
    if (!(t >= 0.0 && t <= horizon_ * (1.0 + 1e-12))) throw UsageError("grid_index: time outside [0, T]");
    const auto k = static_cast<std::size_t>(std::floor(t / spacing() + 1e-9));
    return std::min(k, n_);
  }

  /// FK edge probability 1 - e^{-2J(i,j)}: 1 - δ for neighbours.
  double fk_probability(std::size_t i, std::size_t j) const {
    const std::size_t d = i > j ? i - j : j - i;
    if (d == 1) return 1.0 - spacing();
    return -std::expm1(-2.0 * coupling_[d]);
  }

  /// Dominated independent bond probability: 1 - 2δ for neighbours,
  /// 1 - e^{-2αδ² g} otherwise.
  double bond_probability(std::size_t i, std::size_t j) const {
    const std::size_t d = i > j ? i - j : j - i;
    if (d == 1) return 1.0 - 2.0 * spacing();
    return -std::expm1(-coupling_[d]);
  }

 private:
  double horizon_;
  std::size_t n_;
  double alpha_;
  Kernel kernel_;
  std::vector<double> coupling_;
};

using SpinConfig = std::vector<int>;

inline double lattice_energy(const LatticeModel& model, const SpinConfig& spins) {
  double e = 0.0;
  for (std::size_t i = 0; i < spins.size(); ++i)
    for (std::size_t j = i + 1; j < spins.size(); ++j) e += model.coupling(i, j) * spins[i] * spins[j];
  return e;
}

namespace detail {

// Bit mask of the sites appearing an odd number of times: the spin product
// over a multiset only depends on it.
inline std::uint64_t odd_site_mask(const LatticeModel& model, const std::vector<std::size_t>& sites) {
  std::uint64_t mask = 0;
  for (std::size_t s : sites) {
    if (s >= model.sites()) throw UsageError("site index outside the lattice");
    mask ^= std::uint64_t{1} << s;
  }
  return mask;
}

struct PartialSums {
  double weight = 0.0;
  double weighted_product = 0.0;
};

// Enumerates σ_0 = +1, the top `prefix_bits` of σ_1..σ_N fixed to `prefix`, and
// the remaining bits in Gray-code order with incremental energies. Bit b of a
// configuration word set means σ_{b} = -1.
inline PartialSums enumerate_block(const LatticeModel& model, std::uint64_t mask, std::size_t prefix_bits,
                                   std::uint64_t prefix, double reference) {
  const std::size_t n_sites = model.sites();
  const std::size_t free_bits = n_sites - 1 - prefix_bits;
  std::uint64_t word = prefix << (1 + free_bits);
  SpinConfig spins(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) spins[i] = ((word >> i) & 1U) ? -1 : 1;
  double energy = lattice_energy(model, spins);
  std::vector<double> field(n_sites, 0.0);
  for (std::size_t i = 0; i < n_sites; ++i)
    for (std::size_t j = 0; j < n_sites; ++j)
      if (i != j) field[i] += model.coupling(i, j) * spins[j];

  PartialSums out;
  const std::uint64_t count = std::uint64_t{1} << free_bits;
  for (std::uint64_t step = 0;; ++step) {
    const double w = std::exp(energy - reference);
    out.weight += w;
    out.weighted_product += (std::popcount(word & mask) % 2 == 0) ? w : -w;
    if (step + 1 == count) break;
    const std::size_t site = 1 + static_cast<std::size_t>(std::countr_zero(step + 1));
    const int old = spins[site];
    energy -= 2.0 * old * field[site];
    spins[site] = -old;
    word ^= std::uint64_t{1} << site;
    for (std::size_t j = 0; j < n_sites; ++j)
      if (j != site) field[j] -= 2.0 * old * model.coupling(site, j);
  }
  return out;
}

}  // namespace detail

inline constexpr std::size_t kMaxEnumerationSites = 20;

/// E_{α,T,N}[∏ σ_sites] by full enumeration (N + 1 ≤ 20 sites).
inline double exact_correlation(const LatticeModel& model, const std::vector<std::size_t>& sites) {
  if (model.sites() > kMaxEnumerationSites) throw UsageError("exact_correlation: at most 20 sites can be enumerated");
  const std::uint64_t mask = detail::odd_site_mask(model, sites);
  if (std::popcount(mask) % 2 == 1) return 0.0;
  if (mask == 0) return 1.0;

  // All-aligned configuration maximizes the (ferromagnetic) exponent.
  const double reference = lattice_energy(model, SpinConfig(model.sites(), 1));
  const std::size_t prefix_bits = std::min<std::size_t>(3, model.sites() - 1);
  std::vector<std::future<detail::PartialSums>> parts;
  for (std::uint64_t prefix = 0; prefix < (std::uint64_t{1} << prefix_bits); ++prefix)
    parts.push_back(std::async(std::launch::deferred, detail::enumerate_block, std::cref(model), mask, prefix_bits,
                               prefix, reference));
  double weight = 0.0, product = 0.0;
  for (auto& p : parts) {
    const auto s = p.get();
    weight += s.weight;
    product += s.weighted_product;
  }
  return product / weight;
}

/// Single-site Metropolis sampler with incrementally maintained local fields.
class LatticeChain {
 public:
  LatticeChain(const LatticeModel& model, std::uint64_t seed)
      : model_(model), rng_(seed), spins_(model.sites()), field_(model.sites(), 0.0), order_(model.sites()) {
    for (auto& s : spins_) s = rng_.bernoulli(0.5) ? 1 : -1;
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    refresh_fields();
  }

  const SpinConfig& spins() const noexcept { return spins_; }
  Rng& rng() noexcept { return rng_; }

  /// N + 1 single-site proposals in a random order.
  void sweep() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    for (std::size_t site : order_) {
      const double delta = -2.0 * spins_[site] * field_[site];
      if (delta >= 0.0 || rng_.uniform() < std::exp(delta)) flip(site);
    }
    if (++sweeps_ % 1000 == 0) refresh_fields();
  }

 private:
  void flip(std::size_t site) {
    const int old = spins_[site];
    spins_[site] = -old;
    for (std::size_t j = 0; j < spins_.size(); ++j)
      if (j != site) field_[j] -= 2.0 * old * model_.coupling(site, j);
  }

  void refresh_fields() {
    for (std::size_t i = 0; i < spins_.size(); ++i) {
      double h = 0.0;
      for (std::size_t j = 0; j < spins_.size(); ++j)
        if (j != i) h += model_.coupling(i, j) * spins_[j];
      field_[i] = h;
    }
  }

  const LatticeModel& model_;
  Rng rng_;
  SpinConfig spins_;
  std::vector<double> field_;
  std::vector<std::size_t> order_;
  std::uint64_t sweeps_ = 0;
};

struct LatticeRun {
  std::uint64_t n_sweeps = 20000;  ///< burn-in included
  std::uint64_t burn_in = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (burn_in >= n_sweeps) throw UsageError("burn_in must be smaller than n_sweeps");
  }
};

/// Spin-product estimates for each site set from one Metropolis chain.
inline std::vector<Estimate> mcmc_correlations(const LatticeModel& model,
                                               const std::vector<std::vector<std::size_t>>& site_sets,
                                               const LatticeRun& run) {
  run.validate();
  for (const auto& set : site_sets)
    for (std::size_t s : set)
      if (s >= model.sites()) throw UsageError("mcmc_correlation: site index outside the lattice");
  LatticeChain chain(model, run.seed);
  std::vector<std::vector<double>> series(site_sets.size());
  for (std::uint64_t sweep = 0; sweep < run.n_sweeps; ++sweep) {
    chain.sweep();
    if (sweep < run.burn_in) continue;
    for (std::size_t o = 0; o < site_sets.size(); ++o) {
      int p = 1;
      for (std::size_t s : site_sets[o]) p *= chain.spins()[s];
      series[o].push_back(p);
    }
  }
  std::vector<Estimate> out;
  for (const auto& s : series) out.push_back(batch_means(s, run.seed));
  return out;
}

inline Estimate mcmc_correlation(const LatticeModel& model, const std::vector<std::size_t>& sites,
                                 const LatticeRun& run) {
  return mcmc_correlations(model, {sites}, run).front();
}

/// Open edges over the complete graph on Λ(T,N) and their clusters.
struct FKConfig {
  std::vector<std::pair<std::size_t, std::size_t>> open_edges;
  UnionFind clusters;
};

/// Edwards–Sokal step: each edge between equal spins opens with the FK probability.
inline FKConfig fk_from_spins(const LatticeModel& model, const SpinConfig& spins, Rng& rng) {
  if (spins.size() != model.sites()) throw UsageError("fk_from_spins: configuration has the wrong length");
  FKConfig fk{{}, UnionFind(spins.size())};
  for (std::size_t i = 0; i < spins.size(); ++i)
    for (std::size_t j = i + 1; j < spins.size(); ++j) {
      if (spins[i] != spins[j]) continue;
      if (rng.bernoulli(model.fk_probability(i, j))) {
        fk.open_edges.emplace_back(i, j);
        fk.clusters.unite(i, j);
      }
    }
  return fk;
}

inline FKConfig fk_from_spins(const LatticeModel& model, const SpinConfig& spins, std::uint64_t seed) {
  Rng rng(seed);
  return fk_from_spins(model, spins, rng);
}

/// P_{α,T,N}(a ↔ b) under the FK measure, estimated via the spin chain and the
/// Edwards–Sokal coupling (one FK sample per sweep).
inline Estimate estimate_fk_two_point(const LatticeModel& model, std::size_t a, std::size_t b, const LatticeRun& run) {
  run.validate();
  if (a >= model.sites() || b >= model.sites()) throw UsageError("estimate_fk_two_point: endpoint outside the lattice");
  LatticeChain chain(model, run.seed);
  Rng edges(split_seed(run.seed, 1));
  std::vector<double> series;
  for (std::uint64_t sweep = 0; sweep < run.n_sweeps; ++sweep) {
    chain.sweep();
    if (sweep < run.burn_in) continue;
    FKConfig fk = fk_from_spins(model, chain.spins(), edges);
    series.push_back(fk.clusters.connected(a, b) ? 1.0 : 0.0);
  }
  return batch_means(series, run.seed);
}

inline constexpr std::size_t kMaxFkEnumerationSites = 5;

/// Exact P(a ↔ b) of the random-cluster measure ∝ 2^{C(ω)} ∏ p̃ ∏ (1 - p̃),
/// by enumerating all edge subsets (at most 5 vertices).
inline double exact_fk_two_point(const LatticeModel& model, std::size_t a, std::size_t b) {
  const std::size_t n = model.sites();
  if (n > kMaxFkEnumerationSites) throw UsageError("exact_fk_two_point: at most 5 vertices can be enumerated");
  if (a >= n || b >= n) throw UsageError("exact_fk_two_point: endpoint outside the lattice");
  if (a == b) return 1.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  double total = 0.0, connected = 0.0;
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << edges.size()); ++subset) {
    double w = 1.0;
    UnionFind uf(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double p = model.fk_probability(edges[e].first, edges[e].second);
      if ((subset >> e) & 1U) {
        w *= p;
        uf.unite(edges[e].first, edges[e].second);
      } else {
        w *= 1.0 - p;
      }
    }
    w *= std::ldexp(1.0, static_cast<int>(uf.components()));
    total += w;
    if (uf.connected(a, b)) connected += w;
  }
  return connected / total;
}

/// Samples the independent bond percolation on the complete graph and returns
/// the cluster structure. Long edges are drawn by geometric skipping with the
/// largest long-edge probability, then thinned to their own probability.
inline UnionFind sample_bond_percolation(const LatticeModel& model, Rng& rng) {
  const std::size_t n = model.sites();
  UnionFind uf(n);
  const double p_near = model.bond_probability(0, 1);
  const double p_max = n > 2 ? model.bond_probability(0, 2) : 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (rng.bernoulli(p_near)) uf.unite(i, i + 1);
    if (p_max <= 0.0) continue;
    const double log_miss = std::log1p(-std::min(p_max, 1.0 - 1e-16));
    std::size_t j = i + 1;
    while (true) {
      // Number of candidates skipped before the next trial success.
      const auto skip = static_cast<std::size_t>(std::floor(std::log(rng.uniform_open_left()) / log_miss));
      j += skip + 1;
      if (j >= n) break;
      if (rng.uniform() * p_max < model.bond_probability(i, j)) uf.unite(i, j);
    }
  }
  return uf;
}

/// P(a ↔ b) in the independent bond percolation; needs δ < 1/2.
inline Estimate bond_percolation_two_point(const LatticeModel& model, std::size_t a, std::size_t b,
                                           std::uint64_t n_samples, std::uint64_t seed) {
  if (!(model.spacing() < 0.5))
    throw ValidationError("bond percolation needs spacing T/N < 1/2 (neighbour probability 1 - 2δ); refine N");
  if (a >= model.sites() || b >= model.sites()) throw UsageError("bond_percolation_two_point: endpoint outside lattice");
  Rng rng(seed);
  std::vector<double> series;
  series.reserve(n_samples);
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    UnionFind uf = sample_bond_percolation(model, rng);
    series.push_back(uf.connected(a, b) ? 1.0 : 0.0);
  }
  return batch_means(series, seed);
}

}  // namespace sbising
