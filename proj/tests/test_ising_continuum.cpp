#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sbising/acceptance.hpp"
#include "sbising/continuum_ising.hpp"
#include "sbising/fock.hpp"
#include "sbising/overlap_series.hpp"
#include "sbising/spin_path.hpp"

using namespace sbising;

namespace {

double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Energy of a path by brute-force midpoint summation of α ∬ g(t-s) X_s X_t.
double midpoint_energy(const SpinPath& path, const Kernel& k, double alpha, std::size_t n = 1500) {
  const double h = path.horizon() / static_cast<double>(n);
  std::vector<int> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = path.spin_at((i + 0.5) * h);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += x[i] * x[j] * k((static_cast<double>(i) - static_cast<double>(j)) * h);
  return alpha * s * h * h;
}

TruncatedModel one_mode_fock(double alpha, int n_max = 30) {
  return TruncatedModel{{{1.0, 1.0}}, n_max, std::sqrt(8.0 * alpha)};
}

}  // namespace

TEST(SpinPath, Basics) {
  const SpinPath p(2.0, 1, {0.5, 1.25});
  EXPECT_EQ(p.spin_at(0.0), 1);
  EXPECT_EQ(p.spin_at(0.7), -1);
  EXPECT_EQ(p.spin_at(1.9), 1);
  const std::vector<double> times{0.1, 1.0};
  EXPECT_EQ(p.spin_product(times), -1);
  EXPECT_NEAR(p.time_integral(), 0.5 - 0.75 + 0.75, 1e-15);
  EXPECT_THROW(SpinPath(2.0, 1, {1.0, 0.5}), ValidationError);
  EXPECT_THROW(SpinPath(2.0, 0), ValidationError);
  EXPECT_THROW(SpinPath(2.0, 1, {2.0}), ValidationError);
}

TEST(SpinPath, EnergyMatchesMidpointSum) {
  const SpinPath p(3.0, -1, {0.4, 1.1, 2.5});
  for (const Kernel& k : {Kernel::single_mode(1.0, 1.0), Kernel::poly(1.0)}) {
    EXPECT_NEAR(path_energy(p, k, 0.7), midpoint_energy(p, k, 0.7), 2e-3) << k.id();
  }
}

TEST(SpinPath, EnergyIsFlipInvariantAndDeltaIsConsistent) {
  const Kernel k = Kernel::poly(1.0);
  SpinPath p(4.0, 1, {0.3, 1.7, 2.2, 3.9});
  SpinPath q = p;
  q.flip_all();
  EXPECT_NEAR(path_energy(p, k, 1.0), path_energy(q, k, 1.0), 1e-12);
  // Flipping [1.0, 2.0] inserts jumps at both ends.
  SpinPath r = p;
  r.insert_jump(1.0);
  r.insert_jump(2.0);
  EXPECT_NEAR(path_energy(r, k, 1.0) - path_energy(p, k, 1.0), segment_flip_delta(p, k, 1.0, 2.0), 1e-10);
}

TEST(ContinuumIsing, FreeJumpCountIsPoisson) {
  const double T = 2.0;
  PathChain chain(IsingParams{0.0, T, Kernel::single_mode(1.0, 1.0), false}, 11);
  for (int i = 0; i < 1000; ++i) chain.sweep();
  const std::size_t bins = 9, samples = 100000;
  std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < 5; ++i) chain.sweep();
    observed[std::min(chain.path().jump_count(), bins - 1)] += 1.0;
  }
  double tail = 1.0;
  for (std::size_t k = 0; k + 1 < bins; ++k) {
    const double pk = std::exp(-T) * std::pow(T, static_cast<double>(k)) / std::tgamma(k + 1.0);
    expected[k] = pk * samples;
    tail -= pk;
  }
  expected[bins - 1] = tail * samples;
  EXPECT_GT(chi_square_p_value(observed, expected), 0.01);
}

TEST(ContinuumIsing, DetailedBalanceOnJumpSectors) {
  // Stationary law of the jump count at T = 0.5 against direct integration
  // of the Gibbs density over the 0-, 1- and 2-jump sectors.
  const double T = 0.5, alpha = 1.0;
  const Kernel k = Kernel::single_mode(1.0, 1.0);
  const double z = semigroup_overlap(one_mode_fock(alpha), T);
  auto weight = [&](std::vector<double> jumps) { return std::exp(path_energy(SpinPath(T, 1, std::move(jumps)), k, alpha)); };
  const double w0 = weight({});
  const double w1 = oracle::simpson([&](double u) { return u > 0.0 && u < T ? weight({u}) : weight({T / 2}); }, 0.0, T, 400) / T;
  const std::size_t n = 300;
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) w2 += weight({(i + 0.5) * T / n, (j + 0.5) * T / n});
  w2 *= 2.0 / (static_cast<double>(n) * n);
  std::vector<double> exact{std::exp(-T) * w0 / z, std::exp(-T) * T * w1 / z, std::exp(-T) * T * T / 2.0 * w2 / z};
  exact.push_back(1.0 - exact[0] - exact[1] - exact[2]);

  PathChain chain(IsingParams{alpha, T, k, false}, 5);
  for (int i = 0; i < 1000; ++i) chain.sweep();
  std::vector<double> freq(4, 0.0);
  const std::size_t samples = 1000000;
  for (std::size_t s = 0; s < samples; ++s) {
    chain.sweep();
    freq[std::min<std::size_t>(chain.path().jump_count(), 3)] += 1.0 / samples;
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < 4; ++i) tv += 0.5 * std::abs(freq[i] - exact[i]);
  EXPECT_LT(tv, 0.02);
  EXPECT_GT(exact[3], -1e-3);  // the integration covers the sectors consistently
}

TEST(ContinuumIsing, CorrelationMatchesSemigroupOracle) {
  const IsingParams params{1.0, 2.0, Kernel::single_mode(1.0, 1.0), false};
  const Estimate e = estimate_correlation(params, {0.0, 1.0}, ChainRun{200000, 2000, 3, 1, 1});
  const double exact = semigroup_correlation(one_mode_fock(1.0), 2.0, 1.0);
  EXPECT_NEAR(exact, 0.418768, 5e-6);
  EXPECT_LT(std::abs(e.mean - exact), 4.0 * e.std_error) << e.mean << " +- " << e.std_error;
}

TEST(ContinuumIsing, FreeCorrelationIsExponential) {
  const IsingParams params{0.0, 3.0, Kernel::single_mode(1.0, 1.0), false};
  const Estimate e = estimate_correlation(params, {0.5, 1.5}, ChainRun{100000, 1000, 8, 1, 1});
  EXPECT_LT(std::abs(e.mean - std::exp(-2.0)), 4.0 * e.std_error);
}

TEST(ContinuumIsing, DirectPartitionFunctionMatchesFock) {
  const double alpha = 0.5;
  const IsingParams params{alpha, 1.5, Kernel::single_mode(1.0, 1.0), false};
  const Estimate z = estimate_partition_function_direct(params, 400000, 4);
  EXPECT_LT(std::abs(z.mean - semigroup_overlap(one_mode_fock(alpha), 1.5)), 4.0 * z.std_error);
  EXPECT_FALSE(z.high_variance);
}

TEST(ContinuumIsing, SeedDeterminism) {
  const IsingParams params{1.0, 2.0, Kernel::poly(1.0), false};
  const ChainRun run{5000, 500, 42, 2, 1};
  const Estimate a = estimate_correlation(params, {0.0, 1.0}, run);
  const Estimate b = estimate_correlation(params, {0.0, 1.0}, run);
  ChainRun threaded = run;
  threaded.workers = 2;
  const Estimate c = estimate_correlation(params, {0.0, 1.0}, threaded);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.std_error, c.std_error);
  ChainRun other = run;
  other.seed = 43;
  EXPECT_NE(estimate_correlation(params, {0.0, 1.0}, other).mean, a.mean);
}

TEST(ContinuumIsing, ValidationErrors) {
  EXPECT_THROW(PathChain(IsingParams{-1.0, 1.0, Kernel::poly(1.0), false}, 0), ValidationError);
  EXPECT_THROW(PathChain(IsingParams{1.0, 0.0, Kernel::poly(1.0), false}, 0), ValidationError);
  EXPECT_THROW(estimate_correlation(IsingParams{1.0, 1.0, Kernel::poly(1.0), false}, {0.5, 2.0}, ChainRun{}), UsageError);
  EXPECT_THROW(estimate_rho_ratio(1.0, Kernel::poly(1.0), {2.0, 1.0}, ChainRun{}), UsageError);
}

TEST(ContinuumIsing, OverlapUpperBoundClosedForm) {
  // One mode (1, 1): ∫ t e^{-t} e^{-2t} dt = 1/9.
  EXPECT_NEAR(overlap_upper_bound(1.0, Kernel::single_mode(1.0, 1.0)), std::exp(-0.25 / 9.0), 1e-14);
  EXPECT_EQ(overlap_upper_bound(0.0, Kernel::poly(1.0)), 1.0);
}

TEST(ContinuumIsing, ExactRhoBelowOverlapBound) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const TruncatedModel m{{{1.0, 1.0}}, 30, lambda};
    EXPECT_LE(ground_state_report(m).rho, overlap_upper_bound(lambda, m.kernel()) + 1e-12) << lambda;
  }
}

TEST(OverlapSeries, ZeroCouplingIsTrivial) {
  const SeriesReport r = estimate_rho_series(0.0, Kernel::poly(1.0), SeriesSettings{}, ChainRun{2000, 200, 0, 1, 1});
  EXPECT_EQ(r.partial_sum.mean, 1.0);
}

TEST(Acceptance, GksNegativeControl) {
  acceptance::Options o;
  o.gks_sign = -1;
  const auto r = acceptance::criterion_5(o);
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("GKS-1 failed"), std::string::npos) << r.detail;
}
