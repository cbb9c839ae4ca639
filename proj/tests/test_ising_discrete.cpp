#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sbising/discrete_ising.hpp"

using namespace sbising;

namespace {

// Plain enumeration over all 2^{N+1} configurations, no Gray code, no shifts.
double naive_correlation(const LatticeModel& m, const std::vector<std::size_t>& sites) {
  const std::size_t n = m.sites();
  double z = 0.0, num = 0.0;
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << n); ++w) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        e += m.coupling(i, j) * (((w >> i) & 1U) == ((w >> j) & 1U) ? 1.0 : -1.0);
    const double weight = std::exp(e);
    int prod = 1;
    for (std::size_t s : sites) prod *= ((w >> s) & 1U) ? -1 : 1;
    z += weight;
    num += prod * weight;
  }
  return num / z;
}

}  // namespace

TEST(LatticeModel, Couplings) {
  const LatticeModel m(2.0, 8, 1.5, Kernel::poly(1.0));
  EXPECT_NEAR(m.spacing(), 0.25, 1e-15);
  EXPECT_NEAR(m.coupling(3, 4), -0.5 * std::log(0.25), 1e-15);
  EXPECT_NEAR(m.coupling(1, 4), 2.0 * 1.5 * 0.0625 / (1.0 + 0.75 * 0.75), 1e-15);
  EXPECT_EQ(m.coupling(4, 1), m.coupling(1, 4));
  EXPECT_NEAR(m.fk_probability(2, 3), 0.75, 1e-15);
  EXPECT_NEAR(m.bond_probability(2, 3), 0.5, 1e-15);
  EXPECT_EQ(m.grid_index(1.0), 4u);
  EXPECT_THROW(LatticeModel(1.0, 1, 1.0, Kernel::poly(1.0)), ValidationError);
  EXPECT_THROW(LatticeModel(1.0, 4, -1.0, Kernel::poly(1.0)), ValidationError);
  EXPECT_THROW(m.grid_index(2.5), UsageError);
}

TEST(LatticeModel, ExactMatchesNaiveEnumeration) {
  const LatticeModel m(2.0, 7, 1.0, Kernel::single_mode(1.0, 1.0));
  for (const auto& sites : std::vector<std::vector<std::size_t>>{{0, 4}, {2, 7}, {1, 3, 5, 6}, {0, 0}}) {
    EXPECT_NEAR(exact_correlation(m, sites), naive_correlation(m, sites), 1e-12);
  }
  EXPECT_EQ(exact_correlation(m, {0, 1, 2}), 0.0);
  EXPECT_EQ(exact_correlation(m, {}), 1.0);
  EXPECT_THROW(exact_correlation(LatticeModel(2.0, 20, 1.0, Kernel::poly(1.0)), {0, 1}), UsageError);
}

TEST(LatticeModel, EnumerationIsLabelPermutationInvariant) {
  const LatticeModel m(2.0, 12, 2.0, Kernel::poly(1.0));
  EXPECT_NEAR(exact_correlation(m, {2, 9}), exact_correlation(m, {9, 2}), 1e-14);
  EXPECT_NEAR(exact_correlation(m, {1, 4, 8, 11}), exact_correlation(m, {11, 1, 8, 4}), 1e-14);
  // Reflection i -> N - i is a symmetry of the chain.
  EXPECT_NEAR(exact_correlation(m, {0, 5}), exact_correlation(m, {12, 7}), 1e-14);
}

TEST(LatticeModel, LargeCouplingsStayFinite) {
  const LatticeModel m(1.0, 14, 50.0, Kernel::poly(1.0));
  const double c = exact_correlation(m, {0, 14});
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(c, 0.9);
}

TEST(LatticeModel, MetropolisMatchesEnumeration) {
  const LatticeModel m(2.0, 10, 1.0, Kernel::single_mode(1.0, 1.0));
  const Estimate e = mcmc_correlation(m, {0, 5}, LatticeRun{200000, 2000, 9});
  EXPECT_LT(std::abs(e.mean - exact_correlation(m, {0, 5})), 4.0 * e.std_error) << e.mean << " +- " << e.std_error;
}

TEST(FortuinKasteleyn, ConnectivityEqualsCorrelation) {
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    const LatticeModel m(0.8, n, 1.3, Kernel::poly(1.0));
    EXPECT_NEAR(exact_fk_two_point(m, 0, n), exact_correlation(m, {0, n}), 1e-12) << n;
  }
}

TEST(FortuinKasteleyn, EdwardsSokalMatchesExact) {
  const LatticeModel m(0.8, 4, 1.3, Kernel::poly(1.0));
  const Estimate e = estimate_fk_two_point(m, 0, 4, LatticeRun{200000, 1000, 17});
  EXPECT_LT(std::abs(e.mean - exact_fk_two_point(m, 0, 4)), 4.0 * e.std_error);
}

TEST(FortuinKasteleyn, OnlyEqualSpinsConnect) {
  const LatticeModel m(1.0, 6, 2.0, Kernel::poly(1.0));
  const SpinConfig spins{1, 1, -1, -1, 1, -1, 1};
  FKConfig fk = fk_from_spins(m, spins, std::uint64_t{3});
  for (const auto& [i, j] : fk.open_edges) EXPECT_EQ(spins[i], spins[j]);
  for (std::size_t i = 0; i < spins.size(); ++i)
    for (std::size_t j = 0; j < spins.size(); ++j)
      if (fk.clusters.connected(i, j)) EXPECT_EQ(spins[i], spins[j]);
  EXPECT_THROW(fk_from_spins(m, SpinConfig{1, 1}, std::uint64_t{0}), UsageError);
}

TEST(BondPercolation, FreeChainIsProductOfNeighbours) {
  const LatticeModel m(2.0, 16, 0.0, Kernel::poly(1.0));
  const Estimate e = bond_percolation_two_point(m, 3, 7, 200000, 5);
  EXPECT_LT(std::abs(e.mean - std::pow(1.0 - 2.0 * m.spacing(), 4.0)), 4.0 * e.std_error);
}

TEST(BondPercolation, ThreeSitesClosedForm) {
  const LatticeModel m(0.6, 2, 3.0, Kernel::poly(1.0));
  const double p = m.bond_probability(0, 1), q = m.bond_probability(0, 2);
  const double exact = 1.0 - (1.0 - p * p) * (1.0 - q);
  const Estimate e = bond_percolation_two_point(m, 0, 2, 400000, 6);
  EXPECT_LT(std::abs(e.mean - exact), 4.0 * e.std_error) << e.mean << " vs " << exact;
}

TEST(BondPercolation, LongRangeThinningMatchesClosedForm) {
  // Exact enumeration of all six edges on four sites.
  const LatticeModel m(1.2, 3, 4.0, Kernel::poly(1.0));
  double exact = 0.0;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const std::size_t e[6][2] = {{0, 1}, {1, 2}, {2, 3}, {0, 2}, {1, 3}, {0, 3}};
    double w = 1.0;
    UnionFind uf(4);
    for (std::size_t k = 0; k < 6; ++k) {
      const double p = m.bond_probability(e[k][0], e[k][1]);
      if ((s >> k) & 1U) {
        w *= p;
        uf.unite(e[k][0], e[k][1]);
      } else {
        w *= 1.0 - p;
      }
    }
    if (uf.connected(0, 3)) exact += w;
  }
  const Estimate est = bond_percolation_two_point(m, 0, 3, 400000, 8);
  EXPECT_LT(std::abs(est.mean - exact), 4.0 * est.std_error) << est.mean << " vs " << exact;
}

TEST(BondPercolation, DominatedByFk) {
  const LatticeModel m(2.0, 16, 1.0, Kernel::poly(1.0));
  const Estimate fk = estimate_fk_two_point(m, 0, 8, LatticeRun{40000, 1000, 1});
  const Estimate bond = bond_percolation_two_point(m, 0, 8, 100000, 2);
  EXPECT_GE(fk.mean, bond.mean - 3.0 * combined_stderr(fk, bond));
  EXPECT_THROW(bond_percolation_two_point(LatticeModel(2.0, 4, 1.0, Kernel::poly(1.0)), 0, 1, 10, 0), ValidationError);
}

TEST(LatticeModel, SeedDeterminism) {
  const LatticeModel m(2.0, 12, 1.0, Kernel::poly(1.0));
  const Estimate a = mcmc_correlation(m, {0, 6}, LatticeRun{5000, 100, 77});
  const Estimate b = mcmc_correlation(m, {0, 6}, LatticeRun{5000, 100, 77});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}
