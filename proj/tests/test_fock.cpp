#include <gtest/gtest.h>

#include <cmath>

#include "sbising/fock.hpp"

using namespace sbising;

namespace {

TruncatedModel one_mode(double lambda, int n_max, double omega = 1.0, double v = 1.0) {
  return TruncatedModel{{{omega, v}}, n_max, lambda};
}

}  // namespace

TEST(Fock, TwoLevelTruncationClosedForm) {
  // n_max = 1: the {↓0, ↑1} block [[0, c], [c, 3]] with c = λ κ v holds the ground state.
  for (double lambda : {0.3, 1.0, 2.5}) {
    const double c = lambda * kFieldScale;
    const SpectralResult r = diagonalize(one_mode(lambda, 1));
    EXPECT_NEAR(r.energy, (3.0 - std::sqrt(9.0 + 4.0 * c * c)) / 2.0, 1e-13);
    // Ground vector ∝ (c, E - 0)... normalised weight on ↓0: c² / (c² + E²).
    const double e = r.energy;
    EXPECT_NEAR(r.rho, c * c / (c * c + e * e), 1e-12);
  }
}

TEST(Fock, HamiltonianLayoutAndSymmetry) {
  const TruncatedModel m{{{1.0, 0.7}, {2.5, 0.4}}, 3, 1.2};
  const Eigen::MatrixXd h = build_hamiltonian(m);
  ASSERT_EQ(h.rows(), 32);
  EXPECT_LT((h - h.transpose()).norm(), 1e-15);
  EXPECT_EQ(h(16, 16), 0.0);  // ↓ vacuum
  EXPECT_EQ(h(0, 0), 2.0);    // ↑ vacuum
  // Parity σ_z (-1)^{N} commutes with H.
  const std::size_t B = 16;
  Eigen::VectorXd parity(32);
  for (std::size_t b = 0; b < B; ++b) {
    const int n = static_cast<int>(b / 4 + b % 4);
    const double p = n % 2 ? -1.0 : 1.0;
    parity(static_cast<Eigen::Index>(b)) = p;
    parity(static_cast<Eigen::Index>(B + b)) = -p;
  }
  const Eigen::MatrixXd P = parity.asDiagonal();
  EXPECT_LT((P * h - h * P).norm(), 1e-14);
}

TEST(Fock, UncoupledGroundState) {
  const SpectralResult r = ground_state_report(TruncatedModel{{{0.5, 1.0}, {3.0, 1.0}}, 4, 0.0});
  EXPECT_EQ(r.energy, 0.0);
  EXPECT_EQ(r.rho, 1.0);
  EXPECT_EQ(r.gap, 0.5);
  EXPECT_EQ(semigroup_overlap(one_mode(0.0, 4), 3.0), 1.0);
}

TEST(Fock, CutoffConvergence) {
  const CutoffReport rep = cutoff_convergence(one_mode(1.0, 0), {4, 6, 8, 10, 12, 14});
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LE(rep.rows[i].energy, rep.rows[i - 1].energy + 1e-14);
  EXPECT_LT(std::abs(rep.rows[5].energy - rep.rows[4].energy), 1e-8);
  EXPECT_TRUE(rep.converging);
  EXPECT_THROW(cutoff_convergence(one_mode(1.0, 0), {4, 4}), UsageError);
}

TEST(Fock, IndependentBosonLimit) {
  // Second order: the only intermediate state is ↑1 at energy 2 + ω.
  const double lambda = 0.05, c = lambda * kFieldScale;
  const SpectralResult r = diagonalize(one_mode(lambda, 10));
  EXPECT_NEAR(r.energy, -c * c / 3.0, 2e-3 * c * c);
  EXPECT_NEAR(1.0 - r.rho, c * c / 9.0, 2e-3 * c * c);
}

TEST(Fock, SemigroupOverlapLimits) {
  const TruncatedModel m = one_mode(1.5, 20);
  const SpectralResult r = diagonalize(m);
  EXPECT_NEAR(semigroup_overlap(r, 0.0), 1.0, 1e-12);
  // Large T: ⟨Ω, e^{-TH} Ω⟩ e^{T E} → ρ.
  EXPECT_NEAR(semigroup_overlap(r, 40.0) * std::exp(40.0 * r.energy), r.rho, 1e-10);
  EXPECT_NEAR(semigroup_correlation(m, 3.0, 0.0), 1.0, 1e-12);
  EXPECT_THROW(semigroup_correlation(m, 3.0, 4.0), UsageError);
}

TEST(Fock, Validation) {
  EXPECT_THROW(diagonalize(TruncatedModel{{}, 4, 1.0}), ValidationError);
  EXPECT_THROW(diagonalize(TruncatedModel{{{0.0, 1.0}}, 4, 1.0}), ValidationError);
  EXPECT_THROW(diagonalize(TruncatedModel{{{1.0, 1.0}}, 0, 1.0}), ValidationError);
  EXPECT_THROW(diagonalize(TruncatedModel{{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}, 20, 1.0}), ValidationError);
  EXPECT_THROW(semigroup_overlap(one_mode(1.0, 2), -1.0), UsageError);
}

TEST(Fock, KernelMatchesModes) {
  const TruncatedModel m{{{2.0, 0.5}, {0.5, 1.5}}, 2, 1.0};
  const Kernel k = m.kernel();
  EXPECT_NEAR(k(1.0), 0.25 * std::exp(-2.0) + 2.25 * std::exp(-0.5), 1e-15);
}
