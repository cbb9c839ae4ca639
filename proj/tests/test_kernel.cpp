#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sbising/errors.hpp"
#include "sbising/kernel.hpp"
#include "sbising/rng.hpp"

using sbising::Kernel;

TEST(Kernel, SingleModeClosedForms) {
  const Kernel k = Kernel::single_mode(2.0, 0.5);
  EXPECT_NEAR(k(0.0), 2.0, 1e-15);
  EXPECT_NEAR(k(-3.0), 2.0 * std::exp(-1.5), 1e-14);
  EXPECT_NEAR(k.first_antiderivative(3.0), 4.0 * (1.0 - std::exp(-1.5)), 1e-13);
  // G(x) = w (f x - 1 + e^{-f x}) / f².
  EXPECT_NEAR(k.second_antiderivative(3.0), 2.0 * (1.5 - 1.0 + std::exp(-1.5)) / 0.25, 1e-12);
  EXPECT_NEAR(k.overlap_bound_integral(), 2.0 / (2.5 * 2.5), 1e-14);
}

TEST(Kernel, SmallArgumentSeriesIsContinuous) {
  const Kernel k = Kernel::single_mode(1.0, 1.0);
  for (double x : {0.0999, 0.1, 0.1001, 1e-6, 1e-9}) {
    const double exact = x - 1.0 + std::exp(-x);
    EXPECT_NEAR(k.second_antiderivative(x), exact, 1e-12 * std::max(1.0, exact) + 1e-17) << x;
  }
}

TEST(Kernel, PolyClosedForms) {
  const Kernel k = Kernel::poly(1.5);
  EXPECT_NEAR(k(2.0), 1.5 / 5.0, 1e-15);
  EXPECT_NEAR(k.first_antiderivative(2.0), 1.5 * std::atan(2.0), 1e-14);
  EXPECT_NEAR(k.first_moment(10.0), 0.75 * std::log(101.0), 1e-12);
}

TEST(Kernel, AntiderivativesMatchSimpson) {
  for (const Kernel& k : {Kernel::poly(1.0), Kernel::modes({{1.0, 1.0}, {0.3, 0.2}}), Kernel::power_law(3, 0.5, 2.0)}) {
    const double x = 2.7;
    EXPECT_NEAR(k.first_antiderivative(x), oracle::simpson([&](double t) { return k(t); }, 0.0, x), 1e-8) << k.id();
    EXPECT_NEAR(k.second_antiderivative(x),
                oracle::simpson([&](double t) { return k.first_antiderivative(t); }, 0.0, x, 2000), 1e-8)
        << k.id();
    EXPECT_NEAR(k.first_moment(x), oracle::simpson([&](double t) { return t * k(t); }, 0.0, x), 1e-8) << k.id();
  }
}

TEST(Kernel, PowerLawMatchesRadialIntegral) {
  // g(t) = 4π ∫_0^K r^{2 - 2δ} e^{-r t} dr in three dimensions.
  const Kernel k = Kernel::power_law(3, 0.75, 1.5);
  for (double t : {0.0, 0.4, 3.0}) {
    const double ref = 4.0 * std::numbers::pi *
                       oracle::simpson([&](double r) { return std::sqrt(r) * std::exp(-r * t); }, 0.0, 1.5, 200000);
    EXPECT_NEAR(k(t), ref, 1e-6 * ref) << t;
  }
  EXPECT_NEAR(Kernel::power_law(3, 1.0, 1.0)(0.0), 4.0 * std::numbers::pi, 1e-12);
  // Singular weight r^{-1/2} in one dimension: 2 ∫_0^1 r^{-1/2} dr = 4.
  EXPECT_NEAR(Kernel::power_law(1, 0.25, 1.0)(0.0), 4.0, 1e-8);
}

TEST(Kernel, BoxIntegralMatchesMidpointRule) {
  const Kernel k = Kernel::poly(1.0);
  const double exact = k.box_integral(0.0, 1.0, 1.5, 3.0);
  EXPECT_NEAR(exact, oracle::box_midpoint([&](double u) { return k(u); }, 0.0, 1.0, 1.5, 3.0), 1e-6);
  const Kernel m = Kernel::single_mode(1.0, 1.0);
  // Overlapping boxes include the diagonal.
  EXPECT_NEAR(m.box_integral(0.0, 1.0, 0.0, 1.0), 2.0 * std::exp(-1.0), 1e-13);
  EXPECT_NEAR(m.box_integral(0.0, 1.0, 0.5, 2.0), oracle::box_midpoint([&](double u) { return m(u); }, 0.0, 1.0, 0.5, 2.0), 1e-5);
  EXPECT_THROW(m.box_integral(1.0, 0.0, 0.0, 1.0), sbising::UsageError);
}

TEST(Kernel, OverlapBoundIntegralMatchesSimpson) {
  const Kernel k = Kernel::poly(1.0);
  const double ref = oracle::simpson([](double t) { return t * std::exp(-2.0 * t) / (1.0 + t * t); }, 0.0, 40.0, 200000);
  EXPECT_NEAR(k.overlap_bound_integral(), ref, 1e-9);
}

TEST(Kernel, InfraredClassification) {
  const std::vector<double> horizons{10, 100, 1000, 10000};
  EXPECT_EQ(sbising::classify_infrared(Kernel::single_mode(1.0, 1.0), horizons).label, sbising::InfraredLabel::Regular);
  EXPECT_EQ(sbising::classify_infrared(Kernel::poly(1.0), horizons).label, sbising::InfraredLabel::DivergentLog);
  // d = 3, δ = 1: g(t) ~ 4π/t, so ∫ t g grows linearly.
  EXPECT_EQ(sbising::classify_infrared(Kernel::power_law(3, 1.0, 1.0), horizons).label,
            sbising::InfraredLabel::DivergentPower);
}

TEST(Kernel, RejectsInvalidParameters) {
  EXPECT_THROW(Kernel::single_mode(-1.0, 1.0), sbising::ValidationError);
  EXPECT_THROW(Kernel::single_mode(1.0, 0.0), sbising::ValidationError);
  EXPECT_THROW(Kernel::power_law(4, 0.5, 1.0), sbising::ValidationError);
  EXPECT_THROW(Kernel::power_law(3, 1.5, 1.0), sbising::ValidationError);
  EXPECT_THROW(Kernel::power_law(2, 0.5, 0.0), sbising::ValidationError);
  EXPECT_THROW(Kernel::poly(-0.1), sbising::ValidationError);
}

TEST(Kernel, MarginalPowerLawIsLogDivergent) {
  // d = 3, δ = 1/2: g(t) ~ 4π / t², so ∫ t g grows like 4π log T.
  const auto r = sbising::classify_infrared(Kernel::power_law(3, 0.5, 1.0), {10, 100, 1000, 10000});
  EXPECT_EQ(r.label, sbising::InfraredLabel::DivergentLog);
}

TEST(Kernel, SpecExamples) {
  EXPECT_NEAR(Kernel::single_mode(1.0, 1.0)(2.0), 0.135335, 1e-6);
  EXPECT_NEAR(Kernel::poly(1.0)(3.0), 0.1, 1e-15);
  EXPECT_NEAR(Kernel::poly(1.0).first_antiderivative(1.0), std::numbers::pi / 4.0, 1e-15);
  EXPECT_EQ(Kernel::poly(1.0).first_antiderivative(0.0), 0.0);
  EXPECT_NEAR(Kernel::single_mode(1.0, 1.0).box_integral(0.0, 1.0, 0.0, 1.0), 0.735759, 1e-6);
  EXPECT_EQ(Kernel::poly(1.0).box_integral(0.5, 0.5, 0.0, 1.0), 0.0);
  EXPECT_NEAR(Kernel::single_mode(1.0, 1.0).overlap_bound_integral(), 1.0 / 9.0, 1e-15);
  EXPECT_EQ(Kernel::modes({}).overlap_bound_integral(), 0.0);
  // Reference from 30-digit quadrature.
  EXPECT_NEAR(Kernel::poly(1.0).overlap_bound_integral(), 0.144545303037332, 1e-12);
  const auto r = sbising::classify_infrared(Kernel::single_mode(1.0, 1.0), {10, 20, 40});
  for (double v : r.values) EXPECT_NEAR(v, 1.0, 1e-3);
  EXPECT_EQ(r.label, sbising::InfraredLabel::Regular);
  EXPECT_THROW(sbising::classify_infrared(Kernel::poly(1.0), {1, 2}), sbising::UsageError);
}

TEST(Kernel, EvenAndNonnegative) {
  sbising::Rng rng(1);
  for (const Kernel& k : {Kernel::poly(2.0), Kernel::modes({{1.0, 0.5}, {2.0, 3.0}}), Kernel::power_law(2, 0.3, 1.0)}) {
    for (int i = 0; i < 200; ++i) {
      const double t = rng.uniform(-20.0, 20.0);
      EXPECT_EQ(k(t), k(-t));
      EXPECT_GE(k(t), 0.0);
    }
  }
}
