#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ibt/thermo_bogoliubov.hpp"
#include "ibt/units.hpp"

namespace {

using namespace ibt;

// Frozen reference values, computed independently with 50-digit arithmetic.
constexpr double omega_200 = 9.112670505823874e-4;  // hartree
constexpr double beta_300 = 1052.5834161649906;     // 1/hartree
constexpr double theta_300 = 0.72344020894166566;
constexpr double atanh_half = 0.54930614433405485;

TEST(Units, ReferenceConversions) {
  EXPECT_NEAR(units::wavenumber_to_hartree(200.0), omega_200, 1e-18);
  EXPECT_NEAR(InverseTemperature::from_kelvin(300.0).value(), beta_300, 1e-10);
  EXPECT_NEAR(units::fs_to_atomic_time(1.0), 41.341373335, 0.0);
}

TEST(MixingAngle, ZeroTemperatureIsExactlyZero) {
  EXPECT_EQ(mixing_angle(InverseTemperature::zero_temperature(), omega_200), 0.0);
  EXPECT_EQ(mixing_angle(InverseTemperature::zero_temperature(), 1.0), 0.0);
  EXPECT_TRUE(InverseTemperature::from_kelvin(0.0).is_zero_temperature());
}

TEST(MixingAngle, RoomTemperatureReference) {
  const double th = mixing_angle(InverseTemperature::from_kelvin(300.0), omega_200);
  EXPECT_NEAR(th, theta_300, 1e-14);
}

TEST(MixingAngle, HalfOccupationClosedForm) {
  // exp(-beta omega / 2) = 1/2
  const double omega = 1.0;
  const double beta = 2.0 * std::log(2.0);
  EXPECT_NEAR(mixing_angle(InverseTemperature::from_beta(beta), omega), atanh_half, 1e-15);
}

TEST(MixingAngle, RejectsNonPositiveBeta) {
  EXPECT_THROW(mixing_angle(InverseTemperature::from_beta(0.0), 1.0), std::domain_error);
  EXPECT_THROW(mixing_angle(InverseTemperature::from_beta(-1.0), 1.0), std::domain_error);
  EXPECT_THROW(mixing_angle(InverseTemperature::from_beta(1.0), 0.0), std::domain_error);
}

TEST(MixingAngle, BetaRoundTrip) {
  for (double th : {0.1, 0.5, 0.7234, 1.5, 3.0}) {
    const auto beta = beta_from_mixing_angle(th, omega_200);
    EXPECT_NEAR(mixing_angle(beta, omega_200), th, 1e-12 * th);
  }
  EXPECT_TRUE(beta_from_mixing_angle(0.0, omega_200).is_zero_temperature());
}

TEST(ThermalParams, ShiftsFromAlpha) {
  const ThermalParams p = ThermalParams::at_kelvin(300.0, omega_200, {0.25, -0.5});
  EXPECT_NEAR(p.delta_z(), std::numbers::sqrt2 * 0.25, 1e-16);
  EXPECT_NEAR(p.delta_p(), -std::numbers::sqrt2 * 0.5, 1e-16);
  EXPECT_NEAR(p.theta(), theta_300, 1e-14);
  EXPECT_NEAR(p.beta(), beta_300, 1e-10);
}

TEST(ShiftFunctions, Examples) {
  EXPECT_EQ(shift_xi(1.7, 0.0, 0.9), 1.7);
  EXPECT_EQ(shift_eta(1.7, 0.0, 0.9), 1.7);
  EXPECT_EQ(shift_xi(1.7, 2.0, 0.0), 1.7);
  EXPECT_EQ(shift_eta(1.7, 2.0, 0.0), 1.7);
  EXPECT_NEAR(shift_xi(1.0, 1.0, std::log(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(shift_eta(0.0, 1.0, std::log(2.0)), 1.0, 1e-15);
}

TEST(ShiftFunctions, InverseIdentityRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(-10, 10), a(-5, 5), t(0, 3);
  for (int i = 0; i < 10000; ++i) {
    const double xv = x(rng), av = a(rng), tv = t(rng);
    const double back = shift_xi(std::exp(-tv) * shift_eta(std::exp(tv) * xv, av, tv), av, tv);
    EXPECT_NEAR(back, xv, 1e-12 * std::max({1.0, std::abs(xv), std::abs(av)}));
  }
}

TEST(MapAB, IdentityAtZeroAngle) {
  const auto [a, b] = map_ab(0.3, -1.2, 0.0, 0.0);
  EXPECT_EQ(a, 0.3);
  EXPECT_EQ(b, -1.2);
}

TEST(MapAB, DiagonalContraction) {
  for (double th : {0.2, theta_300, 2.0}) {
    for (double c : {-2.0, 0.5, 3.0}) {
      const auto [a, b] = map_ab(c, c, 0.0, th);
      EXPECT_NEAR(a, c * std::exp(-th), 1e-14 * std::cosh(th) * std::abs(c));
      EXPECT_NEAR(b, c * std::exp(-th), 1e-14 * std::cosh(th) * std::abs(c));
    }
  }
}

TEST(MapAB, UnitJacobianAndInverse) {
  const double th = theta_300, shift = 0.4, h = 1e-4;
  for (double z : {-3.0, 0.1, 2.5}) {
    for (double zt : {-1.0, 0.7}) {
      const auto pz = map_ab(z + h, zt, shift, th), mz = map_ab(z - h, zt, shift, th);
      const auto pt = map_ab(z, zt + h, shift, th), mt = map_ab(z, zt - h, shift, th);
      const double j = ((pz.a - mz.a) * (pt.b - mt.b) - (pt.a - mt.a) * (pz.b - mz.b)) / (4 * h * h);
      EXPECT_NEAR(j, 1.0, 1e-9);
      const auto ab = map_ab(z, zt, shift, th);
      const auto back = map_ab_inverse(ab.a, ab.b, shift, th);
      EXPECT_NEAR(back.a, z, 1e-13);
      EXPECT_NEAR(back.b, zt, 1e-13);
    }
  }
}

TEST(MapAB, FixedPointIsTheShift) {
  // (Delta, Delta) is invariant for every angle.
  const double D = 0.8;
  for (double th : {0.3, 1.1}) {
    const auto [a, b] = map_ab(D, D, D, th);
    EXPECT_NEAR(a, D, 1e-14);
    EXPECT_NEAR(b, D, 1e-14);
  }
}

TEST(BTMatrix, Examples) {
  const auto id = bt_matrix(Statistics::boson, 0.0);
  EXPECT_EQ(id.entries[0][0], 1.0);
  EXPECT_EQ(id.entries[0][1], 0.0);
  EXPECT_EQ(id.entries[1][0], 0.0);
  EXPECT_EQ(id.entries[1][1], 1.0);
  const auto r = bt_matrix(Statistics::fermion, std::numbers::pi / 4);
  const double h = std::numbers::sqrt2 / 2;
  EXPECT_NEAR(r.entries[0][0], h, 1e-15);
  EXPECT_NEAR(r.entries[0][1], -h, 1e-15);
  EXPECT_NEAR(r.entries[1][0], h, 1e-15);
  EXPECT_NEAR(r.entries[1][1], h, 1e-15);
  EXPECT_THROW(bt_matrix(0, 1.0), std::invalid_argument);
  EXPECT_THROW(bt_matrix(2, 1.0), std::invalid_argument);
}

TEST(BTMatrix, IsometryAndDeterminantRandomAngles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> tb(0, 3), tf(0, std::numbers::pi);
  for (int i = 0; i < 2000; ++i) {
    const auto b = bt_matrix(Statistics::boson, tb(rng));
    const auto f = bt_matrix(Statistics::fermion, tf(rng));
    EXPECT_LE(b.isometry_residual(), 1e-12);
    EXPECT_LE(f.isometry_residual(), 1e-12);
    EXPECT_NEAR(b.determinant(), 1.0, 1e-12);
    EXPECT_NEAR(f.determinant(), 1.0, 1e-12);
  }
}

TEST(ThetaFromCondition, Limits) {
  EXPECT_NEAR(theta_from_condition(Statistics::fermion, InverseTemperature::from_beta(0.0), 1.0),
              std::numbers::pi / 4, 1e-16);
  EXPECT_EQ(theta_from_condition(Statistics::fermion, InverseTemperature::zero_temperature(), 1.0), 0.0);
  const auto beta = InverseTemperature::from_kelvin(300.0);
  EXPECT_NEAR(theta_from_condition(Statistics::boson, beta, omega_200), mixing_angle(beta, omega_200), 1e-14);
  EXPECT_THROW(theta_from_condition(Statistics::boson, InverseTemperature::from_beta(0.0), 1.0), std::domain_error);
}

TEST(GOfTheta, Values) {
  EXPECT_EQ(g_of_theta(0.0), -1.0);
  EXPECT_NEAR(g_of_theta(std::log(2.0)), -1.4426950408889634, 1e-15);
  EXPECT_NEAR(g_of_theta(1.0), -1.7182818284590452, 1e-15);
  EXPECT_NEAR(g_of_theta(1e-9), -1.0, 1e-8);
}

TEST(SqueezeGaussian, CentresAndMass) {
  const Grid1D g = Grid1D::symmetric(256, 12.0);
  const double delta = 0.5;
  for (double th : {0.0, theta_300, 1.2}) {
    for (double Delta : {0.0, delta}) {
      const GaussianSqueezeModel m{std::sqrt(0.5), delta, Delta, th};
      const auto f = squeeze_gaussian(m, g, g);
      EXPECT_NEAR(integrate_2d(f), 1.0, 1e-8);
      const auto c = squeeze_center(m);
      EXPECT_NEAR(c.a, transformed_center(m), 1e-12);
      EXPECT_NEAR(c.b, transformed_center(m), 1e-12);
    }
  }
  const GaussianSqueezeModel invariant{1.0, delta, delta, 1.3};
  EXPECT_NEAR(transformed_center(invariant), delta, 1e-12);
  const GaussianSqueezeModel plain{1.0, delta, 0.0, 1.3};
  EXPECT_NEAR(transformed_center(plain), std::exp(1.3) * delta, 1e-12);
}

}  // namespace
