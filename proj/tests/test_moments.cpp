#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ibt/moments.hpp"
#include "ibt/simplex.hpp"

namespace {

using namespace ibt;

// Raw moments of N(mean, var) by the recursion M_n = mean M_{n-1} + (n-1) var M_{n-2}.
std::vector<double> gaussian_moments(double mean, double var, int order) {
  std::vector<double> m(static_cast<std::size_t>(order + 1));
  m[0] = 1.0;
  if (order >= 1) m[1] = mean;
  for (int n = 2; n <= order; ++n) m[n] = mean * m[n - 1] + (n - 1) * var * m[n - 2];
  return m;
}

double gaussian(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2 * std::numbers::pi * var);
}

double l1_to(const Density1D& d, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.grid.size(); ++i) s += std::abs(d.values[i] - f(d.grid.point(i)));
  return s * d.grid.dx();
}

TEST(HermiteCoefficients, ZerothOrder) {
  const std::vector<double> m{1.0};
  for (double sigma : {0.3, 1.0, 2.5}) {
    const auto d = hermite_coefficients(m, sigma);
    EXPECT_NEAR(d[0], 1.0 / (std::sqrt(2 * std::numbers::pi) * sigma), 1e-15);
  }
  EXPECT_THROW(hermite_coefficients(m, 0.0), std::invalid_argument);
  EXPECT_THROW(hermite_coefficients(m, 1.0, 3), std::invalid_argument);
}

TEST(HermiteCoefficients, GaussianFixedPoint) {
  const double sigma = 0.9;
  const auto d = hermite_coefficients(gaussian_moments(0.0, sigma * sigma, 20), sigma);
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_NEAR(d[k], 0.0, 1e-10) << "k=" << k;
}

TEST(HermiteCoefficients, OddVanishForSymmetricData) {
  auto m = gaussian_moments(0.0, 1.7, 12);
  for (std::size_t n = 0; n < m.size(); n += 2) m[n] *= 1.0 + 0.01 * n;  // still symmetric, not Gaussian
  const auto d = hermite_coefficients(m, 1.0);
  for (std::size_t k = 1; k < d.size(); k += 2) EXPECT_EQ(d[k], 0.0);
}

TEST(HermiteExpansion, MomentRoundTrip) {
  // Any moment sequence is reproduced by its own expansion.
  const Grid1D g = Grid1D::symmetric(1024, 25.0);
  const auto m = gaussian_moments(0.4, 1.3, 12);
  std::vector<double> mm = m;
  mm[3] += 0.2;
  mm[4] += 0.5;
  for (double mu : {0.0, -0.4}) {
    const auto e = make_expansion(mm, 12, 1.1, mu);
    const auto v = e.on_grid(g);
    for (int n = 0; n <= 12; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += v[i] * std::pow(g.point(i), n);
      EXPECT_NEAR(s * g.dx(), mm[n], 1e-8 * std::max(1.0, std::abs(mm[n]))) << "n=" << n << " mu=" << mu;
    }
  }
}

TEST(ShiftMoments, Examples) {
  const auto m = gaussian_moments(0.2, 0.7, 8);
  EXPECT_EQ(shift_moments(m, 0.0), m);
  const auto s = shift_moments(m, 0.35);
  EXPECT_NEAR(s[1], m[1] + 0.35, 1e-15);
  const auto back = shift_moments(s, -0.35);
  for (std::size_t n = 0; n < m.size(); ++n) EXPECT_NEAR(back[n], m[n], 1e-12 * std::max(1.0, std::abs(m[n])));
  std::vector<double> delta(9);
  for (int n = 0; n <= 8; ++n) delta[n] = std::pow(1.5, n);
  const auto sd = shift_moments(delta, -0.25);
  for (int n = 0; n <= 8; ++n) EXPECT_NEAR(sd[n], std::pow(1.25, n), 1e-12 * std::pow(1.25, n));
}

TEST(ShiftMoments, TwoDimensional) {
  // Product of two delta distributions at (a, b): M_nm = a^n b^m.
  const int order = 6;
  auto m = make_triangular(order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) m[n][k] = std::pow(0.5, n) * std::pow(-1.2, k);
  const auto s = shift_moments_2d(m, 0.25, 0.7);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) EXPECT_NEAR(s[n][k], std::pow(0.75, n) * std::pow(-0.5, k), 1e-12);
}

TEST(NegativeNorm, NonNegativeAndZeroForDensities) {
  const Grid1D g = Grid1D::symmetric(64, 5.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = gaussian(g.point(i), 0, 1);
  EXPECT_EQ(negative_norm(v, g), 0.0);
  v[10] = -0.5;
  EXPECT_NEAR(negative_norm(v, g), 0.5 * g.dx(), 1e-15);
}

TEST(Reconstruction, PureGaussian) {
  const Grid1D g = Grid1D::symmetric(512, 12.0);
  const auto m = gaussian_moments(0.3, 0.8, 15);
  const auto r = reconstruct_density(m, 15, 1e-4, g);
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_LE(l1_to(r.density, [](double x) { return gaussian(x, 0.3, 0.8); }), 1e-6);
  EXPECT_NEAR(r.diagnostics.mu, -0.3, 1e-3);
  EXPECT_NEAR(r.diagnostics.sigma, std::sqrt(0.8), 1e-2);
}

TEST(Reconstruction, TwoGaussianMixture) {
  const Grid1D g = Grid1D::symmetric(512, 12.0);
  const auto a = gaussian_moments(1.0, 0.3, 15);
  const auto b = gaussian_moments(-1.0, 0.3, 15);
  std::vector<double> m(16);
  for (int n = 0; n <= 15; ++n) m[n] = 0.5 * (a[n] + b[n]);
  const auto r = reconstruct_density(m, 15, 1e-4, g);
  const double err =
      l1_to(r.density, [](double x) { return 0.5 * gaussian(x, 1.0, 0.3) + 0.5 * gaussian(x, -1.0, 0.3); });
  EXPECT_LT(err, 0.02);
  // Bimodal: the density at the centre lies below the peaks.
  const auto mid = r.density.values[g.size() / 2];
  const auto peak = r.density.values[static_cast<std::size_t>(g.fractional_index(1.0))];
  EXPECT_LT(mid, peak);
}

TEST(Reconstruction, DescendsOrdersAndReportsDiagnostics) {
  const Grid1D g = Grid1D::symmetric(512, 12.0);
  const auto m = gaussian_moments(0.0, 1.0, 20);
  const auto r = reconstruct_density(m, 20, 1e-4, g);
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_GE(r.diagnostics.order_used, 2);
  EXPECT_LE(r.diagnostics.order_used, 20);
  EXPECT_LE(r.diagnostics.negative_norm, 1e-4);
  EXPECT_NEAR(r.density.integral(), 1.0, 1e-12);
  std::vector<double> bad = m;
  bad[0] = 1.1;
  EXPECT_THROW(reconstruct_density(bad, 20, 1e-4, g), std::invalid_argument);
}

TEST(Reconstruction, NonConvergedIsFlagged) {
  // Moments of a uniform density on [-1, 1]: sharp edges cannot be matched without ringing.
  const Grid1D g = Grid1D::symmetric(512, 6.0);
  std::vector<double> m(21);
  for (int n = 0; n <= 20; ++n) m[n] = n % 2 ? 0.0 : 1.0 / (n + 1);
  const auto r = reconstruct_density(m, 20, 1e-12, g, {.min_order = 20});
  EXPECT_FALSE(r.diagnostics.converged);
  EXPECT_GT(r.diagnostics.negative_norm, 1e-12);
}

TEST(WignerCoefficients, ProductGaussianOnlyD00) {
  const double sz = 0.8, sp = 1.3;
  const int order = 8;
  const auto mz = gaussian_moments(0, sz * sz, order);
  const auto mp = gaussian_moments(0, sp * sp, order);
  auto m = make_triangular(order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) m[n][k] = mz[n] * mp[k];
  const auto d = wigner_coefficients(m, sz, sp);
  EXPECT_NEAR(d[0][0], 1.0 / (2 * std::numbers::pi * sz * sp), 1e-14);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) {
      if (n + k > 0) {
        EXPECT_NEAR(d[n][k], 0.0, 1e-10);
      }
    }
}

TEST(WignerCoefficients, SeparableIsOuterProduct) {
  const int order = 6;
  auto mz = gaussian_moments(0.3, 0.9, order);
  auto mp = gaussian_moments(-0.2, 1.4, order);
  mz[3] += 0.1;
  mp[4] += 0.3;
  auto m = make_triangular(order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) m[n][k] = mz[n] * mp[k];
  const auto d = wigner_coefficients(m, 1.0, 1.2);
  const auto dz = hermite_coefficients(mz, 1.0);
  const auto dp = hermite_coefficients(mp, 1.2);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) EXPECT_NEAR(d[n][k], dz[n] * dp[k], 1e-12);
}

TEST(WignerCoefficients, ParityInMomentum) {
  const int order = 6;
  auto m = make_triangular(order);
  const auto mz = gaussian_moments(0.4, 1.0, order);
  const auto mp = gaussian_moments(0.0, 0.7, order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) m[n][k] = mz[n] * mp[k] * (1.0 + 0.05 * n * (k % 2 == 0));
  const auto d = wigner_coefficients(m, 1.0, 1.0);
  for (int n = 0; n <= order; ++n)
    for (int k = 1; n + k <= order; k += 2) EXPECT_NEAR(d[n][k], 0.0, 1e-14);
}

TEST(WignerReconstruction, ThermalOscillatorGaussian) {
  const double v = 1.1212848234093296;  // cosh(2 theta)/2 at 300 K, 200 cm^-1
  const Grid1D gz = Grid1D::symmetric(256, 20.0);
  const Grid1D gp = Grid1D::symmetric(256, 10.0);
  const int order = 8;
  MomentTable t;
  t.position = gaussian_moments(0.5, v, 20);
  t.momentum = gaussian_moments(0.0, v, 20);
  t.cross = make_triangular(order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) t.cross[n][k] = t.position[n] * t.momentum[k];
  const auto rz = reconstruct_density(t, 20, 1e-4, gz);
  const auto rp = reconstruct_momentum_density(t, 20, 1e-4, gp);
  const auto w = reconstruct_wigner(t, order, rz, rp);
  double err = 0.0;
  for (std::size_t i = 0; i < gz.size(); ++i)
    for (std::size_t j = 0; j < gp.size(); ++j) {
      const double z = gz.point(i), p = gp.point(j);
      err += std::abs(w.wigner.at(i, j) - gaussian(z, 0.5, v) * gaussian(p, 0.0, v));
    }
  EXPECT_LT(err * gz.dx() * gp.dx(), 1e-3);
  EXPECT_TRUE(w.diagnostics.converged);
}

TEST(WignerReconstruction, SeparableSurfaceIsOuterProduct) {
  const Grid1D gz = Grid1D::symmetric(128, 10.0);
  const Grid1D gp = Grid1D::symmetric(128, 10.0);
  MomentTable t;
  t.position = gaussian_moments(0.2, 0.9, 20);
  t.momentum = gaussian_moments(0.0, 1.2, 20);
  t.cross = make_triangular(0);
  t.cross[0][0] = 1.0;
  const auto rz = reconstruct_density(t, 20, 1e-4, gz);
  const auto rp = reconstruct_momentum_density(t, 20, 1e-4, gp);
  const auto w = reconstruct_wigner(t, 0, rz, rp);
  // Order 0 is a single Gaussian; with Gaussian marginals the fit is their product.
  for (std::size_t i = 0; i < gz.size(); i += 7)
    for (std::size_t j = 0; j < gp.size(); j += 7)
      EXPECT_NEAR(w.wigner.at(i, j), rz.density.values[i] * rp.density.values[j], 1e-6);
}

TEST(Simplex, FindsQuadraticMinimum) {
  const std::vector<double> start{1.0, -2.0}, step{0.5, 0.5};
  const auto r = minimize_simplex(
      [](std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3) + 2 * (x[1] + 0.7) * (x[1] + 0.7); }, start,
      step, {.max_iterations = 500, .relative_tolerance = 1e-9});
  EXPECT_NEAR(r.x[0], 0.3, 1e-4);
  EXPECT_NEAR(r.x[1], -0.7, 1e-4);
}

}  // namespace
