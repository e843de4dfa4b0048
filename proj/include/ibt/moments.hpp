#pragma once

// Density reconstruction from finite moment sets with a shifted, scaled
// Hermite-function basis:
//
//   rho(z) = sum_k d_k H_k(y) e^{-y^2},   y = (z + mu) / (sqrt(2) sigma)
//
// The coefficients follow from the raw moments of the shifted distribution by
// a forward recursion, so an order-n expansion reproduces M_0..M_n exactly.
// (sigma, mu) are tuned to minimise the negative mass of the truncated series.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibt/density.hpp"
#include "ibt/grid.hpp"
#include "ibt/simplex.hpp"

namespace ibt {

/// Lower-triangular table t[n][m], n + m <= order.
using TriangularTable = std::vector<std::vector<double>>;

inline TriangularTable make_triangular(int order, double fill = 0.0) {
  TriangularTable t(static_cast<std::size_t>(order + 1));
  for (int n = 0; n <= order; ++n) t[n].assign(static_cast<std::size_t>(order - n + 1), fill);
  return t;
}

struct MomentTable {
  std::vector<double> position;  // M_{n0}, n = 0..n_max
  std::vector<double> momentum;  // M_{0m}; empty when not computed
  TriangularTable cross;         // Weyl-ordered M_{nm}, n + m <= cross order; empty when not computed

  int n_max() const { return static_cast<int>(position.size()) - 1; }
  int cross_order() const { return static_cast<int>(cross.size()) - 1; }
  bool has_momentum() const { return !momentum.empty(); }
  bool has_cross() const { return !cross.empty(); }
};

inline constexpr int max_hermite_order = 30;

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// H_k(y) e^{-y^2} for k = 0..order via the three-term recurrence.
inline void hermite_functions(int order, double y, std::span<double> out) {
  const double w = std::exp(-y * y);
  out[0] = w;
  if (order >= 1) out[1] = 2.0 * y * w;
  for (int k = 1; k < order; ++k) out[k + 1] = 2.0 * y * out[k] - 2.0 * k * out[k - 1];
}

/// Moments of the distribution translated by +mu:
/// M_n(mu) = sum_k C(n, k) mu^k M_{n-k}(0).
inline std::vector<double> shift_moments(std::span<const double> moments, double mu) {
  std::vector<double> out(moments.size(), 0.0);
  for (std::size_t n = 0; n < moments.size(); ++n) {
    double mu_k = 1.0;
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      s += binomial(static_cast<int>(n), static_cast<int>(k)) * mu_k * moments[n - k];
      mu_k *= mu;
    }
    out[n] = s;
  }
  return out;
}

inline MomentTable shift_moments(const MomentTable& table, double mu) {
  MomentTable out = table;
  out.position = shift_moments(table.position, mu);
  return out;
}

/// Two-dimensional translation of a Weyl moment table by (mu_z, mu_p).
inline TriangularTable shift_moments_2d(const TriangularTable& m, double mu_z, double mu_p) {
  const int order = static_cast<int>(m.size()) - 1;
  TriangularTable out = make_triangular(order);
  for (int n = 0; n <= order; ++n) {
    for (int k = 0; n + k <= order; ++k) {
      double s = 0.0;
      for (int a = 0; a <= n; ++a) {
        for (int b = 0; b <= k; ++b) {
          s += binomial(n, a) * binomial(k, b) * std::pow(mu_z, a) * std::pow(mu_p, b) * m[n - a][k - b];
        }
      }
      out[n][k] = s;
    }
  }
  return out;
}

/// Expansion coefficients d_0..d_order for a basis of width sigma centred at 0:
/// d_n = M_n / (sqrt(pi) sigma^{n+1} n! 2^{(n+1)/2}) - sum_{m>=1} d_{n-2m} / (2^{2m} m!).
inline std::vector<double> hermite_coefficients(std::span<const double> moments, double sigma,
                                                int order = -1) {
  if (!(sigma > 0.0)) throw std::invalid_argument("hermite_coefficients: sigma must be positive");
  if (order < 0) order = static_cast<int>(moments.size()) - 1;
  if (order > max_hermite_order) {
    throw std::invalid_argument("hermite_coefficients: order above " + std::to_string(max_hermite_order));
  }
  if (static_cast<int>(moments.size()) <= order) {
    throw std::invalid_argument("hermite_coefficients: not enough moments for requested order");
  }
  const double log_sigma = std::log(sigma);
  std::vector<double> d(static_cast<std::size_t>(order + 1), 0.0);
  for (int n = 0; n <= order; ++n) {
    const double log_pref = 0.5 * std::log(std::numbers::pi) + (n + 1) * log_sigma + std::lgamma(n + 1.0) +
                            0.5 * (n + 1) * std::numbers::ln2;
    double v = moments[n] * std::exp(-log_pref);
    double two_2m = 1.0;
    double m_fact = 1.0;
    for (int m = 1; 2 * m <= n; ++m) {
      two_2m *= 4.0;
      m_fact *= m;
      v -= d[n - 2 * m] / (two_2m * m_fact);
    }
    d[n] = v;
  }
  return d;
}

inline std::vector<double> hermite_coefficients(const MomentTable& table, double sigma, int order = -1) {
  return hermite_coefficients(table.position, sigma, order);
}

struct HermiteExpansion {
  std::vector<double> coefficients;
  double sigma = 1.0;
  double mu = 0.0;

  int order() const { return static_cast<int>(coefficients.size()) - 1; }

  double operator()(double z) const {
    std::vector<double> h(coefficients.size());
    return evaluate(z, h);
  }

  /// Evaluation with caller-provided scratch of size order()+1.
  double evaluate(double z, std::span<double> scratch) const {
    const double y = (z + mu) / (std::numbers::sqrt2 * sigma);
    hermite_functions(order(), y, scratch);
    double s = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) s += coefficients[k] * scratch[k];
    return s;
  }

  std::vector<double> on_grid(const Grid1D& g) const {
    std::vector<double> out(g.size());
    std::vector<double> h(coefficients.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = evaluate(g.point(i), h);
    return out;
  }
};

/// Order-`order` expansion with hyperparameters (sigma, mu) for the given raw moments.
inline HermiteExpansion make_expansion(std::span<const double> moments, int order, double sigma, double mu) {
  const auto shifted = shift_moments(moments.first(static_cast<std::size_t>(order + 1)), mu);
  return {hermite_coefficients(shifted, sigma, order), sigma, mu};
}

/// Integral of max(0, -f) by rectangle rule.
inline double negative_norm(std::span<const double> values, const Grid1D& grid) {
  double s = 0.0;
  for (double v : values) s += std::max(0.0, -v);
  return s * grid.dx();
}

/// How far the on-grid values miss the mass, mean and variance they should
/// carry: |1 - m0| + |mean - m1| / sd + |var - v| / v. An expansion matches
/// these moments on the real line by construction, so a defect means the grid
/// does not hold it (too wide, or lobes outside the box).
inline double moment_defect(std::span<const double> values, const Grid1D& grid, double mean, double var) {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double z = grid.point(i);
    m0 += values[i];
    m1 += values[i] * z;
    m2 += values[i] * z * z;
  }
  m0 *= grid.dx();
  m1 *= grid.dx();
  m2 *= grid.dx();
  return std::abs(1.0 - m0) + std::abs(m1 - mean) / std::sqrt(var) + std::abs(m2 - mean * mean - var) / var;
}

struct ReconstructionOptions {
  SimplexOptions simplex{};
  int min_order = 2;
};

struct ReconstructionDiagnostics {
  int order_used = 0;
  double negative_norm = 0.0;
  double moment_defect = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  bool converged = false;  // negative norm plus moment defect at or below the threshold
  int orders_tried = 0;
  int iterations = 0;      // simplex iterations summed over all orders tried
};

struct DensityReconstruction {
  Density1D density;
  HermiteExpansion expansion;
  ReconstructionDiagnostics diagnostics;
};

/// Reconstructs a 1D density from raw moments M_0..M_{n_max} on `grid`.
///
/// Starting at order n_max and descending, (log sigma, mu) are optimised by a
/// simplex search on negative norm + moment_defect, initialised from mu = -M_1
/// and sigma = sqrt(M_2 - M_1^2); the first order whose optimum is within
/// `threshold` is returned. If none is, the best-scoring expansion is returned
/// with converged = false. Without the mass term, corrupted high moments can
/// be "fitted" by a very wide expansion that is nonnegative only on the grid.
inline DensityReconstruction reconstruct_density(std::span<const double> moments, int n_max, double threshold,
                                                 const Grid1D& grid, const ReconstructionOptions& opt = {}) {
  if (n_max < 2) throw std::invalid_argument("reconstruct_density: n_max must be >= 2");
  if (static_cast<int>(moments.size()) <= n_max) {
    throw std::invalid_argument("reconstruct_density: need moments up to order n_max");
  }
  if (std::abs(moments[0] - 1.0) > 1e-8) {
    throw std::invalid_argument("reconstruct_density: zeroth moment must be 1");
  }
  const double mean = moments[1];
  const double var = moments[2] - mean * mean;
  if (!(var > 0.0)) throw std::invalid_argument("reconstruct_density: non-positive variance");

  const double sigma0 = std::sqrt(var);
  const double mu0 = -mean;
  const std::vector<double> start{std::log(sigma0), mu0};
  const std::vector<double> step{0.1, 0.1 * sigma0};

  HermiteExpansion best;
  double best_score = std::numeric_limits<double>::infinity();
  ReconstructionDiagnostics diag;
  std::vector<double> values(grid.size());

  for (int order = n_max; order >= std::max(opt.min_order, 2); --order) {
    auto score = [&](std::span<const double> x) {
      const auto e = make_expansion(moments, order, std::exp(x[0]), x[1]);
      std::vector<double> h(static_cast<std::size_t>(order + 1));
      for (std::size_t i = 0; i < grid.size(); ++i) values[i] = e.evaluate(grid.point(i), h);
      return negative_norm(values, grid) + moment_defect(values, grid, mean, var);
    };
    SimplexOptions so = opt.simplex;
    so.target = 1e-12;  // the moment defect is only zero to rounding
    const auto r = minimize_simplex(score, start, step, so);
    ++diag.orders_tried;
    diag.iterations += r.iterations;
    if (r.value < best_score) {
      best_score = r.value;
      best = make_expansion(moments, order, std::exp(r.x[0]), r.x[1]);
    }
    if (r.value <= threshold) break;
  }

  const auto on_grid = best.on_grid(grid);
  diag.order_used = best.order();
  diag.negative_norm = negative_norm(on_grid, grid);
  diag.moment_defect = moment_defect(on_grid, grid, mean, var);
  diag.sigma = best.sigma;
  diag.mu = best.mu;
  diag.converged = best_score <= threshold;
  return {renormalized(Density1D{grid, on_grid, 1.0}), best, diag};
}

inline DensityReconstruction reconstruct_density(const MomentTable& table, int n_max, double threshold,
                                                 const Grid1D& grid, const ReconstructionOptions& opt = {}) {
  return reconstruct_density(table.position, n_max, threshold, grid, opt);
}

/// Same pipeline driven by the momentum moments M_{0m}.
inline DensityReconstruction reconstruct_momentum_density(const MomentTable& table, int n_max, double threshold,
                                                          const Grid1D& p_grid,
                                                          const ReconstructionOptions& opt = {}) {
  if (!table.has_momentum()) throw std::invalid_argument("reconstruct_momentum_density: no momentum moments");
  return reconstruct_density(table.momentum, n_max, threshold, p_grid, opt);
}

// ---------------------------------------------------------------------------
// Two-dimensional (Wigner) expansion
//
//   W(z, p) = sum_{k,l} d_kl H_k(y_z) H_l(y_p) e^{-y_z^2 - y_p^2}
//
// truncated at total degree k + l <= order.

/// d_nm = M_nm / (s_nm 2^{n+m}) - sum_{(k,l) != (0,0)} d_{n-2k,m-2l} / (2^{2k+2l} k! l!),
/// s_nm = pi sigma_z^{n+1} sigma_p^{m+1} n! m! 2^{(2-n-m)/2}.
inline TriangularTable wigner_coefficients(const TriangularTable& moments, double sigma_z, double sigma_p) {
  if (!(sigma_z > 0.0) || !(sigma_p > 0.0)) {
    throw std::invalid_argument("wigner_coefficients: widths must be positive");
  }
  const int order = static_cast<int>(moments.size()) - 1;
  if (order < 0) throw std::invalid_argument("wigner_coefficients: empty moment table");
  if (order > max_hermite_order) throw std::invalid_argument("wigner_coefficients: order too high");
  const double lz = std::log(sigma_z);
  const double lp = std::log(sigma_p);
  TriangularTable d = make_triangular(order);
  for (int total = 0; total <= order; ++total) {
    for (int n = 0; n <= total; ++n) {
      const int m = total - n;
      const double log_pref = std::log(std::numbers::pi) + (n + 1) * lz + (m + 1) * lp + std::lgamma(n + 1.0) +
                              std::lgamma(m + 1.0) + (0.5 * (2 - n - m) + n + m) * std::numbers::ln2;
      double v = moments[n][m] * std::exp(-log_pref);
      double k_fact = 1.0;
      for (int k = 0; 2 * k <= n; ++k) {
        if (k > 0) k_fact *= k;
        double l_fact = 1.0;
        for (int l = 0; 2 * l <= m; ++l) {
          if (l > 0) l_fact *= l;
          if (k == 0 && l == 0) continue;
          v -= d[n - 2 * k][m - 2 * l] / (std::ldexp(1.0, 2 * k + 2 * l) * k_fact * l_fact);
        }
      }
      d[n][m] = v;
    }
  }
  return d;
}

struct WignerExpansion {
  TriangularTable coefficients;
  double sigma_z = 1.0;
  double sigma_p = 1.0;
  double mu_z = 0.0;
  double mu_p = 0.0;

  int order() const { return static_cast<int>(coefficients.size()) - 1; }

  double operator()(double z, double p) const {
    const int n = order();
    std::vector<double> hz(static_cast<std::size_t>(n + 1));
    std::vector<double> hp(static_cast<std::size_t>(n + 1));
    hermite_functions(n, (z + mu_z) / (std::numbers::sqrt2 * sigma_z), hz);
    hermite_functions(n, (p + mu_p) / (std::numbers::sqrt2 * sigma_p), hp);
    double s = 0.0;
    for (int k = 0; k <= n; ++k)
      for (int l = 0; k + l <= n; ++l) s += coefficients[k][l] * hz[k] * hp[l];
    return s;
  }

  /// Analytic integral over p (depends on the d_k0 column only).
  HermiteExpansion position_marginal() const {
    std::vector<double> c(coefficients.size());
    const double w = std::sqrt(2.0 * std::numbers::pi) * sigma_p;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = coefficients[k][0] * w;
    return {c, sigma_z, mu_z};
  }

  /// Analytic integral over z (depends on the d_0l row only).
  HermiteExpansion momentum_marginal() const {
    const auto& row = coefficients[0];
    std::vector<double> c(row.size());
    const double w = std::sqrt(2.0 * std::numbers::pi) * sigma_z;
    for (std::size_t l = 0; l < c.size(); ++l) c[l] = row[l] * w;
    return {c, sigma_p, mu_p};
  }

  WignerGrid on_grid(const Grid1D& gz, const Grid1D& gp) const {
    const int n = order();
    const auto nk = static_cast<std::size_t>(n + 1);
    std::vector<double> hz(nk * gz.size());
    std::vector<double> hp(nk * gp.size());
    std::vector<double> tmp(nk);
    for (std::size_t i = 0; i < gz.size(); ++i) {
      hermite_functions(n, (gz.point(i) + mu_z) / (std::numbers::sqrt2 * sigma_z), tmp);
      for (std::size_t k = 0; k < nk; ++k) hz[k * gz.size() + i] = tmp[k];
    }
    for (std::size_t j = 0; j < gp.size(); ++j) {
      hermite_functions(n, (gp.point(j) + mu_p) / (std::numbers::sqrt2 * sigma_p), tmp);
      for (std::size_t l = 0; l < nk; ++l) hp[l * gp.size() + j] = tmp[l];
    }
    WignerGrid w{gz, gp, std::vector<double>(gz.size() * gp.size(), 0.0), 0.0};
    std::vector<double> row(gp.size());
    for (int k = 0; k <= n; ++k) {
      // row(p) = sum_l d_kl h_l(p)
      std::fill(row.begin(), row.end(), 0.0);
      for (int l = 0; k + l <= n; ++l) {
        const double c = coefficients[k][l];
        if (c == 0.0) continue;
        const double* h = &hp[static_cast<std::size_t>(l) * gp.size()];
        for (std::size_t j = 0; j < gp.size(); ++j) row[j] += c * h[j];
      }
      const double* hk = &hz[static_cast<std::size_t>(k) * gz.size()];
      for (std::size_t i = 0; i < gz.size(); ++i) {
        const double a = hk[i];
        if (a == 0.0) continue;
        double* out = &w.values[i * gp.size()];
        for (std::size_t j = 0; j < gp.size(); ++j) out[j] += a * row[j];
      }
    }
    return w;
  }
};

inline WignerExpansion make_wigner_expansion(const TriangularTable& moments, int order, double sigma_z,
                                             double sigma_p, double mu_z, double mu_p) {
  TriangularTable m = make_triangular(order);
  for (int n = 0; n <= order; ++n)
    for (int k = 0; n + k <= order; ++k) m[n][k] = moments[n][k];
  return {wigner_coefficients(shift_moments_2d(m, mu_z, mu_p), sigma_z, sigma_p), sigma_z, sigma_p, mu_z, mu_p};
}

struct WignerReconstructionDiagnostics {
  double marginal_mismatch = 0.0;  // L1 |rho_z - int W dp| + L1 |rho_p - int W dz| on the output grid
  bool converged = false;
  int iterations = 0;
};

struct WignerReconstruction {
  WignerGrid wigner;
  WignerExpansion expansion;
  WignerReconstructionDiagnostics diagnostics;
};

/// Reconstructs W(z, p) from Weyl moments up to total degree `order`.
///
/// The 1D position and momentum reconstructions provide the target marginals
/// and the starting hyperparameters; {sigma_z, sigma_p, mu_z, mu_p} are then
/// tuned by a simplex search on the summed L1 marginal mismatch.
inline WignerReconstruction reconstruct_wigner(const MomentTable& table, int order,
                                               const DensityReconstruction& position,
                                               const DensityReconstruction& momentum,
                                               const SimplexOptions& simplex = {.max_iterations = 1000}) {
  if (!table.has_cross() || table.cross_order() < order) {
    throw std::invalid_argument("reconstruct_wigner: cross moments up to the requested order are required");
  }
  if (order < 0 || order > max_hermite_order) throw std::invalid_argument("reconstruct_wigner: bad order");
  const Grid1D& gz = position.density.grid;
  const Grid1D& gp = momentum.density.grid;
  const auto& rz = position.density.values;
  const auto& rp = momentum.density.values;

  auto mismatch_of = [&](const WignerExpansion& e) {
    const auto mz = e.position_marginal().on_grid(gz);
    const auto mp = e.momentum_marginal().on_grid(gp);
    double s = 0.0;
    for (std::size_t i = 0; i < gz.size(); ++i) s += std::abs(rz[i] - mz[i]) * gz.dx();
    for (std::size_t j = 0; j < gp.size(); ++j) s += std::abs(rp[j] - mp[j]) * gp.dx();
    return s;
  };

  const std::vector<double> start{std::log(position.expansion.sigma), std::log(momentum.expansion.sigma),
                                  position.expansion.mu, momentum.expansion.mu};
  const std::vector<double> step{0.05, 0.05, 0.05 * position.expansion.sigma, 0.05 * momentum.expansion.sigma};
  auto build = [&](std::span<const double> x) {
    return make_wigner_expansion(table.cross, order, std::exp(x[0]), std::exp(x[1]), x[2], x[3]);
  };
  SimplexOptions so = simplex;
  so.target = 0.0;
  const auto r = minimize_simplex([&](std::span<const double> x) { return mismatch_of(build(x)); }, start, step, so);

  WignerReconstruction out{{gz, gp, {}, 0.0}, build(r.x), {}};
  out.wigner = out.expansion.on_grid(gz, gp);
  const auto mz = out.wigner.position_marginal();
  const auto mp = out.wigner.momentum_marginal();
  double s = 0.0;
  for (std::size_t i = 0; i < gz.size(); ++i) s += std::abs(rz[i] - mz.values[i]) * gz.dx();
  for (std::size_t j = 0; j < gp.size(); ++j) s += std::abs(rp[j] - mp.values[j]) * gp.dx();
  out.diagnostics = {s, r.converged, r.iterations};
  return out;
}

}  // namespace ibt
