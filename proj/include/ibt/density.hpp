#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "ibt/grid.hpp"

namespace ibt {

/// Real reduced 1-particle density on a 1D grid.
struct Density1D {
  Grid1D grid;
  std::vector<double> values;
  double norm_raw = 1.0;  // integral before renormalisation

  double integral() const { return integrate_1d(values, grid); }

  double moment(int n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * std::pow(grid.point(i), n);
    return s * grid.dx();
  }

  double mean() const { return moment(1) / integral(); }

  double variance() const {
    const double m0 = integral();
    const double mu = moment(1) / m0;
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = grid.point(i) - mu;
      s += values[i] * d * d;
    }
    return s * grid.dx() / m0;
  }

  /// Integral of the negative part.
  double negative_mass() const {
    double s = 0.0;
    for (double v : values) s += std::max(0.0, -v);
    return s * grid.dx();
  }
};

/// Scales a density to unit integral, recording the pre-scaling integral in norm_raw.
inline Density1D renormalized(Density1D d) {
  d.norm_raw = d.integral();
  if (d.norm_raw != 0.0) {
    for (auto& v : d.values) v /= d.norm_raw;
  }
  return d;
}

/// Discretised 1-RDM, entries(i, j) = <z_i| rho |z_j>.
struct DensityMatrix1D {
  Grid1D grid;
  std::vector<std::complex<double>> entries;  // row-major n x n

  explicit DensityMatrix1D(Grid1D g) : grid(g), entries(g.size() * g.size()) {}

  std::complex<double>& at(std::size_t i, std::size_t j) { return entries[i * grid.size() + j]; }
  const std::complex<double>& at(std::size_t i, std::size_t j) const { return entries[i * grid.size() + j]; }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += at(i, i).real();
    return s * grid.dx();
  }

  double hermiticity_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j)
        worst = std::max(worst, std::abs(at(i, j) - std::conj(at(j, i))));
    return worst;
  }

  Density1D diagonal() const {
    Density1D d{grid, std::vector<double>(grid.size()), 1.0};
    for (std::size_t i = 0; i < grid.size(); ++i) d.values[i] = at(i, i).real();
    return d;
  }
};

/// Real phase-space distribution on a (z, p) grid, row-major with z slow.
struct WignerGrid {
  Grid1D grid_z;
  Grid1D grid_p;
  std::vector<double> values;
  double imag_residue = 0.0;  // largest |Im W| discarded when taking the real part

  double& at(std::size_t i, std::size_t j) { return values[i * grid_p.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid_p.size() + j]; }

  /// integral over p, one value per z node.
  Density1D position_marginal() const {
    Density1D d{grid_z, std::vector<double>(grid_z.size(), 0.0), 1.0};
    for (std::size_t i = 0; i < grid_z.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < grid_p.size(); ++j) s += at(i, j);
      d.values[i] = s * grid_p.dx();
    }
    return d;
  }

  /// integral over z, one value per p node.
  Density1D momentum_marginal() const {
    Density1D d{grid_p, std::vector<double>(grid_p.size(), 0.0), 1.0};
    for (std::size_t i = 0; i < grid_z.size(); ++i)
      for (std::size_t j = 0; j < grid_p.size(); ++j) d.values[j] += at(i, j);
    for (auto& v : d.values) v *= grid_z.dx();
    return d;
  }
};

/// Momentum grid conjugate to anti-diagonal sampling with step 2*dz:
/// n points, spacing pi/(n dz), centred on zero.
inline Grid1D wigner_momentum_grid(const Grid1D& gz) {
  const double dp = std::numbers::pi / (static_cast<double>(gz.size()) * gz.dx());
  const double half = 0.5 * static_cast<double>(gz.size()) * dp;
  return {gz.size(), -half, half};
}

}  // namespace ibt
