#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibt {

using Complex = std::complex<double>;

/// Uniform periodic grid with n points x_min + i*dx, dx = (x_max - x_min)/n.
/// x_max itself is not a grid point (it is the periodic image of x_min).
class Grid1D {
 public:
  Grid1D(std::size_t n, double x_min, double x_max) : n_(n), x_min_(x_min), x_max_(x_max) {
    if (n < 8 || !std::has_single_bit(n)) {
      throw std::invalid_argument("Grid1D: point count must be a power of two >= 8, got " +
                                  std::to_string(n));
    }
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw std::invalid_argument("Grid1D: require finite x_min < x_max");
    }
    dx_ = (x_max - x_min) / static_cast<double>(n);
  }

  static Grid1D symmetric(std::size_t n, double halfwidth) { return {n, -halfwidth, halfwidth}; }

  std::size_t size() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  double last_point() const { return point(n_ - 1); }

  double point(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

  std::vector<double> points() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = point(i);
    return out;
  }

  /// Discrete Fourier frequency of bin i in standard FFT order (0, 1, .., n/2-1, -n/2, .., -1).
  double k(std::size_t i) const {
    const auto n = static_cast<double>(n_);
    const double m = i < n_ / 2 ? static_cast<double>(i) : static_cast<double>(i) - n;
    return 2.0 * std::numbers::pi * m / (n * dx_);
  }

  std::vector<double> k_values() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = k(i);
    return out;
  }

  /// Fractional index of x, i.e. (x - x_min)/dx.
  double fractional_index(double x) const { return (x - x_min_) / dx_; }

  bool operator==(const Grid1D&) const = default;

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  double dx_ = 0.0;
};

/// Real field on a (z, z~) product grid, row-major with z as the slow index.
struct Field2D {
  Grid1D grid_z;
  Grid1D grid_zt;
  std::vector<double> values;

  Field2D(Grid1D gz, Grid1D gzt) : grid_z(gz), grid_zt(gzt), values(gz.size() * gzt.size(), 0.0) {}
  Field2D(Grid1D gz, Grid1D gzt, std::vector<double> v)
      : grid_z(gz), grid_zt(gzt), values(std::move(v)) {
    if (values.size() != grid_z.size() * grid_zt.size()) {
      throw std::invalid_argument("Field2D: value count does not match grid shape");
    }
  }

  double& at(std::size_t i, std::size_t j) { return values[i * grid_zt.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid_zt.size() + j]; }
};

/// Complex amplitudes Phi(z_i, z~_j; t), row-major with z as the slow index.
struct WavefunctionGrid {
  Grid1D grid_z;
  Grid1D grid_zt;
  std::vector<Complex> amplitudes;
  double time = 0.0;  // atomic time units

  WavefunctionGrid(Grid1D gz, Grid1D gzt)
      : grid_z(gz), grid_zt(gzt), amplitudes(gz.size() * gzt.size()) {}

  Complex& at(std::size_t i, std::size_t j) { return amplitudes[i * grid_zt.size() + j]; }
  const Complex& at(std::size_t i, std::size_t j) const { return amplitudes[i * grid_zt.size() + j]; }

  double cell_area() const { return grid_z.dx() * grid_zt.dx(); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& c : amplitudes) s += std::norm(c);
    return s * cell_area();
  }

  void normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw std::invalid_argument("WavefunctionGrid: cannot normalize a zero state");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& c : amplitudes) c *= scale;
  }
};

/// Rectangle-rule quadrature, sum_i values_i * dx.
inline double integrate_1d(std::span<const double> values, const Grid1D& grid) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("integrate_1d: got " + std::to_string(values.size()) +
                                " values for a grid of " + std::to_string(grid.size()));
  }
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.dx();
}

inline double integrate_2d(const Field2D& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid_z.dx() * f.grid_zt.dx();
}

// ---------------------------------------------------------------------------
// Interpolation. Both schemes return 0 outside [x_0, x_{n-1}] and treat the
// nodes beyond the grid as zero (zero-tail convention).

enum class Interpolation { linear, cubic };

namespace detail {

// Four-point Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position t.
inline std::array<double, 4> cubic_weights(double t) {
  const double tm1 = t - 1.0;
  const double tm2 = t - 2.0;
  const double tp1 = t + 1.0;
  return {-t * tm1 * tm2 / 6.0, tp1 * tm1 * tm2 / 2.0, -tp1 * t * tm2 / 2.0, tp1 * t * tm1 / 6.0};
}

struct Stencil {
  bool inside = false;
  std::ptrdiff_t base = 0;  // node left of the query
  double t = 0.0;           // fractional offset in [0, 1]
};

inline Stencil locate(const Grid1D& g, double x) {
  const double u = g.fractional_index(x);
  const auto last = static_cast<double>(g.size() - 1);
  if (!(u >= 0.0) || u > last) return {};
  auto i = static_cast<std::ptrdiff_t>(std::floor(u));
  if (i >= static_cast<std::ptrdiff_t>(g.size()) - 1) i = static_cast<std::ptrdiff_t>(g.size()) - 2;
  return {true, i, u - static_cast<double>(i)};
}

template <class T>
T node_or_zero(std::span<const T> v, std::ptrdiff_t i) {
  return (i < 0 || i >= static_cast<std::ptrdiff_t>(v.size())) ? T{} : v[static_cast<std::size_t>(i)];
}

}  // namespace detail

template <class T>
T sample_1d(std::span<const T> values, const Grid1D& grid, double x, Interpolation scheme) {
  const auto s = detail::locate(grid, x);
  if (!s.inside) return T{};
  if (scheme == Interpolation::linear) {
    return (1.0 - s.t) * values[static_cast<std::size_t>(s.base)] +
           s.t * values[static_cast<std::size_t>(s.base + 1)];
  }
  const auto w = detail::cubic_weights(s.t);
  T acc{};
  for (std::ptrdiff_t o = -1; o <= 2; ++o) acc += w[o + 1] * detail::node_or_zero(values, s.base + o);
  return acc;
}

/// Samples a row-major (z, z~) array at an arbitrary point.
template <class T>
T sample_2d(std::span<const T> values, const Grid1D& gz, const Grid1D& gzt, double z, double zt,
            Interpolation scheme) {
  const auto sz = detail::locate(gz, z);
  const auto szt = detail::locate(gzt, zt);
  if (!sz.inside || !szt.inside) return T{};
  const auto nz = static_cast<std::ptrdiff_t>(gz.size());
  const auto nzt = static_cast<std::ptrdiff_t>(gzt.size());
  auto node = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> T {
    if (i < 0 || i >= nz || j < 0 || j >= nzt) return T{};
    return values[static_cast<std::size_t>(i * nzt + j)];
  };
  if (scheme == Interpolation::linear) {
    const double tz = sz.t;
    const double tt = szt.t;
    return (1.0 - tz) * ((1.0 - tt) * node(sz.base, szt.base) + tt * node(sz.base, szt.base + 1)) +
           tz * ((1.0 - tt) * node(sz.base + 1, szt.base) + tt * node(sz.base + 1, szt.base + 1));
  }
  const auto wz = detail::cubic_weights(sz.t);
  const auto wt = detail::cubic_weights(szt.t);
  T acc{};
  for (std::ptrdiff_t a = -1; a <= 2; ++a) {
    T row{};
    for (std::ptrdiff_t b = -1; b <= 2; ++b) row += wt[b + 1] * node(sz.base + a, szt.base + b);
    acc += wz[a + 1] * row;
  }
  return acc;
}

/// Bilinear interpolation of a field; 0 outside the grid rectangle.
inline double bilinear_sample(const Field2D& field, double z, double zt) {
  return sample_2d<double>(field.values, field.grid_z, field.grid_zt, z, zt, Interpolation::linear);
}

/// Tensor-product four-point Lagrange interpolation; 0 outside the grid rectangle.
inline double cubic_sample(const Field2D& field, double z, double zt) {
  return sample_2d<double>(field.values, field.grid_z, field.grid_zt, z, zt, Interpolation::cubic);
}

}  // namespace ibt
