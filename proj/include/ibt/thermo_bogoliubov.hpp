#pragma once

// Closed-form thermal Bogoliubov algebra for one mode and its tilde partner:
// mixing angles, displaced-transform shift functions, the (z, z~) -> (a, b)
// coordinate map, two-mode BT matrices and the analytic squeezing model.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "ibt/grid.hpp"
#include "ibt/units.hpp"

namespace ibt {

/// Inverse temperature beta = 1/(k_B T) in 1/hartree, with an explicit
/// zero-temperature state so that theta = 0 is exact rather than the limit of
/// a huge float.
class InverseTemperature {
 public:
  static InverseTemperature zero_temperature() { return InverseTemperature(); }
  static InverseTemperature from_beta(double beta) { return InverseTemperature(beta); }
  static InverseTemperature from_kelvin(double kelvin) {
    if (kelvin == 0.0) return zero_temperature();
    return InverseTemperature(1.0 / (units::boltzmann_hartree_per_kelvin * kelvin));
  }

  bool is_zero_temperature() const { return !beta_.has_value(); }

  /// +infinity at zero temperature.
  double value() const { return beta_ ? *beta_ : std::numeric_limits<double>::infinity(); }

 private:
  InverseTemperature() = default;
  explicit InverseTemperature(double beta) : beta_(beta) {}
  std::optional<double> beta_;
};

/// Bosonic mixing angle theta = arctanh(exp(-beta*omega/2)); exactly 0 at zero temperature.
inline double mixing_angle(InverseTemperature beta, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("mixing_angle: omega must be positive");
  if (beta.is_zero_temperature()) return 0.0;
  if (!(beta.value() > 0.0)) {
    throw std::domain_error("mixing_angle: beta must be positive (infinite temperature has no finite angle)");
  }
  return std::atanh(std::exp(-0.5 * beta.value() * omega));
}

/// Inverse of mixing_angle for fixed omega: beta such that tanh(theta) = exp(-beta*omega/2).
inline InverseTemperature beta_from_mixing_angle(double theta, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("beta_from_mixing_angle: omega must be positive");
  if (theta == 0.0) return InverseTemperature::zero_temperature();
  if (!(theta > 0.0)) throw std::domain_error("beta_from_mixing_angle: theta must be >= 0");
  return InverseTemperature::from_beta(-2.0 * std::log(std::tanh(theta)) / omega);
}

enum class Component { position, momentum };

/// Thermal parameters of one physical mode: beta, omega, theta(beta) and the
/// complex displacement alpha with its position/momentum shifts sqrt(2)*Re/Im(alpha).
class ThermalParams {
 public:
  ThermalParams(InverseTemperature beta, double omega, std::complex<double> alpha = {})
      : beta_(beta), omega_(omega), theta_(mixing_angle(beta, omega)), alpha_(alpha) {}

  static ThermalParams zero_temperature(double omega, std::complex<double> alpha = {}) {
    return {InverseTemperature::zero_temperature(), omega, alpha};
  }
  static ThermalParams at_kelvin(double kelvin, double omega, std::complex<double> alpha = {}) {
    return {InverseTemperature::from_kelvin(kelvin), omega, alpha};
  }
  static ThermalParams from_mixing_angle(double theta, double omega, std::complex<double> alpha = {}) {
    return {beta_from_mixing_angle(theta, omega), omega, alpha};
  }

  InverseTemperature inverse_temperature() const { return beta_; }
  double beta() const { return beta_.value(); }
  bool is_zero_temperature() const { return beta_.is_zero_temperature(); }
  double omega() const { return omega_; }
  double theta() const { return theta_; }
  double cosh_theta() const { return std::cosh(theta_); }
  double sinh_theta() const { return std::sinh(theta_); }
  std::complex<double> alpha() const { return alpha_; }
  double delta_z() const { return std::numbers::sqrt2 * alpha_.real(); }
  double delta_p() const { return std::numbers::sqrt2 * alpha_.imag(); }
  double shift(Component c) const { return c == Component::position ? delta_z() : delta_p(); }

 private:
  InverseTemperature beta_;
  double omega_;
  double theta_;
  std::complex<double> alpha_;
};

// ---------------------------------------------------------------------------
// Shift functions of the displaced Bogoliubov transform.
//   xi(x)  = x - shift*(1 - e^{-theta})
//   eta(x) = x + shift*(e^{theta} - 1)
// with xi(e^{-theta} * eta(e^{theta} x)) = x.

inline double shift_xi(double x, double shift, double theta) { return x - shift * (1.0 - std::exp(-theta)); }
inline double shift_eta(double x, double shift, double theta) { return x + shift * std::expm1(theta); }

/// Position-space maps use delta_z; momentum-space maps use delta_p.
inline double shift_xi(double x, const ThermalParams& p, Component c = Component::position) {
  return shift_xi(x, p.shift(c), p.theta());
}
inline double shift_eta(double x, const ThermalParams& p, Component c = Component::position) {
  return shift_eta(x, p.shift(c), p.theta());
}

struct CoordinatePair {
  double a;
  double b;
};

/// iBT coordinates (a, b) at which the iBT wavefunction is evaluated to obtain
/// the thermofield wavefunction at physical coordinates (z, z~).
inline CoordinatePair map_ab(double z, double zt, double shift, double theta) {
  const double c = std::cosh(theta);
  const double s = std::sinh(theta);
  const double ez = shift_eta(z, shift, theta);
  const double et = shift_eta(zt, shift, theta);
  return {ez * c - et * s, -ez * s + et * c};
}

inline CoordinatePair map_ab(double z, double zt, const ThermalParams& p) {
  return map_ab(z, zt, p.delta_z(), p.theta());
}

/// Inverse of map_ab: physical (z, z~) that maps onto iBT coordinates (a, b).
inline CoordinatePair map_ab_inverse(double a, double b, double shift, double theta) {
  const double c = std::cosh(theta);
  const double s = std::sinh(theta);
  const double ez = a * c + b * s;
  const double et = a * s + b * c;
  const double back = shift * std::expm1(theta);
  return {ez - back, et - back};
}

// ---------------------------------------------------------------------------
// Two-mode Bogoliubov matrices.

enum class Statistics : int { fermion = +1, boson = -1 };

struct BTMatrix {
  int sigma;
  double theta;
  std::array<std::array<double, 2>, 2> entries;

  double determinant() const {
    return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
  }

  /// max |U M U^T - M| with M = diag(1, sigma); U is real so U^dagger = U^T.
  double isometry_residual() const {
    const std::array<double, 2> m{1.0, static_cast<double>(sigma)};
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double v = 0.0;
        for (int k = 0; k < 2; ++k) v += entries[i][k] * m[k] * entries[j][k];
        const double target = i == j ? m[i] : 0.0;
        worst = std::max(worst, std::abs(v - target));
      }
    }
    return worst;
  }
};

/// sigma = +1 (fermions): rotation by theta; sigma = -1 (bosons): hyperbolic squeeze.
inline BTMatrix bt_matrix(int sigma, double theta) {
  if (sigma == +1) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {sigma, theta, {{{c, -s}, {s, c}}}};
  }
  if (sigma == -1) {
    const double c = std::cosh(theta);
    const double s = std::sinh(theta);
    return {sigma, theta, {{{c, -s}, {-s, c}}}};
  }
  throw std::invalid_argument("bt_matrix: sigma must be +1 (fermion) or -1 (boson), got " +
                              std::to_string(sigma));
}

inline BTMatrix bt_matrix(Statistics stats, double theta) { return bt_matrix(static_cast<int>(stats), theta); }

/// Angle fixed by requiring the transformed operators to annihilate the
/// thermal vacuum: exp(-beta*omega/2) = tan(theta) (fermions) or tanh(theta) (bosons).
inline double theta_from_condition(Statistics stats, InverseTemperature beta, double omega) {
  if (stats == Statistics::boson) return mixing_angle(beta, omega);
  if (omega < 0.0) throw std::domain_error("theta_from_condition: omega must be >= 0");
  if (beta.is_zero_temperature()) return 0.0;
  if (beta.value() < 0.0) throw std::domain_error("theta_from_condition: beta must be >= 0");
  return std::atan(std::exp(-0.5 * beta.value() * omega));
}

/// g(theta) = (1 - e^theta)/theta, continued to -1 at theta = 0.
inline double g_of_theta(double theta) {
  if (theta == 0.0) return -1.0;
  return -std::expm1(theta) / theta;
}

// ---------------------------------------------------------------------------
// Analytic squeezing of an isotropic Gaussian 2-RDM diagonal.

struct GaussianSqueezeModel {
  double sigma0;  // width of the isotropic iBT Gaussian
  double delta;   // centre of the initial condition in iBT space, on the diagonal
  double Delta;   // HO potential shift in physical space
  double theta;
};

/// Closed-form centre of the transformed Gaussian, delta' = e^theta [delta - Delta (1 - e^-theta)].
inline double transformed_center(const GaussianSqueezeModel& m) {
  return std::exp(m.theta) * (m.delta - m.Delta * (1.0 - std::exp(-m.theta)));
}

/// Centre obtained by pulling (delta, delta) back through the coordinate map.
inline CoordinatePair squeeze_center(const GaussianSqueezeModel& m) {
  return map_ab_inverse(m.delta, m.delta, m.Delta, m.theta);
}

/// rho(z, z~) = (2 pi sigma0^2)^-1 exp(-[(a - delta)^2 + (b - delta)^2] / (2 sigma0^2)),
/// (a, b) = map_ab(z, z~). The map has unit Jacobian so the prefactor keeps unit mass.
inline Field2D squeeze_gaussian(const GaussianSqueezeModel& m, const Grid1D& gz, const Grid1D& gzt) {
  if (!(m.sigma0 > 0.0)) throw std::invalid_argument("squeeze_gaussian: sigma0 must be positive");
  Field2D out(gz, gzt);
  const double two_var = 2.0 * m.sigma0 * m.sigma0;
  const double pref = 1.0 / (std::numbers::pi * two_var);
  for (std::size_t i = 0; i < gz.size(); ++i) {
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const auto [a, b] = map_ab(gz.point(i), gzt.point(j), m.Delta, m.theta);
      const double r2 = (a - m.delta) * (a - m.delta) + (b - m.delta) * (b - m.delta);
      out.at(i, j) = pref * std::exp(-r2 / two_var);
    }
  }
  return out;
}

}  // namespace ibt
