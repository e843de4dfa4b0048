#pragma once

// Thermal reduced quantities of the physical mode from an iBT wavefunction.
//
// The physical thermofield wavefunction is
//   Psi(z, z~) = exp(-i kappa (z - z~)) Phi(a(z, z~), b(z, z~)),
//   kappa = Dp (e^theta - 1),
// so every reduced quantity is an integral over z~ of Phi sampled at the
// mapped coordinates. Off-grid samples come from the iBT grid by
// interpolation, with zero outside the box.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ibt/density.hpp"
#include "ibt/grid.hpp"
#include "ibt/thermo_bogoliubov.hpp"

namespace ibt {

inline constexpr double norm_raw_tolerance = 1e-3;
inline constexpr double wigner_imag_tolerance = 1e-6;

/// True when the pre-renormalisation integral is within `tol` of one.
inline bool norm_within_tolerance(const Density1D& d, double tol = norm_raw_tolerance) {
  return std::abs(d.norm_raw - 1.0) <= tol;
}

/// D(z, z~) = |Phi(z, z~)|^2.
inline Field2D diagonal_2rdm(const WavefunctionGrid& state) {
  Field2D d(state.grid_z, state.grid_zt);
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) d.values[i] = std::norm(state.amplitudes[i]);
  return d;
}

/// rho(z_i) = sum_j D(a(z_i, z~_j), b(z_i, z~_j)) dz~, renormalised.
inline Density1D exact_density(const WavefunctionGrid& state, const ThermalParams& params,
                               Interpolation scheme = Interpolation::cubic) {
  const Field2D d = diagonal_2rdm(state);
  const auto& gz = state.grid_z;
  const auto& gzt = state.grid_zt;
  Density1D out{gz, std::vector<double>(gz.size(), 0.0), 1.0};
  for (std::size_t i = 0; i < gz.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const auto [a, b] = map_ab(gz.point(i), gzt.point(j), params);
      s += sample_2d<double>(d.values, gz, gzt, a, b, scheme);
    }
    out.values[i] = s * gzt.dx();
  }
  return renormalized(std::move(out));
}

/// Psi(z_i, z~_j) on the physical grid (same nodes as the iBT grid).
inline std::vector<Complex> thermofield_wavefunction(const WavefunctionGrid& state, const ThermalParams& params,
                                                     Interpolation scheme = Interpolation::cubic) {
  const auto& gz = state.grid_z;
  const auto& gzt = state.grid_zt;
  const double kappa = params.delta_p() * std::expm1(params.theta());
  std::vector<Complex> psi(gz.size() * gzt.size());
  for (std::size_t i = 0; i < gz.size(); ++i) {
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double z = gz.point(i);
      const double zt = gzt.point(j);
      const auto [a, b] = map_ab(z, zt, params);
      Complex v = sample_2d<Complex>(state.amplitudes, gz, gzt, a, b, scheme);
      if (kappa != 0.0) v *= std::polar(1.0, -kappa * (z - zt));
      psi[i * gzt.size() + j] = v;
    }
  }
  return psi;
}

/// rho(z_i | z_k) = sum_j Psi(z_i, z~_j) conj(Psi(z_k, z~_j)) dz~ for a row-major
/// two-mode array, normalised to unit trace.
inline DensityMatrix1D partial_trace_1rdm(const std::vector<Complex>& psi, const Grid1D& gz, const Grid1D& gzt) {
  DensityMatrix1D rho(gz);
  const std::size_t n = gz.size();
  const std::size_t m = gzt.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex* ri = &psi[i * m];
    for (std::size_t k = i; k < n; ++k) {
      const Complex* rk = &psi[k * m];
      Complex s{};
      for (std::size_t j = 0; j < m; ++j) s += ri[j] * std::conj(rk[j]);
      s *= gzt.dx();
      rho.at(i, k) = s;
      rho.at(k, i) = std::conj(s);
    }
    rho.at(i, i) = rho.at(i, i).real();
  }
  const double tr = rho.trace();
  if (tr > 0.0) {
    for (auto& e : rho.entries) e /= tr;
  }
  return rho;
}

/// Thermal 1-RDM of the physical mode, unit trace and Hermitian by construction.
inline DensityMatrix1D exact_1rdm(const WavefunctionGrid& state, const ThermalParams& params,
                                  Interpolation scheme = Interpolation::cubic) {
  return partial_trace_1rdm(thermofield_wavefunction(state, params, scheme), state.grid_z, state.grid_zt);
}

/// Standard partial-trace 1-RDM of Phi itself (no transform).
inline DensityMatrix1D direct_1rdm(const WavefunctionGrid& state) {
  return partial_trace_1rdm(state.amplitudes, state.grid_z, state.grid_zt);
}

/// Standard marginal sum_j |Phi(z_i, z~_j)|^2 dz~, renormalised.
inline Density1D direct_marginal(const WavefunctionGrid& state) {
  const auto& gz = state.grid_z;
  const auto& gzt = state.grid_zt;
  Density1D out{gz, std::vector<double>(gz.size(), 0.0), 1.0};
  for (std::size_t i = 0; i < gz.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < gzt.size(); ++j) s += std::norm(state.at(i, j));
    out.values[i] = s * gzt.dx();
  }
  return renormalized(std::move(out));
}

/// W(z, p) = (1/2 pi) int rho(z + q/2 | z - q/2) e^{-ipq} dq.
///
/// The anti-diagonal is read on matrix nodes, q = 2 m dz, so no interpolation
/// is involved; the momentum grid is wigner_momentum_grid(rho.grid).
inline WignerGrid wigner_from_1rdm(const DensityMatrix1D& rho) {
  const Grid1D& gz = rho.grid;
  const Grid1D gp = wigner_momentum_grid(gz);
  const auto n = static_cast<std::ptrdiff_t>(gz.size());
  const auto half = n / 2;
  std::vector<Complex> phase(static_cast<std::size_t>(n));
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    phase[static_cast<std::size_t>(r)] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) /
                                                             static_cast<double>(n));
  }
  WignerGrid w{gz, gp, std::vector<double>(gz.size() * gp.size(), 0.0), 0.0};
  const double pref = 2.0 * gz.dx() / (2.0 * std::numbers::pi);
  std::vector<Complex> cut(static_cast<std::size_t>(n));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t m = -half; m < half; ++m) {
      const auto a = i + m;
      const auto b = i - m;
      cut[static_cast<std::size_t>(m + half)] =
          (a >= 0 && a < n && b >= 0 && b < n) ? rho.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b))
                                               : Complex{};
    }
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      Complex s{};
      const auto pj = j - half;  // p_j = pj * dp
      for (std::ptrdiff_t m = -half; m < half; ++m) {
        const Complex c = cut[static_cast<std::size_t>(m + half)];
        if (c == Complex{}) continue;
        const auto r = ((m * pj) % n + n) % n;
        s += c * phase[static_cast<std::size_t>(r)];
      }
      s *= pref;
      w.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = s.real();
      w.imag_residue = std::max(w.imag_residue, std::abs(s.imag()));
    }
  }
  return w;
}

/// Uncorrelated-modes approximation: the 2-RDM diagonal is replaced by the
/// product of its two marginals before mapping and tracing.
inline Density1D uncorrelated_density(const WavefunctionGrid& state, const ThermalParams& params,
                                      Interpolation scheme = Interpolation::cubic) {
  const auto& gz = state.grid_z;
  const auto& gzt = state.grid_zt;
  std::vector<double> gz_marg(gz.size(), 0.0);
  std::vector<double> gzt_marg(gzt.size(), 0.0);
  for (std::size_t i = 0; i < gz.size(); ++i) {
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double d = std::norm(state.at(i, j));
      gz_marg[i] += d * gzt.dx();
      gzt_marg[j] += d * gz.dx();
    }
  }
  Density1D out{gz, std::vector<double>(gz.size(), 0.0), 1.0};
  for (std::size_t i = 0; i < gz.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const auto [a, b] = map_ab(gz.point(i), gzt.point(j), params);
      s += sample_1d<double>(gz_marg, gz, a, scheme) * sample_1d<double>(gzt_marg, gzt, b, scheme);
    }
    out.values[i] = s * gzt.dx();
  }
  return renormalized(std::move(out));
}

}  // namespace ibt
