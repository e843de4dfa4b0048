#pragma once

// Split-step propagation of the iBT wavefunction Phi(z, z~; t) under
// H_BT = H(cosh z + sinh z~) - H~ for polynomial potentials, plus iBT-space
// expectation values and physical moments.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibt/errors.hpp"
#include "ibt/fourier.hpp"
#include "ibt/grid.hpp"
#include "ibt/moments.hpp"
#include "ibt/thermo_bogoliubov.hpp"
#include "ibt/units.hpp"

namespace ibt {

/// V(x) = (omega/2)(x - Delta)^2 + a3 (x - Delta)^3 + a4 (x - Delta)^4 for the physical mode.
struct PolynomialPotentialSpec {
  double omega_z = 0.0;  // hartree
  double a3 = 0.0;
  double a4 = 0.0;
  double Delta = 0.0;

  /// 200 cm^-1 quartic oscillator with a3 = 7.35e-5, a4 = 7.35e-6.
  static PolynomialPotentialSpec reference(double Delta = 0.0) {
    return {units::wavenumber_to_hartree(200.0), 7.35e-5, 7.35e-6, Delta};
  }
};

struct IBTHamiltonian {
  PolynomialPotentialSpec spec;
  ThermalParams params;
  Grid1D grid_z;
  Grid1D grid_zt;
  std::vector<double> potential;  // V(z_i, z~_j), row-major
  std::vector<double> kinetic;    // T(k_i, k~_j) in FFT order
  double escaped_norm_estimate = 0.0;
};

inline constexpr double max_escaped_norm = 1e-6;

/// Gaussian tail mass outside the box for a thermal distribution of variance
/// cosh(2 theta)/2 centred on Delta, summed over both axes.
inline double escaped_norm_estimate(const ThermalParams& p, const Grid1D& gz, const Grid1D& gzt, double centre) {
  const double v = 0.5 * std::cosh(2.0 * p.theta());
  const double w = std::sqrt(2.0 * v);
  double s = 0.0;
  for (const Grid1D* g : {&gz, &gzt}) {
    s += 0.5 * std::erfc((g->last_point() - centre) / w) + 0.5 * std::erfc((centre - g->x_min()) / w);
  }
  return s;
}

/// Builds V(z, z~) = (omega/2)[(z - D)^2 - (z~ - D)^2] + a3 u^3 + a4 u^4 with
/// u = cosh(theta)(z - D) + sinh(theta)(z~ - D), and the kinetic spectrum
/// (omega/2)[(k - Dp)^2 - (k~ + Dp)^2]. D and Dp are the position and momentum
/// displacements carried by params; spec.Delta must agree with the former.
inline IBTHamiltonian build_ibt_hamiltonian(const PolynomialPotentialSpec& spec, const ThermalParams& params,
                                            const Grid1D& gz, const Grid1D& gzt) {
  if (!(spec.omega_z > 0.0) || !std::isfinite(spec.omega_z)) {
    throw ConfigError("potential: omega_z must be positive and finite");
  }
  if (!std::isfinite(spec.a3) || !std::isfinite(spec.a4) || !std::isfinite(spec.Delta)) {
    throw ConfigError("potential: coefficients must be finite");
  }
  if (std::abs(spec.omega_z - params.omega()) > 1e-12 * spec.omega_z) {
    throw ConfigError("potential: omega_z differs from the thermal parameters' omega");
  }
  if (std::abs(spec.Delta - params.delta_z()) > 1e-12 * std::max(1.0, std::abs(spec.Delta))) {
    throw ConfigError("potential: Delta must equal sqrt(2) Re(alpha) of the thermal parameters");
  }
  IBTHamiltonian h{spec, params, gz, gzt, {}, {}, escaped_norm_estimate(params, gz, gzt, spec.Delta)};
  if (h.escaped_norm_estimate > max_escaped_norm) {
    std::ostringstream msg;
    msg << "grid too small for the thermally stretched support: estimated escaped norm "
        << h.escaped_norm_estimate << " exceeds " << max_escaped_norm << "; enlarge grid_halfwidth";
    throw ConfigError(msg.str());
  }

  const double c = params.cosh_theta();
  const double s = params.sinh_theta();
  const double w2 = 0.5 * spec.omega_z;
  const double D = spec.Delta;
  h.potential.resize(gz.size() * gzt.size());
  for (std::size_t i = 0; i < gz.size(); ++i) {
    const double z = gz.point(i) - D;
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double zt = gzt.point(j) - D;
      const double u = c * z + s * zt;
      const double u2 = u * u;
      h.potential[i * gzt.size() + j] = w2 * (z * z - zt * zt) + spec.a3 * u2 * u + spec.a4 * u2 * u2;
    }
  }
  const double Dp = params.delta_p();
  h.kinetic.resize(gz.size() * gzt.size());
  for (std::size_t i = 0; i < gz.size(); ++i) {
    const double k = gz.k(i) - Dp;
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double kt = gzt.k(j) + Dp;
      h.kinetic[i * gzt.size() + j] = w2 * (k * k - kt * kt);
    }
  }
  return h;
}

/// Product Gaussian exp(-(z - z0)^2/(2 w^2)) exp(-(z~ - z0)^2/(2 w^2)), normalised.
inline WavefunctionGrid initial_state(const Grid1D& gz, const Grid1D& gzt, double z0, double width = 1.0) {
  if (!(width > 0.0)) throw std::invalid_argument("initial_state: width must be positive");
  WavefunctionGrid psi(gz, gzt);
  const double inv = 1.0 / (2.0 * width * width);
  for (std::size_t i = 0; i < gz.size(); ++i) {
    const double fz = std::exp(-inv * (gz.point(i) - z0) * (gz.point(i) - z0));
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double ft = std::exp(-inv * (gzt.point(j) - z0) * (gzt.point(j) - z0));
      psi.at(i, j) = fz * ft;
    }
  }
  psi.normalize();
  return psi;
}

/// iBT centre whose physical image has mean `physical_mean`: Delta + (mean - Delta) e^{-theta}.
inline double z0_fixed_physical(double physical_mean, const ThermalParams& p) {
  return p.delta_z() + (physical_mean - p.delta_z()) * std::exp(-p.theta());
}

struct ObservableRecord {
  double t = 0.0;  // atomic time units
  double mean_z = 0.0;
  double mean_zt = 0.0;
  double z2 = 0.0;
  double zt2 = 0.0;
  double zzt = 0.0;
  double energy = 0.0;
  double norm = 0.0;
};

struct Trajectory {
  std::vector<ObservableRecord> records;
  std::vector<WavefunctionGrid> states;  // only when requested
};

using SampleCallback = std::function<void(const WavefunctionGrid&, const ObservableRecord&)>;

/// Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2). The state lives in
/// the FFT buffer between samples, and adjacent half potential kicks are fused.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const IBTHamiltonian& h, double dt)
      : h_(h), dt_(dt), ft_(h.grid_z.size(), h.grid_zt.size()) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("propagator: dt must be positive");
    const std::size_t n = ft_.size();
    half_v_.resize(n);
    full_v_.resize(n);
    kin_.resize(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      half_v_[i] = std::polar(1.0, -0.5 * dt * h.potential[i]);
      full_v_[i] = std::polar(1.0, -dt * h.potential[i]);
      kin_[i] = std::polar(scale, -dt * h.kinetic[i]);
    }
  }

  double dt() const { return dt_; }

  /// Advances `state` by n_steps in place.
  void advance(WavefunctionGrid& state, long n_steps) {
    if (n_steps <= 0) return;
    if (state.amplitudes.size() != ft_.size()) throw std::invalid_argument("propagator: state/grid mismatch");
    Complex* b = ft_.buffer();
    const std::size_t n = ft_.size();
    for (std::size_t i = 0; i < n; ++i) b[i] = state.amplitudes[i] * half_v_[i];
    for (long s = 0; s < n_steps; ++s) {
      ft_.forward_unnormalized();
      for (std::size_t i = 0; i < n; ++i) b[i] *= kin_[i];
      ft_.inverse_unnormalized();
      const auto& kick = s + 1 == n_steps ? half_v_ : full_v_;
      for (std::size_t i = 0; i < n; ++i) b[i] *= kick[i];
    }
    std::copy(b, b + n, state.amplitudes.begin());
    state.time += static_cast<double>(n_steps) * dt_;
  }

  /// Position moments, norm and <H_BT> of a state.
  ObservableRecord observe(const WavefunctionGrid& state) {
    ObservableRecord r;
    r.t = state.time;
    const auto& gz = state.grid_z;
    const auto& gzt = state.grid_zt;
    double n0 = 0.0, ez = 0.0, ezt = 0.0, ez2 = 0.0, ezt2 = 0.0, ezzt = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < gz.size(); ++i) {
      const double z = gz.point(i);
      for (std::size_t j = 0; j < gzt.size(); ++j) {
        const double zt = gzt.point(j);
        const double d = std::norm(state.at(i, j));
        n0 += d;
        ez += d * z;
        ezt += d * zt;
        ez2 += d * z * z;
        ezt2 += d * zt * zt;
        ezzt += d * z * zt;
        ev += d * h_.potential[i * gzt.size() + j];
      }
    }
    Complex* b = ft_.buffer();
    std::copy(state.amplitudes.begin(), state.amplitudes.end(), b);
    ft_.forward_unnormalized();
    double nk = 0.0, et = 0.0;
    for (std::size_t i = 0; i < ft_.size(); ++i) {
      const double d = std::norm(b[i]);
      nk += d;
      et += d * h_.kinetic[i];
    }
    r.norm = n0 * state.cell_area();
    r.mean_z = ez / n0;
    r.mean_zt = ezt / n0;
    r.z2 = ez2 / n0;
    r.zt2 = ezt2 / n0;
    r.zzt = ezzt / n0;
    r.energy = ev / n0 + et / nk;
    return r;
  }

 private:
  const IBTHamiltonian& h_;
  double dt_;
  Fourier2D ft_;
  std::vector<Complex> half_v_;
  std::vector<Complex> full_v_;
  std::vector<Complex> kin_;
};

inline constexpr double max_norm_drift = 1e-6;

/// Propagates `state` in place for n_steps of size dt, observing at step 0 and
/// every `sample_every` steps (and at the final step). The callback sees each
/// sampled state; snapshots are kept only when keep_states is set.
inline Trajectory propagate(WavefunctionGrid& state, const IBTHamiltonian& h, double dt, long n_steps,
                            long sample_every, const SampleCallback& callback = {}, bool keep_states = false) {
  if (n_steps < 0) throw std::invalid_argument("propagate: n_steps must be >= 0");
  if (sample_every <= 0) throw std::invalid_argument("propagate: sample_every must be positive");
  if (!(state.grid_z == h.grid_z) || !(state.grid_zt == h.grid_zt)) {
    throw std::invalid_argument("propagate: state and Hamiltonian grids differ");
  }
  SplitStepPropagator prop(h, dt);
  Trajectory traj;
  const double norm0 = state.norm_squared();
  auto sample = [&] {
    const auto r = prop.observe(state);
    if (!std::isfinite(r.norm) || std::abs(r.norm - norm0) > max_norm_drift) {
      std::ostringstream msg;
      msg << "norm drifted from " << norm0 << " to " << r.norm << " at t = " << units::atomic_time_to_fs(r.t)
          << " fs; reduce dt or enlarge the grid";
      throw NumericalInstability(msg.str());
    }
    traj.records.push_back(r);
    if (keep_states) traj.states.push_back(state);
    if (callback) callback(state, r);
  };
  sample();
  long done = 0;
  while (done < n_steps) {
    const long block = std::min(sample_every, n_steps - done);
    prop.advance(state, block);
    done += block;
    sample();
  }
  return traj;
}

/// <H_BT> of a state.
inline double energy(const WavefunctionGrid& state, const IBTHamiltonian& h) {
  SplitStepPropagator p(h, 1.0);
  return p.observe(state).energy;
}

// ---------------------------------------------------------------------------
// Moments

inline constexpr int max_moment_order = 20;

/// Weyl-ordered two-mode moments <W(z^k p^l) W(z~^k' p~^l')> of an iBT state,
/// using W(z^k p^l) = 2^-k sum_r C(k, r) z^(k-r) p^l z^r. Momentum powers act
/// spectrally on z^r z~^s Phi, which are transformed once and cached.
class WeylMomentEvaluator {
 public:
  WeylMomentEvaluator(const WavefunctionGrid& state, int max_order)
      : state_(state), max_order_(max_order), n_index_((max_order + 1) * (max_order + 2) / 2) {
    if (max_order < 0 || max_order > max_moment_order) {
      throw std::invalid_argument("moment order must lie in [0, " + std::to_string(max_moment_order) + "]");
    }
    const auto& gz = state.grid_z;
    const auto& gzt = state.grid_zt;
    kz_pow_ = power_table(gz.k_values(), max_order);
    kzt_pow_ = power_table(gzt.k_values(), max_order);
    transforms_.resize(static_cast<std::size_t>(n_index_));
    cache_.resize(static_cast<std::size_t>(n_index_ * n_index_));
    norm_ = state.norm_squared();
  }

  int max_order() const { return max_order_; }

  double weyl(int k, int l, int kt, int lt) {
    if (k < 0 || l < 0 || kt < 0 || lt < 0) throw std::invalid_argument("moment indices must be >= 0");
    if (k + l + kt + lt > max_order_) {
      throw std::invalid_argument("moment order " + std::to_string(k + l + kt + lt) + " exceeds the maximum " +
                                  std::to_string(max_order_));
    }
    double acc = 0.0;
    for (int r = 0; r <= k; ++r) {
      for (int s = 0; s <= kt; ++s) {
        const auto& q = pair_moments(k - r, kt - s, r, s);
        const int lmax = max_order_ - k - kt;
        acc += binomial(k, r) * binomial(kt, s) * q[static_cast<std::size_t>(l * (lmax + 1) + lt)].real();
      }
    }
    return std::ldexp(acc, -(k + kt)) / norm_;
  }

 private:
  static std::vector<std::vector<double>> power_table(const std::vector<double>& x, int order) {
    std::vector<std::vector<double>> t(static_cast<std::size_t>(order + 1), std::vector<double>(x.size(), 1.0));
    for (int p = 1; p <= order; ++p)
      for (std::size_t i = 0; i < x.size(); ++i) t[p][i] = t[p - 1][i] * x[i];
    return t;
  }

  int index(int a, int b) const { return (a + b) * (a + b + 1) / 2 + b; }

  /// Unitary FFT of z^a z~^b Phi (dz dz~ weighted so that inner products are expectation sums).
  const std::vector<Complex>& transformed(int a, int b) {
    auto& t = transforms_[static_cast<std::size_t>(index(a, b))];
    if (!t.empty()) return t;
    const auto& gz = state_.grid_z;
    const auto& gzt = state_.grid_zt;
    t.resize(state_.amplitudes.size());
    const double w = std::sqrt(state_.cell_area());
    for (std::size_t i = 0; i < gz.size(); ++i) {
      const double za = std::pow(gz.point(i), a);
      for (std::size_t j = 0; j < gzt.size(); ++j) {
        t[i * gzt.size() + j] = state_.at(i, j) * (w * za * std::pow(gzt.point(j), b));
      }
    }
    if (!ft_) ft_ = std::make_unique<Fourier2D>(gz.size(), gzt.size());
    ft_->forward(t);
    return t;
  }

  /// Q(l, l~) = sum conj(G_ab) k^l k~^l~ G_rs for l + l~ <= max_order - a - b - r - s... stored
  /// in a (lmax+1)^2 block with lmax = max_order - (a + r) - (b + s).
  const std::vector<Complex>& pair_moments(int a, int b, int r, int s) {
    const std::size_t key = static_cast<std::size_t>(index(a, b) * n_index_ + index(r, s));
    auto& q = cache_[key];
    if (!q.empty()) return q;
    const int lmax = max_order_ - (a + r) - (b + s);
    const auto& ga = transformed(a, b);
    const auto& gb = transformed(r, s);
    const std::size_t nz = state_.grid_z.size();
    const std::size_t nzt = state_.grid_zt.size();
    const auto L = static_cast<std::size_t>(lmax + 1);
    q.assign(L * L, Complex{});
    std::vector<Complex> row(L);
    for (std::size_t i = 0; i < nz; ++i) {
      std::fill(row.begin(), row.end(), Complex{});
      for (std::size_t j = 0; j < nzt; ++j) {
        const Complex prod = std::conj(ga[i * nzt + j]) * gb[i * nzt + j];
        for (std::size_t lt = 0; lt < L; ++lt) row[lt] += prod * kzt_pow_[lt][j];
      }
      for (std::size_t l = 0; l < L; ++l) {
        const double kp = kz_pow_[l][i];
        for (std::size_t lt = 0; lt + l < L; ++lt) q[l * L + lt] += kp * row[lt];
      }
    }
    return q;
  }

  const WavefunctionGrid& state_;
  int max_order_;
  int n_index_;
  double norm_ = 1.0;
  std::vector<std::vector<double>> kz_pow_;
  std::vector<std::vector<double>> kzt_pow_;
  std::vector<std::vector<Complex>> transforms_;
  std::vector<std::vector<Complex>> cache_;
  std::unique_ptr<Fourier2D> ft_;
};

/// Weyl-ordered iBT moment <W(z^k p^l) W(z~^kt p~^lt)>; p~ is the standard -i d/dz~.
inline double ibt_moment(const WavefunctionGrid& state, int k, int l, int kt = 0, int lt = 0) {
  WeylMomentEvaluator ev(state, k + l + kt + lt);
  return ev.weyl(k, l, kt, lt);
}

namespace detail {

/// iBT position moments m[a][b] = <z^a z~^b>, a + b <= order.
inline TriangularTable ibt_position_moments(const WavefunctionGrid& s, int order) {
  TriangularTable m = make_triangular(order);
  const auto& gz = s.grid_z;
  const auto& gzt = s.grid_zt;
  std::vector<double> zt_pow(static_cast<std::size_t>(order + 1));
  std::vector<double> col(static_cast<std::size_t>(order + 1));
  double n0 = 0.0;
  for (std::size_t i = 0; i < gz.size(); ++i) {
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t j = 0; j < gzt.size(); ++j) {
      const double d = std::norm(s.at(i, j));
      double p = d;
      for (int b = 0; b <= order; ++b) {
        col[b] += p;
        p *= gzt.point(j);
      }
    }
    n0 += col[0];
    double zp = 1.0;
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) m[a][b] += zp * col[b];
      zp *= gz.point(i);
    }
  }
  for (auto& row : m)
    for (auto& v : row) v /= n0;
  return m;
}

/// iBT momentum moments <p^a p~^b> from |FFT Phi|^2.
inline TriangularTable ibt_momentum_moments(const WavefunctionGrid& s, int order) {
  auto phi_k = fourier_forward(s.amplitudes, s.grid_z.size(), s.grid_zt.size());
  WavefunctionGrid spec(s.grid_z, s.grid_zt);
  spec.amplitudes = std::move(phi_k);
  TriangularTable m = make_triangular(order);
  const auto kz = s.grid_z.k_values();
  const auto kzt = s.grid_zt.k_values();
  double n0 = 0.0;
  std::vector<double> col(static_cast<std::size_t>(order + 1));
  for (std::size_t i = 0; i < kz.size(); ++i) {
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t j = 0; j < kzt.size(); ++j) {
      double p = std::norm(spec.at(i, j));
      for (int b = 0; b <= order; ++b) {
        col[b] += p;
        p *= kzt[j];
      }
    }
    n0 += col[0];
    double kp = 1.0;
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) m[a][b] += kp * col[b];
      kp *= kz[i];
    }
  }
  for (auto& row : m)
    for (auto& v : row) v /= n0;
  return m;
}

/// Binomial combination of a two-mode table: sum_k C(n,k) x^k y^(n-k) m[k][n-k].
inline std::vector<double> combine_modes(const TriangularTable& m, double x, double y, int order) {
  std::vector<double> out(static_cast<std::size_t>(order + 1), 0.0);
  for (int n = 0; n <= order; ++n) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += binomial(n, k) * std::pow(x, k) * std::pow(y, n - k) * m[k][n - k];
    out[n] = s;
  }
  return out;
}

}  // namespace detail

/// Constant offsets of the physical position and momentum relative to
/// cosh z + sinh z~ and cosh p - sinh p~: -D (e^theta - 1) for each displacement.
inline double physical_position_offset(const ThermalParams& p) { return -p.delta_z() * std::expm1(p.theta()); }
inline double physical_momentum_offset(const ThermalParams& p) { return -p.delta_p() * std::expm1(p.theta()); }

/// Physical moments of the thermal mode from an iBT state. Position and
/// momentum columns go up to n_max; Weyl cross moments up to total degree
/// cross_order (skipped when negative).
inline MomentTable physical_moment_table(const WavefunctionGrid& state, const ThermalParams& params, int n_max,
                                         bool with_momentum = true, int cross_order = -1) {
  if (n_max < 0 || n_max > max_moment_order || cross_order > max_moment_order) {
    throw std::invalid_argument("physical_moment_table: order out of range");
  }
  const double c = params.cosh_theta();
  const double s = params.sinh_theta();
  MomentTable t;
  t.position = shift_moments(detail::combine_modes(detail::ibt_position_moments(state, n_max), c, s, n_max),
                             physical_position_offset(params));
  if (with_momentum) {
    t.momentum = shift_moments(detail::combine_modes(detail::ibt_momentum_moments(state, n_max), c, -s, n_max),
                               physical_momentum_offset(params));
  }
  if (cross_order >= 0) {
    WeylMomentEvaluator ev(state, cross_order);
    TriangularTable raw = make_triangular(cross_order);
    for (int n = 0; n <= cross_order; ++n) {
      for (int m = 0; n + m <= cross_order; ++m) {
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
          for (int l = 0; l <= m; ++l) {
            const double w = binomial(n, k) * binomial(m, l) * std::pow(c, k + l) * std::pow(s, n - k) *
                             std::pow(-s, m - l);
            if (w == 0.0) continue;
            acc += w * ev.weyl(k, l, n - k, m - l);
          }
        }
        raw[n][m] = acc;
      }
    }
    t.cross = shift_moments_2d(raw, physical_position_offset(params), physical_momentum_offset(params));
  }
  return t;
}

/// Single Weyl-ordered physical moment <W(X^n P^m)>.
inline double physical_moment(const WavefunctionGrid& state, const ThermalParams& params, int n, int m) {
  if (n < 0 || m < 0 || n + m > max_moment_order) throw std::invalid_argument("physical_moment: bad order");
  if (m == 0) return physical_moment_table(state, params, n, false).position[static_cast<std::size_t>(n)];
  if (n == 0) return physical_moment_table(state, params, m, true).momentum[static_cast<std::size_t>(m)];
  return physical_moment_table(state, params, 0, false, n + m).cross[static_cast<std::size_t>(n)]
      [static_cast<std::size_t>(m)];
}

}  // namespace ibt
