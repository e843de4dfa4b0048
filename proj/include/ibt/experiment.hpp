#pragma once

// Orchestration of a thermalised oscillator run: propagate, analyse each
// sample with the exact, uncorrelated and moment-based densities, and write
// CSV artifacts plus a JSON manifest. Also the squeezing demo, the
// Bogoliubov self-check report and run-to-run comparison.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibt/config.hpp"
#include "ibt/csv.hpp"
#include "ibt/density.hpp"
#include "ibt/errors.hpp"
#include "ibt/moments.hpp"
#include "ibt/propagator.hpp"
#include "ibt/rdm.hpp"
#include "ibt/thermo_bogoliubov.hpp"
#include "ibt/units.hpp"

#ifndef IBT_VERSION
#define IBT_VERSION "0.1.0"
#endif

namespace ibt {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_instability = 3;
inline constexpr int exit_not_converged = 4;

/// Everything a run needs in atomic units.
struct ResolvedRun {
  PolynomialPotentialSpec potential;
  ThermalParams params;
  Grid1D grid;
  double z0;
  double dt;  // atomic time units
  long n_steps;
  long sample_every;
};

inline ResolvedRun resolve(const ExperimentConfig& c) {
  validate(c);
  const double omega = units::wavenumber_to_hartree(c.omega_cm1);
  const std::complex<double> alpha{c.alpha_re, c.alpha_im};
  const ThermalParams params = ThermalParams::at_kelvin(c.temperature_K, omega, alpha);
  const PolynomialPotentialSpec pot{omega, c.a3_au, c.a4_au, params.delta_z()};
  const double z0 = c.z0_rule == Z0Rule::fixed_physical ? z0_fixed_physical(c.z0_value, params) : c.z0_value;
  return {pot,
          params,
          Grid1D::symmetric(c.grid_n, c.grid_halfwidth),
          z0,
          units::fs_to_atomic_time(c.dt_fs),
          *detail::whole_steps(c.t_total_fs, c.dt_fs),
          *detail::whole_steps(c.sample_every_fs, c.dt_fs)};
}

/// Label used in per-time file names, e.g. 500 -> "500", 12.5 -> "12.5".
inline std::string time_label(double t_fs) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", std::round(t_fs * 1e6) / 1e6);
  return buf;
}

/// Copy with negatives set to zero and rescaled to unit integral; `clamped`
/// receives the removed negative mass.
inline std::vector<double> clamp_for_output(const Density1D& d, double& clamped) {
  std::vector<double> v = d.values;
  clamped = 0.0;
  double total = 0.0;
  for (auto& x : v) {
    if (x < 0.0) {
      clamped -= x;
      x = 0.0;
    }
    total += x;
  }
  clamped *= d.grid.dx();
  total *= d.grid.dx();
  if (total > 0.0) {
    for (auto& x : v) x /= total;
  }
  return v;
}

struct ObservableRow {
  double t_fs = 0.0;
  double mean_exact = 0.0;
  double mean_uncorr = 0.0;
  double mean_moment = 0.0;
  double var_exact = 0.0;
  double var_uncorr = 0.0;
  double var_moment = 0.0;
  double norm_raw = 0.0;
  double neg_norm_score = 0.0;
  int moment_order = 0;
};

struct SampleDiagnostics {
  double t_fs = 0.0;
  double norm_raw = 0.0;
  double uncorr_norm_raw = 0.0;
  double neg_norm_score = 0.0;
  double moment_defect = 0.0;
  int moment_order = 0;
  bool reconstruction_converged = false;
  double clamped_exact = 0.0;
  double clamped_uncorr = 0.0;
  double clamped_moment = 0.0;
  double ibt_norm = 0.0;
  double ibt_energy = 0.0;
};

struct WignerDiagnostics {
  double t_fs = 0.0;
  double imag_residue = 0.0;
  double marginal_error = 0.0;  // max |int W dp - rho_exact|
  double moment_marginal_mismatch = 0.0;
  bool moment_converged = false;
};

/// Everything one sample analysis produced; handed to RunOptions::on_sample.
struct SampleContext {
  const WavefunctionGrid& state;
  const ThermalParams& params;
  const ObservableRecord& observables;
  const Density1D& exact;
  const Density1D& uncorrelated;
  const DensityReconstruction& moment;
};

struct RunOptions {
  std::function<void(const SampleContext&)> on_sample;
  std::function<void(const std::string&)> log;  // progress/warning lines
};

struct RunResult {
  json manifest;
  std::vector<ObservableRow> observables;
  std::vector<SampleDiagnostics> samples;
  std::vector<WignerDiagnostics> wigner;
  std::vector<ObservableRecord> trajectory;
  int exit_code = exit_ok;
};

// ---------------------------------------------------------------------------
// Bogoliubov self-check

struct BtCheckReport {
  std::uint64_t seed = 0;
  int samples = 0;
  double boson_isometry = 0.0;
  double fermion_isometry = 0.0;
  double determinant_error = 0.0;
  double xi_eta_roundtrip = 0.0;
  double theta_condition_gap = 0.0;  // |theta_from_condition(boson) - mixing_angle|
  double fermion_high_temperature_gap = 0.0;
  double g_at_zero = 0.0;
  bool passed = false;

  json to_json() const {
    return {{"seed", seed},
            {"samples", samples},
            {"boson_isometry_max", boson_isometry},
            {"fermion_isometry_max", fermion_isometry},
            {"determinant_error_max", determinant_error},
            {"xi_eta_roundtrip_max_rel", xi_eta_roundtrip},
            {"theta_condition_gap", theta_condition_gap},
            {"fermion_high_temperature_gap", fermion_high_temperature_gap},
            {"g_at_zero", g_at_zero},
            {"passed", passed}};
  }
};

/// Randomised identities of the two-mode transforms and shift functions.
inline BtCheckReport bt_selfcheck(std::uint64_t seed, int samples = 10000, double omega = 0.0,
                                  double temperature_K = 300.0) {
  if (omega <= 0.0) omega = units::wavenumber_to_hartree(200.0);
  BtCheckReport r;
  r.seed = seed;
  r.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> boson_angle(0.0, 3.0);
  std::uniform_real_distribution<double> fermion_angle(0.0, 0.5 * std::numbers::pi);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::uniform_real_distribution<double> angle(0.0, 3.0);
  for (int i = 0; i < samples; ++i) {
    const auto b = bt_matrix(Statistics::boson, boson_angle(rng));
    const auto f = bt_matrix(Statistics::fermion, fermion_angle(rng));
    r.boson_isometry = std::max(r.boson_isometry, b.isometry_residual());
    r.fermion_isometry = std::max(r.fermion_isometry, f.isometry_residual());
    r.determinant_error =
        std::max({r.determinant_error, std::abs(b.determinant() - 1.0), std::abs(f.determinant() - 1.0)});
    const double x = coord(rng);
    const double a = shift(rng);
    const double th = angle(rng);
    const double back = shift_xi(std::exp(-th) * shift_eta(std::exp(th) * x, a, th), a, th);
    r.xi_eta_roundtrip = std::max(r.xi_eta_roundtrip, std::abs(back - x) / std::max({1.0, std::abs(x), std::abs(a)}));
  }
  const auto beta = InverseTemperature::from_kelvin(temperature_K);
  r.theta_condition_gap = std::abs(theta_from_condition(Statistics::boson, beta, omega) - mixing_angle(beta, omega));
  r.fermion_high_temperature_gap =
      std::abs(theta_from_condition(Statistics::fermion, InverseTemperature::from_beta(0.0), omega) -
               0.25 * std::numbers::pi);
  r.g_at_zero = g_of_theta(0.0);
  r.passed = r.boson_isometry <= 1e-12 && r.fermion_isometry <= 1e-12 && r.determinant_error <= 1e-12 &&
             r.xi_eta_roundtrip <= 1e-12 &&
             r.theta_condition_gap <= 1e-14 && r.fermion_high_temperature_gap <= 1e-15 && r.g_at_zero == -1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Squeezing demo

struct SqueezeCase {
  std::string name;
  double Delta = 0.0;
  double closed_form_center = 0.0;
  CoordinatePair map_center{0.0, 0.0};
  CoordinatePair centroid{0.0, 0.0};
  double integral = 0.0;
  Field2D field;
};

struct SqueezeReport {
  double theta = 0.0;
  double sigma0 = 0.0;
  double delta = 0.0;
  std::vector<SqueezeCase> cases;
};

/// The two analytic panels: potential shift zero, and shift equal to the initial centre.
inline SqueezeReport squeeze_demo(double theta, double delta, const Grid1D& g, double sigma0 = std::sqrt(0.5)) {
  SqueezeReport rep{theta, sigma0, delta, {}};
  for (const auto& [name, Delta] : {std::pair<std::string, double>{"shift_zero", 0.0}, {"shift_equals_center", delta}}) {
    const GaussianSqueezeModel m{sigma0, delta, Delta, theta};
    Field2D f = squeeze_gaussian(m, g, g);
    double mz = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) {
        mz += f.at(i, j) * g.point(i);
        mt += f.at(i, j) * g.point(j);
      }
    const double integral = integrate_2d(f);
    const double w = g.dx() * g.dx() / integral;
    rep.cases.push_back({name, Delta, transformed_center(m), squeeze_center(m), {mz * w, mt * w}, integral, std::move(f)});
  }
  return rep;
}

inline void write_field(const fs::path& path, const Grid1D& rows, const Grid1D& cols, std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  csv::write_row(out, cols.points());
  csv::write_row(out, rows.points());
  for (std::size_t i = 0; i < rows.size(); ++i) csv::write_row(out, v.subspan(i * cols.size(), cols.size()));
}

inline json write_squeeze_demo(const SqueezeReport& rep, const Grid1D& g, const fs::path& dir) {
  json doc{{"theta", rep.theta}, {"sigma0", rep.sigma0}, {"delta", rep.delta}, {"cases", json::array()}};
  for (const auto& c : rep.cases) {
    write_field(dir / ("squeeze_" + c.name + ".csv"), g, g, c.field.values);
    doc["cases"].push_back({{"name", c.name},
                            {"Delta", c.Delta},
                            {"closed_form_center", c.closed_form_center},
                            {"map_center", {c.map_center.a, c.map_center.b}},
                            {"grid_centroid", {c.centroid.a, c.centroid.b}},
                            {"integral", c.integral}});
  }
  std::ofstream(dir / "squeeze_demo.json") << doc.dump(2) << '\n';
  return doc;
}

// ---------------------------------------------------------------------------
// Run

inline json config_to_json(const ExperimentConfig& c) {
  return {{"omega_cm1", c.omega_cm1},
          {"a3_au", c.a3_au},
          {"a4_au", c.a4_au},
          {"temperature_K", c.temperature_K},
          {"alpha_re", c.alpha_re},
          {"alpha_im", c.alpha_im},
          {"z0_rule", (c.z0_rule == Z0Rule::fixed_physical ? "fixed_physical(" : "explicit(") +
                          csv::number(c.z0_value) + ")"},
          {"grid_n", c.grid_n},
          {"grid_halfwidth", c.grid_halfwidth},
          {"dt_fs", c.dt_fs},
          {"t_total_fs", c.t_total_fs},
          {"sample_every_fs", c.sample_every_fs},
          {"n_max_moments", c.n_max_moments},
          {"neg_norm_threshold", c.neg_norm_threshold},
          {"emit", c.emit},
          {"wigner_times_fs", c.wigner_times_fs},
          {"wigner_moment_order", c.wigner_moment_order},
          {"interpolation", c.interpolation == Interpolation::cubic ? "cubic" : "linear"}};
}

inline json resolved_to_json(const ResolvedRun& r) {
  json beta = nullptr;
  if (!r.params.is_zero_temperature()) beta = r.params.beta();
  return {{"omega_hartree", r.params.omega()},
          {"beta_per_hartree", beta},
          {"theta", r.params.theta()},
          {"alpha", {r.params.alpha().real(), r.params.alpha().imag()}},
          {"delta_z", r.params.delta_z()},
          {"delta_p", r.params.delta_p()},
          {"z0", r.z0},
          {"dt_au", r.dt},
          {"n_steps", r.n_steps},
          {"sample_every_steps", r.sample_every},
          {"grid", {{"n", r.grid.size()}, {"x_min", r.grid.x_min()}, {"x_max", r.grid.x_max()}, {"dx", r.grid.dx()}}}};
}

namespace detail {

inline void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

inline bool is_time_in(double t_fs, const std::vector<double>& list, double tol) {
  return std::any_of(list.begin(), list.end(), [&](double x) { return std::abs(x - t_fs) <= tol; });
}

}  // namespace detail

/// Executes a configured run into `out_dir`. The manifest is written with
/// status "running" before any work and rewritten at the end (or on failure).
inline RunResult run(const ExperimentConfig& cfg, const fs::path& out_dir, const RunOptions& opt = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  const ResolvedRun rr = resolve(cfg);
  fs::create_directories(out_dir);
  auto log = [&](const std::string& s) {
    if (opt.log) opt.log(s);
  };

  RunResult res;
  json& man = res.manifest;
  man = {{"status", "running"},
         {"code_version", IBT_VERSION},
         {"config", config_to_json(cfg)},
         {"resolved", resolved_to_json(rr)}};
  detail::write_json(out_dir / "manifest.json", man);

  try {
    if (cfg.emits("bt_selfcheck")) {
      const auto rep = bt_selfcheck(0);
      man["bt_selfcheck"] = rep.to_json();
      detail::write_json(out_dir / "bt_check.json", rep.to_json());
    }
    if (cfg.emits("squeeze_demo")) {
      const double delta = cfg.z0_rule == Z0Rule::fixed_physical ? cfg.z0_value : rr.z0;
      man["squeeze_demo"] = write_squeeze_demo(squeeze_demo(rr.params.theta(), delta, rr.grid), rr.grid, out_dir);
    }

    if (cfg.needs_propagation()) {
      const Grid1D& g = rr.grid;
      const IBTHamiltonian h = build_ibt_hamiltonian(rr.potential, rr.params, g, g);
      man["resolved"]["escaped_norm_estimate"] = h.escaped_norm_estimate;
      WavefunctionGrid state = initial_state(g, g, rr.z0);

      std::map<std::string, std::ofstream> dens;
      for (const char* m : {"exact", "uncorr", "moment"}) {
        if (!cfg.emits(std::string("density_") + m)) continue;
        auto& f = dens[m];
        f.open(out_dir / (std::string("density_") + m + ".csv"));
        csv::write_row(f, g.points());
      }
      std::ofstream obs_file;
      std::ofstream traj_file;
      if (cfg.emits("observables")) {
        obs_file.open(out_dir / "observables.csv");
        const std::vector<std::string> cols{"t_fs",     "mean_exact", "mean_uncorr", "mean_moment",    "var_exact",
                                            "var_uncorr", "var_moment", "norm_raw",    "neg_norm_score", "moment_order"};
        csv::write_header(obs_file, cols);
        traj_file.open(out_dir / "trajectory.csv");
        const std::vector<std::string> tcols{"t_fs", "mean_z", "mean_zt", "z2", "zt2", "zzt", "energy", "norm"};
        csv::write_header(traj_file, tcols);
      }
      const bool want_wigner = cfg.emits("wigner") || cfg.emits("rdm");
      const Grid1D gp = wigner_momentum_grid(g);
      const double tol_fs = 1e-6 * cfg.sample_every_fs;
      json samples = json::array();
      json wig = json::array();

      auto analyse = [&](const WavefunctionGrid& s, const ObservableRecord& rec) {
        // Label by sample index so times print exactly (10, 20, ... rather than accumulated rounding).
        const long step = std::lround(rec.t / rr.dt);
        const double t_fs = static_cast<double>(step / rr.sample_every) * cfg.sample_every_fs;
        const Density1D ex = exact_density(s, rr.params, cfg.interpolation);
        const Density1D un = uncorrelated_density(s, rr.params, cfg.interpolation);
        const bool wig_now = want_wigner && detail::is_time_in(t_fs, cfg.wigner_times_fs, tol_fs);
        const int cross = wig_now && cfg.emits("wigner") ? cfg.wigner_moment_order : -1;
        const MomentTable mt = physical_moment_table(s, rr.params, cfg.n_max_moments, wig_now, cross);
        const DensityReconstruction rec_z = reconstruct_density(mt, cfg.n_max_moments, cfg.neg_norm_threshold, g);

        SampleDiagnostics d;
        d.t_fs = t_fs;
        d.norm_raw = ex.norm_raw;
        d.uncorr_norm_raw = un.norm_raw;
        d.neg_norm_score = rec_z.diagnostics.negative_norm;
        d.moment_defect = rec_z.diagnostics.moment_defect;
        d.moment_order = rec_z.diagnostics.order_used;
        d.reconstruction_converged = rec_z.diagnostics.converged;
        d.ibt_norm = rec.norm;
        d.ibt_energy = rec.energy;

        ObservableRow row{t_fs,           ex.mean(),      un.mean(),          rec_z.density.mean(),
                          ex.variance(),  un.variance(),  rec_z.density.variance(), ex.norm_raw,
                          d.neg_norm_score, d.moment_order};
        if (obs_file.is_open()) {
          const std::vector<double> v{row.t_fs,      row.mean_exact, row.mean_uncorr, row.mean_moment,
                                      row.var_exact, row.var_uncorr, row.var_moment,  row.norm_raw,
                                      row.neg_norm_score, static_cast<double>(row.moment_order)};
          csv::write_row(obs_file, v);
          const std::vector<double> tv{t_fs, rec.mean_z, rec.mean_zt, rec.z2, rec.zt2, rec.zzt, rec.energy, rec.norm};
          csv::write_row(traj_file, tv);
        }
        if (auto it = dens.find("exact"); it != dens.end())
          csv::write_row(it->second, t_fs, clamp_for_output(ex, d.clamped_exact));
        if (auto it = dens.find("uncorr"); it != dens.end())
          csv::write_row(it->second, t_fs, clamp_for_output(un, d.clamped_uncorr));
        if (auto it = dens.find("moment"); it != dens.end())
          csv::write_row(it->second, t_fs, clamp_for_output(rec_z.density, d.clamped_moment));

        if (!norm_within_tolerance(ex)) {
          log("warning: exact density norm_raw = " + csv::number(ex.norm_raw) + " at t = " + time_label(t_fs) +
              " fs; enlarge the grid");
        }

        if (wig_now) {
          const DensityMatrix1D rho = exact_1rdm(s, rr.params, cfg.interpolation);
          const std::string label = time_label(t_fs);
          if (cfg.emits("rdm")) {
            std::vector<double> re(rho.entries.size()), im(rho.entries.size());
            for (std::size_t k = 0; k < re.size(); ++k) {
              re[k] = rho.entries[k].real();
              im[k] = rho.entries[k].imag();
            }
            write_field(out_dir / ("rdm_re_t" + label + ".csv"), g, g, re);
            write_field(out_dir / ("rdm_im_t" + label + ".csv"), g, g, im);
          }
          if (cfg.emits("wigner")) {
            const WignerGrid w = wigner_from_1rdm(rho);
            write_field(out_dir / ("wigner_t" + label + ".csv"), g, gp, w.values);
            const auto marg = w.position_marginal();
            const auto diag = rho.diagonal();
            WignerDiagnostics wd;
            wd.t_fs = t_fs;
            wd.imag_residue = w.imag_residue;
            for (std::size_t i = 0; i < g.size(); ++i)
              wd.marginal_error = std::max(wd.marginal_error, std::abs(marg.values[i] - diag.values[i]));
            if (w.imag_residue > wigner_imag_tolerance) {
              log("warning: Wigner imaginary residue " + csv::number(w.imag_residue) + " at t = " + label + " fs");
            }
            const auto rec_p = reconstruct_momentum_density(mt, cfg.n_max_moments, cfg.neg_norm_threshold, gp);
            const auto rw = reconstruct_wigner(mt, cfg.wigner_moment_order, rec_z, rec_p);
            write_field(out_dir / ("wigner_moment_t" + label + ".csv"), g, gp, rw.wigner.values);
            wd.moment_marginal_mismatch = rw.diagnostics.marginal_mismatch;
            wd.moment_converged = rw.diagnostics.converged;
            res.wigner.push_back(wd);
            wig.push_back({{"t_fs", t_fs},
                           {"imag_residue", wd.imag_residue},
                           {"marginal_error", wd.marginal_error},
                           {"moment_marginal_mismatch", wd.moment_marginal_mismatch},
                           {"moment_fit_converged", wd.moment_converged}});
          }
        }

        samples.push_back({{"t_fs", t_fs},
                           {"norm_raw", d.norm_raw},
                           {"uncorr_norm_raw", d.uncorr_norm_raw},
                           {"neg_norm_score", d.neg_norm_score},
                           {"moment_defect", d.moment_defect},
                           {"moment_order", d.moment_order},
                           {"reconstruction_converged", d.reconstruction_converged},
                           {"clamped_negative_mass", {d.clamped_exact, d.clamped_uncorr, d.clamped_moment}},
                           {"ibt_norm", d.ibt_norm},
                           {"ibt_energy", d.ibt_energy}});
        res.samples.push_back(d);
        res.observables.push_back(row);
        if (opt.on_sample) opt.on_sample({s, rr.params, rec, ex, un, rec_z});
      };

      const auto traj = propagate(state, h, rr.dt, rr.n_steps, rr.sample_every, analyse);
      res.trajectory = traj.records;
      man["samples"] = samples;
      if (!wig.empty()) man["wigner"] = wig;
    }

    double max_norm_drift = 0.0, max_energy_drift = 0.0;
    bool norm_ok = true, converged = true;
    if (!res.trajectory.empty()) {
      const auto& r0 = res.trajectory.front();
      for (const auto& r : res.trajectory) {
        max_norm_drift = std::max(max_norm_drift, std::abs(r.norm - r0.norm));
        if (r0.energy != 0.0) max_energy_drift = std::max(max_energy_drift, std::abs((r.energy - r0.energy) / r0.energy));
      }
    }
    for (const auto& d : res.samples) {
      norm_ok = norm_ok && std::abs(d.norm_raw - 1.0) <= norm_raw_tolerance;
      converged = converged && d.reconstruction_converged;
    }
    res.exit_code = converged ? exit_ok : exit_not_converged;
    if (!converged) log("warning: some moment reconstructions did not reach the negative-norm threshold");
    man["summary"] = {{"max_norm_drift", max_norm_drift},
                      {"max_relative_energy_drift", max_energy_drift},
                      {"norm_raw_within_tolerance", norm_ok},
                      {"all_reconstructions_converged", converged}};
    man["status"] = "completed";
  } catch (const std::exception& e) {
    man["status"] = "failed";
    man["error"] = e.what();
    man["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    detail::write_json(out_dir / "manifest.json", man);
    throw;
  }
  man["exit_code"] = res.exit_code;
  man["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  detail::write_json(out_dir / "manifest.json", man);
  return res;
}

// ---------------------------------------------------------------------------
// Comparison of density series

struct DensitySeries {
  std::vector<double> grid;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
};

inline DensitySeries read_density_series(const fs::path& p) {
  auto rows = csv::read_numeric(p.string());
  if (rows.empty()) throw std::invalid_argument("empty density file " + p.string());
  DensitySeries s;
  s.grid = std::move(rows.front());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != s.grid.size() + 1) {
      throw std::invalid_argument(p.string() + ": row " + std::to_string(i) + " length does not match the grid");
    }
    s.times.push_back(rows[i].front());
    s.rows.emplace_back(rows[i].begin() + 1, rows[i].end());
  }
  return s;
}

struct DeviationRow {
  double t_fs = 0.0;
  double l1 = 0.0;
  double max_abs = 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
};

inline std::vector<DeviationRow> compare_series(const DensitySeries& a, const DensitySeries& b) {
  if (a.grid.size() != b.grid.size()) throw std::invalid_argument("compare: grids differ in size");
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (std::abs(a.grid[i] - b.grid[i]) > 1e-12 * std::max(1.0, std::abs(a.grid[i]))) {
      throw std::invalid_argument("compare: grid points differ");
    }
  }
  if (a.times.size() != b.times.size()) throw std::invalid_argument("compare: time axes differ in length");
  if (a.grid.size() < 2) throw std::invalid_argument("compare: grid too short");
  const double dx = a.grid[1] - a.grid[0];
  auto stats = [&](const std::vector<double>& v, double& mean, double& var) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      m0 += v[i];
      m1 += v[i] * a.grid[i];
      m2 += v[i] * a.grid[i] * a.grid[i];
    }
    mean = m1 / m0;
    var = m2 / m0 - mean * mean;
  };
  std::vector<DeviationRow> out;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    if (std::abs(a.times[k] - b.times[k]) > 1e-9 * std::max(1.0, std::abs(a.times[k]))) {
      throw std::invalid_argument("compare: sample times differ");
    }
    DeviationRow r;
    r.t_fs = a.times[k];
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
      const double d = std::abs(a.rows[k][i] - b.rows[k][i]);
      r.l1 += d * dx;
      r.max_abs = std::max(r.max_abs, d);
    }
    stats(a.rows[k], r.mean_a, r.var_a);
    stats(b.rows[k], r.mean_b, r.var_b);
    out.push_back(r);
  }
  return out;
}

inline void write_deviations(std::ostream& out, const std::vector<DeviationRow>& rows) {
  const std::vector<std::string> cols{"t_fs", "l1", "max_abs", "mean_a", "mean_b", "var_a", "var_b"};
  csv::write_header(out, cols);
  for (const auto& r : rows) {
    const std::vector<double> v{r.t_fs, r.l1, r.max_abs, r.mean_a, r.mean_b, r.var_a, r.var_b};
    csv::write_row(out, v);
  }
}

/// Compares two density files, or every density_<method>.csv present in both
/// of two run directories. Keys are the file stems.
inline std::map<std::string, std::vector<DeviationRow>> compare(const fs::path& a, const fs::path& b) {
  std::map<std::string, std::vector<DeviationRow>> out;
  if (fs::is_directory(a) != fs::is_directory(b)) {
    throw std::invalid_argument("compare: give two files or two run directories");
  }
  if (!fs::is_directory(a)) {
    out[a.stem().string()] = compare_series(read_density_series(a), read_density_series(b));
    return out;
  }
  for (const char* m : {"density_exact", "density_uncorr", "density_moment"}) {
    const auto fa = a / (std::string(m) + ".csv");
    const auto fb = b / (std::string(m) + ".csv");
    if (fs::exists(fa) && fs::exists(fb)) out[m] = compare_series(read_density_series(fa), read_density_series(fb));
  }
  if (out.empty()) throw std::invalid_argument("compare: no common density files");
  return out;
}

}  // namespace ibt
