// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "ibt/ibt.hpp"
#include "support/single_mode.hpp"

namespace {

using namespace ibt;
namespace fs = std::filesystem;

constexpr double half_cosh_2theta_300 = 1.1212848234093296;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << std::endl;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

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

double wigner_l1_to_thermal(const Grid1D& gz, const Grid1D& gp, const std::vector<double>& w, double z0, double v) {
  double err = 0.0;
  for (std::size_t i = 0; i < gz.size(); ++i)
    for (std::size_t j = 0; j < gp.size(); ++j)
      err += std::abs(w[i * gp.size() + j] - gaussian(gz.point(i), z0, v) * gaussian(gp.point(j), 0.0, v));
  return err * gz.dx() * gp.dx();
}

struct ConservationCheck {
  double norm_drift;
  double energy_drift;
};

ConservationCheck conservation(const RunResult& r) {
  return {r.manifest["summary"]["max_norm_drift"].get<double>(),
          r.manifest["summary"]["max_relative_energy_drift"].get<double>()};
}

struct ReconstructionCheck {
  bool ok = true;
  double worst_neg = 0.0;
  int min_order = 99, max_order = -1;
};

ReconstructionCheck reconstructions(const RunResult& r, double threshold) {
  ReconstructionCheck c;
  for (const auto& s : r.samples) {
    c.worst_neg = std::max(c.worst_neg, s.neg_norm_score);
    c.min_order = std::min(c.min_order, s.moment_order);
    c.max_order = std::max(c.max_order, s.moment_order);
    c.ok = c.ok && s.reconstruction_converged && s.neg_norm_score <= threshold && s.moment_order >= 4 &&
           s.moment_order <= 20;
  }
  return c;
}

double strang_ratio() {
  const double omega = units::wavenumber_to_hartree(200.0);
  const Grid1D g = Grid1D::symmetric(64, 10.0);
  const auto h = build_ibt_hamiltonian({omega, 0.0, 0.0, 0.0}, ThermalParams::zero_temperature(omega), g, g);
  const double T = units::fs_to_atomic_time(200.0);
  auto err = [&](double dt_fs) {
    auto s = initial_state(g, g, 0.5);
    const double dt = units::fs_to_atomic_time(dt_fs);
    const long n = std::lround(T / dt);
    const auto traj = propagate(s, h, dt, n, n);
    return std::abs(traj.records.back().mean_z - 0.5 * std::cos(omega * traj.records.back().t));
  };
  return err(2.0) / err(1.0);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_out";
  fs::path configs = fs::path(IBT_SOURCE_DIR) / "configs";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string a = argv[i];
    if (a == "--out") {
      out = argv[i + 1];
    } else if (a == "--configs") {
      configs = argv[i + 1];
    } else {
      std::cerr << "usage: ibt_acceptance [--out dir] [--configs dir]\n";
      return 2;
    }
  }
  const auto t_start = std::chrono::steady_clock::now();
  auto log = [](const std::string& s) { std::cerr << s << '\n'; };

  try {
    const auto cfg0 = load_config((configs / "reference_T0.cfg").string());
    const auto cfg300 = load_config((configs / "reference_T300.cfg").string());

    // Zero-temperature reference run, keeping the exact densities for the oracle comparison.
    std::vector<std::vector<double>> dens0;
    RunOptions opt0;
    opt0.log = log;
    opt0.on_sample = [&](const SampleContext& c) { dens0.push_back(c.exact.values); };
    const auto r0 = run(cfg0, out / "T0", opt0);
    const auto rr0 = resolve(cfg0);

    RunOptions opt300;
    opt300.log = log;
    const auto r300 = run(cfg300, out / "T300", opt300);
    const auto rr300 = resolve(cfg300);

    // 1
    {
      const double m0 = r0.observables.front().mean_exact;
      const double m300 = r300.observables.front().mean_exact;
      const double e = std::max(std::abs(m0 - 0.5), std::abs(m300 - 0.5));
      report(1, e <= 1e-6, "t=0 mean T0 " + fmt(m0) + ", 300 K " + fmt(m300) + " (max error " + fmt(e) + ")");
    }

    // 2
    {
      const auto& g = rr0.grid;
      const oracle::SingleMode m{g.size(), g.x_min(), g.dx(), rr0.potential.omega_z, rr0.potential.a3,
                                 rr0.potential.a4, rr0.params.delta_z()};
      const auto ref = oracle::propagate_gaussian(m, rr0.z0, rr0.dt, rr0.n_steps, rr0.sample_every);
      double worst = 0.0;
      bool ok = ref.size() == dens0.size() && !ref.empty();
      for (std::size_t k = 0; ok && k < ref.size(); ++k)
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(ref[k][i] - dens0[k][i]));
      ok = ok && worst <= 1e-8;
      report(2, ok,
             std::to_string(dens0.size()) + " samples vs single-mode propagation, max abs deviation " + fmt(worst));
    }

    // 3
    {
      double worst = 0.0;
      for (const auto& o : r300.observables) {
        worst = std::max({worst, std::abs(o.mean_exact - o.mean_uncorr), std::abs(o.mean_exact - o.mean_moment),
                          std::abs(o.mean_uncorr - o.mean_moment)});
      }
      report(3, worst <= 1e-3, "max pairwise mean difference over 1 ps at 300 K " + fmt(worst));
    }

    // 4
    {
      double worst_moment = 0.0, worst_early = 0.0, t_worst_early = 0.0;
      for (const auto& o : r300.observables) {
        worst_moment = std::max(worst_moment, rel(o.var_moment, o.var_exact));
        if (o.t_fs < 50.0 && rel(o.var_uncorr, o.var_exact) > worst_early) {
          worst_early = rel(o.var_uncorr, o.var_exact);
          t_worst_early = o.t_fs;
        }
      }
      const auto& last = r300.observables.back();
      const bool a = worst_moment <= 0.02;
      const bool b_early = worst_early <= 0.02;
      const bool b_late = last.var_uncorr > last.var_exact;
      report(4, a && b_early && b_late,
             std::string("(a) ") + (a ? "ok" : "fails") + ": moment variance max rel error " + fmt(worst_moment) +
                 "; (b) " + (b_early && b_late ? "ok" : "fails") + ": uncorrelated variance max rel error below 50 fs " +
                 fmt(worst_early) + " at " + fmt(t_worst_early) + " fs, at " + fmt(last.t_fs) + " fs " +
                 fmt(last.var_uncorr) + " vs exact " + fmt(last.var_exact));
    }

    // 5
    {
      const double v = r300.observables.front().var_exact;
      const double e = std::abs(v - half_cosh_2theta_300);
      report(5, e <= 1e-4, "t=0 variance at 300 K " + fmt(v) + " vs " + fmt(half_cosh_2theta_300) + " (error " +
                               fmt(e) + ")");
    }

    // 6
    {
      const auto c0 = reconstructions(r0, cfg0.neg_norm_threshold);
      const auto c300 = reconstructions(r300, cfg300.neg_norm_threshold);
      const Grid1D g = Grid1D::symmetric(512, 12.0);
      const auto gauss = reconstruct_density(gaussian_moments(0.3, 0.8, 15), 15, 1e-4, g);
      const double gauss_l1 = l1_to(gauss.density, [](double x) { return gaussian(x, 0.3, 0.8); });
      const auto ma = gaussian_moments(1.0, 0.3, 15), mb = gaussian_moments(-1.0, 0.3, 15);
      std::vector<double> mix(16);
      for (int n = 0; n <= 15; ++n) mix[n] = 0.5 * (ma[n] + mb[n]);
      const auto mixr = reconstruct_density(mix, 15, 1e-4, g);
      const double mix_l1 =
          l1_to(mixr.density, [](double x) { return 0.5 * gaussian(x, 1.0, 0.3) + 0.5 * gaussian(x, -1.0, 0.3); });
      const bool ok = c0.ok && c300.ok && gauss_l1 <= 1e-6 && mix_l1 <= 0.02;
      report(6, ok,
             "negative norm max " + fmt(std::max(c0.worst_neg, c300.worst_neg)) + ", orders " +
                 std::to_string(std::min(c0.min_order, c300.min_order)) + ".." +
                 std::to_string(std::max(c0.max_order, c300.max_order)) + ", Gaussian L1 " + fmt(gauss_l1) +
                 ", mixture L1 " + fmt(mix_l1));
    }

    // 7
    {
      const double theta = rr300.params.theta();
      const double delta = 0.5;
      const auto rep = squeeze_demo(theta, delta, Grid1D::symmetric(256, 12.0));
      const double want[2] = {std::exp(theta) * delta, delta};
      double centre_err = 0.0, mass_err = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& c = rep.cases[k];
        centre_err = std::max({centre_err, std::abs(c.closed_form_center - want[k]),
                               std::abs(c.map_center.a - want[k]), std::abs(c.map_center.b - want[k])});
        mass_err = std::max(mass_err, std::abs(c.integral - 1.0));
      }
      report(7, centre_err <= 1e-12 && mass_err <= 1e-8,
             "centre error " + fmt(centre_err) + ", integral error " + fmt(mass_err));
    }

    // 8
    {
      double imag = 0.0, marg = 0.0;
      for (const auto* r : {&r0, &r300})
        for (const auto& w : r->wigner) {
          imag = std::max(imag, w.imag_residue);
          marg = std::max(marg, w.marginal_error);
        }
      const bool produced = !r300.wigner.empty();
      // Thermal oscillator at 300 K: the initial state, through the 1-RDM and through moments.
      const auto& g = rr300.grid;
      const auto s = initial_state(g, g, rr300.z0);
      const auto rho = exact_1rdm(s, rr300.params, cfg300.interpolation);
      const auto w = wigner_from_1rdm(rho);
      imag = std::max(imag, w.imag_residue);
      const auto mw = w.position_marginal();
      const auto diag = rho.diagonal();
      for (std::size_t i = 0; i < g.size(); ++i) marg = std::max(marg, std::abs(mw.values[i] - diag.values[i]));
      const double v = half_cosh_2theta_300;
      const double l1_rdm = wigner_l1_to_thermal(g, w.grid_p, w.values, 0.5, v);
      const auto mt = physical_moment_table(s, rr300.params, cfg300.n_max_moments, true, cfg300.wigner_moment_order);
      const auto rz = reconstruct_density(mt, cfg300.n_max_moments, cfg300.neg_norm_threshold, g);
      const auto rp = reconstruct_momentum_density(mt, cfg300.n_max_moments, cfg300.neg_norm_threshold, w.grid_p);
      const auto rw = reconstruct_wigner(mt, cfg300.wigner_moment_order, rz, rp);
      const double l1_mom = wigner_l1_to_thermal(g, w.grid_p, rw.wigner.values, 0.5, v);
      const bool ok = produced && imag < 1e-6 && marg < 1e-6 && l1_rdm <= 1e-3 && l1_mom <= 1e-3;
      report(8, ok,
             std::to_string(r300.wigner.size() + 1) + " surfaces, imaginary residue max " + fmt(imag) +
                 ", marginal error max " + fmt(marg) + ", thermal oscillator L1 " + fmt(l1_rdm) +
                 " (1-RDM) and " + fmt(l1_mom) + " (moments)");
    }

    // 9
    {
      const auto a = conservation(r0), b = conservation(r300);
      const double nd = std::max(a.norm_drift, b.norm_drift);
      const double ed = std::max(a.energy_drift, b.energy_drift);
      const double ratio = strang_ratio();
      report(9, nd < 1e-8 && ed < 1e-6 && std::abs(ratio - 4.0) <= 0.5,
             "norm drift " + fmt(nd) + ", relative energy drift " + fmt(ed) + ", dt/(dt/2) error ratio " +
                 fmt(ratio));
    }

    // 10
    {
      const auto rep = bt_selfcheck(20240611, 10000);
      report(10, rep.passed && rep.g_at_zero == -1.0,
             "isometry " + fmt(std::max(rep.boson_isometry, rep.fermion_isometry)) + ", determinant " +
                 fmt(rep.determinant_error) + ", xi/eta round trip " + fmt(rep.xi_eta_roundtrip) + " over " +
                 std::to_string(rep.samples) + " samples, g(0) = " + fmt(rep.g_at_zero));
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + (failures == 1 ? " criterion fails" : " criteria fail")) << " ("
            << fmt(wall) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
