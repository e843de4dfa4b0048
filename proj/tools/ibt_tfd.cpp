// Command-line front end: run, compare, squeeze-demo, bt-check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ibt/ibt.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::string> emit;
  std::optional<std::string> temperature;
  std::vector<std::string> overrides;  // key=value
};

ibt::ExperimentConfig build_config(const CommonOptions& o) {
  ibt::ExperimentConfig cfg = o.config.empty() ? ibt::ExperimentConfig{} : ibt::load_config(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ibt::ConfigError("--set expects key=value, got '" + kv + "'");
    ibt::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.emit) ibt::set_config_value(cfg, "emit", *o.emit);
  if (o.temperature) ibt::set_config_value(cfg, "temperature_K", *o.temperature);
  ibt::validate(cfg);
  return cfg;
}

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "Configuration file (key = value lines)");
  app->add_option("--out", o.out, "Output directory")->capture_default_str();
  app->add_option("--emit", o.emit, "Comma-separated outputs, replaces the config's emit set");
  app->add_option("--temperature-K", o.temperature, "Temperature override in kelvin, or 'zero'");
  app->add_option("--set", o.overrides, "Extra key=value config override (repeatable)");
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

int cmd_run(const CommonOptions& o) {
  const auto cfg = build_config(o);
  const auto res = ibt::run(cfg, o.out, {{}, log_line});
  std::cout << "wrote " << o.out << " (" << res.observables.size() << " samples, max relative energy drift "
            << res.manifest["summary"]["max_relative_energy_drift"].get<double>() << ")\n";
  return res.exit_code;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  const auto all = ibt::compare(a, b);
  if (out.empty()) {
    for (const auto& [name, rows] : all) {
      std::cout << "# " << name << '\n';
      ibt::write_deviations(std::cout, rows);
    }
    return ibt::exit_ok;
  }
  fs::create_directories(out);
  for (const auto& [name, rows] : all) {
    std::ofstream f(fs::path(out) / ("compare_" + name + ".csv"));
    ibt::write_deviations(f, rows);
  }
  return ibt::exit_ok;
}

int cmd_squeeze(const CommonOptions& o, std::optional<double> delta) {
  const auto cfg = build_config(o);
  const auto rr = ibt::resolve(cfg);
  fs::create_directories(o.out);
  const double d = delta.value_or(cfg.z0_value);
  const auto rep = ibt::squeeze_demo(rr.params.theta(), d, rr.grid);
  const auto doc = ibt::write_squeeze_demo(rep, rr.grid, o.out);
  std::cout << doc.dump(2) << '\n';
  return ibt::exit_ok;
}

int cmd_bt_check(std::uint64_t seed, int samples, const std::string& out) {
  const auto rep = ibt::bt_selfcheck(seed, samples);
  std::cout << rep.to_json().dump(2) << '\n';
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "bt_check.json") << rep.to_json().dump(2) << '\n';
  }
  return rep.passed ? ibt::exit_ok : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermofield dynamics of an anharmonic oscillator via the inverse Bogoliubov transform"};
  app.set_version_flag("--version", std::string(IBT_VERSION));
  app.require_subcommand(1);

  CommonOptions run_opt;
  auto* run = app.add_subcommand("run", "Propagate and write observables, densities and manifest");
  add_common(run, run_opt);

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp = app.add_subcommand("compare", "Deviation metrics between two density files or run directories");
  cmp->add_option("a", cmp_a, "First file or run directory")->required();
  cmp->add_option("b", cmp_b, "Second file or run directory")->required();
  cmp->add_option("--out", cmp_out, "Directory for compare_<name>.csv (default: stdout)");

  CommonOptions sq_opt;
  std::optional<double> sq_delta;
  auto* sq = app.add_subcommand("squeeze-demo", "Analytic squeezing panels as CSV");
  add_common(sq, sq_opt);
  sq->add_option("--delta", sq_delta, "Initial Gaussian centre (default: the config's z0 value)");

  std::uint64_t seed = 0;
  int samples = 10000;
  std::string bt_out;
  auto* bt = app.add_subcommand("bt-check", "Randomised Bogoliubov-transform identity report");
  bt->add_option("--seed-check", seed, "Seed for the random samples")->capture_default_str();
  bt->add_option("--samples", samples, "Number of random samples")->capture_default_str();
  bt->add_option("--out", bt_out, "Directory for bt_check.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opt);
    if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (*sq) return cmd_squeeze(sq_opt, sq_delta);
    if (*bt) return cmd_bt_check(seed, samples, bt_out);
  } catch (const ibt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ibt::exit_config_error;
  } catch (const ibt::NumericalInstability& e) {
    std::cerr << "numerical instability: " << e.what() << '\n';
    return ibt::exit_numerical_instability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
