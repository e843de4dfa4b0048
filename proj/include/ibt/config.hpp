#pragma once

// Experiment configuration: a flat `key = value` file with `#` comments.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ibt/errors.hpp"
#include "ibt/grid.hpp"

namespace ibt {

enum class Z0Rule { fixed_physical, explicit_value };

inline const std::set<std::string>& known_emit_targets() {
  static const std::set<std::string> names{"density_exact", "density_uncorr", "density_moment", "rdm",
                                           "wigner",        "observables",    "squeeze_demo",   "bt_selfcheck"};
  return names;
}

struct ExperimentConfig {
  double omega_cm1 = 200.0;
  double a3_au = 7.35e-5;
  double a4_au = 7.35e-6;
  double temperature_K = 0.0;  // 0 means the exact zero-temperature limit
  double alpha_re = 0.0;
  double alpha_im = 0.0;
  Z0Rule z0_rule = Z0Rule::fixed_physical;
  double z0_value = 0.5;
  std::size_t grid_n = 256;
  double grid_halfwidth = 12.0;
  double dt_fs = 0.25;
  double t_total_fs = 1000.0;
  double sample_every_fs = 10.0;
  int n_max_moments = 20;
  double neg_norm_threshold = 1e-4;
  std::set<std::string> emit{"observables", "density_exact", "density_uncorr", "density_moment"};
  std::vector<double> wigner_times_fs;
  int wigner_moment_order = 8;
  Interpolation interpolation = Interpolation::cubic;

  bool emits(const std::string& what) const { return emit.count(what) != 0; }

  /// True when any requested output needs a propagation.
  bool needs_propagation() const {
    return std::any_of(emit.begin(), emit.end(),
                       [](const std::string& e) { return e != "squeeze_demo" && e != "bt_selfcheck"; });
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + t + "'");
  }
  return v;
}

inline long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + t + "'");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "name(value)" -> {name, value}
inline std::pair<std::string, std::optional<std::string>> split_call(const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos) return {trim(text), std::nullopt};
  const auto close = text.rfind(')');
  if (close == std::string::npos || close < open || !trim(text.substr(close + 1)).empty()) {
    throw ConfigError("config: malformed rule '" + text + "'");
  }
  return {trim(text.substr(0, open)), trim(text.substr(open + 1, close - open - 1))};
}

}  // namespace detail

/// Sets one key; used for both file lines and command-line overrides.
inline void set_config_value(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string value = detail::trim(raw_value);
  using detail::parse_double;
  if (key == "omega_cm1") {
    c.omega_cm1 = parse_double(key, value);
  } else if (key == "a3_au") {
    c.a3_au = parse_double(key, value);
  } else if (key == "a4_au") {
    c.a4_au = parse_double(key, value);
  } else if (key == "temperature_K") {
    c.temperature_K = value == "zero" ? 0.0 : parse_double(key, value);
  } else if (key == "alpha_re") {
    c.alpha_re = parse_double(key, value);
  } else if (key == "alpha_im") {
    c.alpha_im = parse_double(key, value);
  } else if (key == "z0_rule") {
    const auto [name, arg] = detail::split_call(value);
    if (name == "fixed_physical") {
      c.z0_rule = Z0Rule::fixed_physical;
    } else if (name == "explicit") {
      c.z0_rule = Z0Rule::explicit_value;
    } else {
      throw ConfigError("config key 'z0_rule': expected fixed_physical(v) or explicit(v), got '" + value + "'");
    }
    if (!arg) throw ConfigError("config key 'z0_rule': missing value in '" + value + "'");
    c.z0_value = parse_double(key, *arg);
  } else if (key == "grid_n") {
    const long n = detail::parse_integer(key, value);
    if (n <= 0) throw ConfigError("config key 'grid_n' must be positive");
    c.grid_n = static_cast<std::size_t>(n);
  } else if (key == "grid_halfwidth") {
    c.grid_halfwidth = parse_double(key, value);
  } else if (key == "dt_fs") {
    c.dt_fs = parse_double(key, value);
  } else if (key == "t_total_fs") {
    c.t_total_fs = parse_double(key, value);
  } else if (key == "sample_every_fs") {
    c.sample_every_fs = parse_double(key, value);
  } else if (key == "n_max_moments") {
    c.n_max_moments = static_cast<int>(detail::parse_integer(key, value));
  } else if (key == "neg_norm_threshold") {
    c.neg_norm_threshold = parse_double(key, value);
  } else if (key == "emit") {
    c.emit.clear();
    for (auto& e : detail::split_list(value)) c.emit.insert(e);
  } else if (key == "wigner_times_fs") {
    c.wigner_times_fs.clear();
    for (auto& e : detail::split_list(value)) c.wigner_times_fs.push_back(parse_double(key, e));
  } else if (key == "wigner_moment_order") {
    c.wigner_moment_order = static_cast<int>(detail::parse_integer(key, value));
  } else if (key == "interpolation") {
    if (value == "cubic") {
      c.interpolation = Interpolation::cubic;
    } else if (value == "linear" || value == "bilinear") {
      c.interpolation = Interpolation::linear;
    } else {
      throw ConfigError("config key 'interpolation': expected cubic or linear, got '" + value + "'");
    }
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      set_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

namespace detail {

// Number of dt steps in `span`, or nullopt if span is not a whole multiple of dt.
inline std::optional<long> whole_steps(double span, double dt) {
  const double r = span / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, n)) return std::nullopt;
  return static_cast<long>(n);
}

}  // namespace detail

/// Throws ConfigError describing the first violated constraint.
inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.omega_cm1 > 0.0, "omega_cm1 must be positive");
  require(c.temperature_K >= 0.0, "temperature_K must be >= 0 (or 'zero')");
  require(c.grid_n >= 8 && std::has_single_bit(c.grid_n), "grid_n must be a power of two >= 8");
  require(c.grid_halfwidth > 0.0, "grid_halfwidth must be positive");
  require(c.dt_fs > 0.0, "dt_fs must be positive");
  require(c.t_total_fs >= 0.0, "t_total_fs must be >= 0");
  require(c.sample_every_fs > 0.0, "sample_every_fs must be positive");
  require(detail::whole_steps(c.sample_every_fs, c.dt_fs).has_value(),
          "sample_every_fs must be a whole multiple of dt_fs");
  require(detail::whole_steps(c.t_total_fs, c.dt_fs).has_value(), "t_total_fs must be a whole multiple of dt_fs");
  require(c.n_max_moments >= 2 && c.n_max_moments <= 20, "n_max_moments must lie in [2, 20]");
  require(c.neg_norm_threshold > 0.0, "neg_norm_threshold must be positive");
  require(c.wigner_moment_order >= 0 && c.wigner_moment_order <= 20, "wigner_moment_order must lie in [0, 20]");
  for (const auto& e : c.emit) require(known_emit_targets().count(e) != 0, "unknown emit target '" + e + "'");
  for (double t : c.wigner_times_fs) {
    require(t >= 0.0 && t <= c.t_total_fs * (1.0 + 1e-12), "wigner_times_fs entries must lie in [0, t_total_fs]");
    require(detail::whole_steps(t, c.sample_every_fs).has_value(),
            "wigner_times_fs entries must be multiples of sample_every_fs");
  }
  require(std::isfinite(c.z0_value), "z0 value must be finite");
}

}  // namespace ibt
