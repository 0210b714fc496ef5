#pragma once

// Run configuration: a flat YAML mapping, every key validated before any
// computation, unknown keys rejected.  `--set key=value` overrides are parsed
// with the same YAML scalar rules.

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/almgren.hpp"
#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/harmonics.hpp"
#include "hardy/mode_solver.hpp"
#include "hardy/problem.hpp"

namespace hardy {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  ProblemSpec problem;
  int l_max = 4;
  double t_max = NAN;  // absolute cylinder coordinate; NaN: T0 + 12
  double dt = 0.01;
  int angular_resolution = 0;  // 0: 2 (l_max + 1)
  std::string basis_mode = "auto";
  SolveControls picard;
  std::string stencil = "high_order";
  double window_lo = NAN, window_hi = NAN;
  std::vector<double> r_eval{};  // empty: {R}
  std::uint64_t seed = 20240601;
  int suite_fields = 100;
  int threads = 0;  // 0: keep $HARDY_THREADS / default
  std::string out_dir = "out";

  double resolved_t_max() const { return std::isnan(t_max) ? problem.domain.t0() + 12.0 : t_max; }

  BasisMode resolved_mode() const {
    if (basis_mode == "full") return BasisMode::full;
    if (basis_mode == "zonal") return BasisMode::zonal;
    return default_mode(problem.domain.n);
  }

  Stencil resolved_stencil() const { return stencil == "central2" ? Stencil::central2 : Stencil::high_order; }

  std::vector<double> resolved_r_eval() const { return r_eval.empty() ? std::vector<double>{problem.domain.radius} : r_eval; }

  std::shared_ptr<const HarmonicBasis> basis() const {
    return build_basis(problem.domain.n, l_max, angular_resolution, resolved_mode());
  }

  GridPtr grid() const { return make_grid(problem.domain, resolved_t_max(), dt, basis()); }

  /// Full validation; throws ConfigError naming the offending key.
  void validate() const {
    problem.domain.validate();
    problem.potential.validate();
    problem.nonlinearity.validate(problem.domain.n);
    if (l_max < 0) throw ConfigError("l_max must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (angular_resolution < 0) throw ConfigError("angular_resolution must be >= 0");
    if (basis_mode != "auto" && basis_mode != "full" && basis_mode != "zonal")
      throw ConfigError("basis_mode must be one of auto, full, zonal");
    if (resolved_mode() == BasisMode::full && problem.domain.n != 3)
      throw ConfigError("basis_mode full is only available for n = 3");
    if (stencil != "high_order" && stencil != "central2") throw ConfigError("stencil must be high_order or central2");
    if (suite_fields < 1) throw ConfigError("suite_fields must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    for (double r : r_eval)
      if (!(r > 0.0 && r <= problem.domain.radius)) throw ConfigError(fmt::format("r_eval entry {} outside (0, radius]", r));
    picard.validate();
    try {
      const auto b = basis();
      problem.validate(*b);
      (void)make_grid(problem.domain, resolved_t_max(), dt, b);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

template <class T>
T scalar_as(const YAML::Node& node, const std::string& key, const char* what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("key '{}': expected {}", key, what));
  }
}

inline std::vector<ModeTerm> mode_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw ConfigError(fmt::format("key '{}': expected a list of [l, m, coef]", key));
  std::vector<ModeTerm> out;
  for (const auto& item : node) {
    if (!item.IsSequence() || item.size() != 3)
      throw ConfigError(fmt::format("key '{}': each entry must be [l, m, coef]", key));
    out.push_back({scalar_as<int>(item[0], key, "an integer l"), scalar_as<int>(item[1], key, "an integer m"),
                   scalar_as<double>(item[2], key, "a numeric coefficient")});
  }
  return out;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "n", "radius", "c_h", "eps", "a_modes", "kappa", "p", "boundary_modes", "l_max", "t_max", "dt",
      "angular_resolution", "basis_mode", "max_iterations", "damping", "tolerance", "fd_oracle", "stencil",
      "window_lo", "window_hi", "r_eval", "seed", "suite_fields", "threads", "out_dir"};
  return keys;
}

}  // namespace detail

/// Apply one key to the config.
inline void apply_key(RunConfig& c, const std::string& key, const YAML::Node& v) {
  using detail::scalar_as;
  static constexpr const char* num = "a number";
  static constexpr const char* integer = "an integer";
  if (!detail::known_keys().contains(key)) throw ConfigError(fmt::format("unknown key '{}'", key));
  if (key == "n") c.problem.domain.n = scalar_as<int>(v, key, integer);
  else if (key == "radius") c.problem.domain.radius = scalar_as<double>(v, key, num);
  else if (key == "c_h") c.problem.potential.c_h = scalar_as<double>(v, key, num);
  else if (key == "eps") c.problem.potential.eps = scalar_as<double>(v, key, num);
  else if (key == "a_modes") c.problem.potential.a_modes = detail::mode_list(v, key);
  else if (key == "kappa") c.problem.nonlinearity.kappa = scalar_as<double>(v, key, num);
  else if (key == "p") c.problem.nonlinearity.p = scalar_as<double>(v, key, num);
  else if (key == "boundary_modes") c.problem.boundary = detail::mode_list(v, key);
  else if (key == "l_max") c.l_max = scalar_as<int>(v, key, integer);
  else if (key == "t_max") c.t_max = scalar_as<double>(v, key, num);
  else if (key == "dt") c.dt = scalar_as<double>(v, key, num);
  else if (key == "angular_resolution") c.angular_resolution = scalar_as<int>(v, key, integer);
  else if (key == "basis_mode") c.basis_mode = scalar_as<std::string>(v, key, "a string");
  else if (key == "max_iterations") c.picard.max_iterations = scalar_as<int>(v, key, integer);
  else if (key == "damping") c.picard.damping = scalar_as<double>(v, key, num);
  else if (key == "tolerance") c.picard.tolerance = scalar_as<double>(v, key, num);
  else if (key == "fd_oracle") c.picard.fd_oracle = scalar_as<bool>(v, key, "true or false");
  else if (key == "stencil") c.stencil = scalar_as<std::string>(v, key, "a string");
  else if (key == "window_lo") c.window_lo = v.IsNull() ? NAN : scalar_as<double>(v, key, num);  // null: automatic
  else if (key == "window_hi") c.window_hi = v.IsNull() ? NAN : scalar_as<double>(v, key, num);  // null: automatic
  else if (key == "r_eval") {
    if (!v.IsSequence()) throw ConfigError("key 'r_eval': expected a list of radii");
    c.r_eval.clear();
    for (const auto& x : v) c.r_eval.push_back(scalar_as<double>(x, key, num));
  } else if (key == "seed") c.seed = scalar_as<std::uint64_t>(v, key, "a non-negative integer");
  else if (key == "suite_fields") c.suite_fields = scalar_as<int>(v, key, integer);
  else if (key == "threads") c.threads = scalar_as<int>(v, key, integer);
  else if (key == "out_dir") c.out_dir = scalar_as<std::string>(v, key, "a string");
}

inline void apply_yaml(RunConfig& c, const YAML::Node& root) {
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping of key: value");
  for (const auto& kv : root) apply_key(c, kv.first.as<std::string>(), kv.second);
}

inline RunConfig parse_config_string(const std::string& text, RunConfig base = {}) {
  try {
    apply_yaml(base, YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("malformed configuration: {}", e.what()));
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), std::move(base));
}

/// "key=value" override.
inline void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  const std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("override '{}': {}", assignment, e.what()));
  }
  apply_key(c, key, value);
}

inline nlohmann::json modes_json(const std::vector<ModeTerm>& terms) {
  auto a = nlohmann::json::array();
  for (const auto& t : terms) a.push_back({t.l, t.m, t.coef});
  return a;
}

/// Resolved configuration (defaults filled in).  Keys are sorted, so the dump
/// is canonical.  out_dir and threads do not affect results and are left out.
inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["n"] = c.problem.domain.n;
  j["radius"] = c.problem.domain.radius;
  j["c_h"] = c.problem.potential.c_h;
  j["eps"] = c.problem.potential.eps;
  j["a_modes"] = modes_json(c.problem.potential.a_modes);
  j["kappa"] = c.problem.nonlinearity.kappa;
  j["p"] = c.problem.nonlinearity.p;
  j["boundary_modes"] = modes_json(c.problem.boundary);
  j["l_max"] = c.l_max;
  j["t_max"] = c.resolved_t_max();
  j["dt"] = c.dt;
  j["angular_resolution"] = c.angular_resolution > 0 ? c.angular_resolution : HarmonicBasis::default_resolution(c.l_max);
  j["basis_mode"] = to_string(c.resolved_mode());
  j["max_iterations"] = c.picard.max_iterations;
  j["damping"] = c.picard.damping;
  j["tolerance"] = c.picard.tolerance;
  j["fd_oracle"] = c.picard.fd_oracle;
  j["stencil"] = c.stencil;
  j["window_lo"] = std::isnan(c.window_lo) ? nlohmann::json() : nlohmann::json(c.window_lo);
  j["window_hi"] = std::isnan(c.window_hi) ? nlohmann::json() : nlohmann::json(c.window_hi);
  j["r_eval"] = c.resolved_r_eval();
  j["seed"] = c.seed;
  j["suite_fields"] = c.suite_fields;
  return j;
}

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

/// The semilinear problem used throughout the acceptance checks.
inline RunConfig reference_config() {
  RunConfig c;
  c.problem.domain = {3, 0.5};
  c.problem.potential.c_h = 0.1;
  c.problem.potential.eps = 1.0;
  c.problem.nonlinearity.kappa = 0.05;
  c.problem.nonlinearity.p = 3.0;
  c.problem.boundary = {{1, 1, 1.0}};
  c.l_max = 4;
  c.dt = 0.01;
  c.r_eval = {0.5, 0.4};
  return c;
}

}  // namespace hardy
