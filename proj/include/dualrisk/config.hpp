#pragma once

// Flat key = value run configuration. One key per line, '#' starts a
// comment, unknown keys are rejected. Values are normalized on entry
// (reals are stored with 17 significant digits) so that to_text() output
// parses back to an identical configuration.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualrisk/distributions.hpp"
#include "dualrisk/market.hpp"
#include "dualrisk/montecarlo.hpp"
#include "dualrisk/solver.hpp"
#include "dualrisk/statedep.hpp"

namespace dualrisk {

enum class ValueKind { Real, NonNegativeReal, PositiveReal, Count, Seed, Choice, Coefficient, Text };

struct KeySpec {
  const char* key;
  ValueKind kind;
  const char* choices;  // space separated, Choice only
  const char* doc;
};

inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"model.law", ValueKind::Choice, "exponential gamma deterministic", "jump size family"},
      {"model.nu", ValueKind::PositiveReal, "", "exponential jump rate"},
      {"model.shape", ValueKind::PositiveReal, "", "gamma jump shape k"},
      {"model.theta", ValueKind::PositiveReal, "", "gamma jump rate theta"},
      {"model.y0", ValueKind::PositiveReal, "", "deterministic jump size"},
      {"model.rho", ValueKind::PositiveReal, "", "running cost rate"},
      {"model.lambda", ValueKind::PositiveReal, "", "base profit intensity"},
      {"model.delta", ValueKind::PositiveReal, "", "R&D effectiveness"},
      {"model.gamma", ValueKind::PositiveReal, "", "concavity exponent"},
      {"model.mu", ValueKind::PositiveReal, "", "market index drift"},
      {"model.sigma", ValueKind::PositiveReal, "", "market index volatility"},
      {"state.rho", ValueKind::Coefficient, "", "state-dependent rho(x)"},
      {"state.lambda", ValueKind::Coefficient, "", "state-dependent lambda(x)"},
      {"state.delta", ValueKind::Coefficient, "", "state-dependent delta(x)"},
      {"state.policy", ValueKind::Choice, "optimal zero constant", "feedback policy for state models"},
      {"state.c", ValueKind::NonNegativeReal, "", "rate for state.policy = constant"},
      {"task.x_min", ValueKind::NonNegativeReal, "", "curve grid start"},
      {"task.x_max", ValueKind::PositiveReal, "", "curve grid end"},
      {"task.x_n", ValueKind::Count, "", "curve grid points"},
      {"task.x0", ValueKind::PositiveReal, "", "initial wealth for simulate"},
      {"task.strategy", ValueKind::Choice, "optimal noinvest constant", "strategy for simulate"},
      {"task.c", ValueKind::NonNegativeReal, "", "rate for task.strategy = constant"},
      {"task.a", ValueKind::Real, "", "market exposure for simulate (default A*)"},
      {"task.scenario", ValueKind::Choice,
       "fig1_noinvest fig1_rd fig1_market fig5_stateI fig6_stateII gamma1_thresholds beta_c_limit",
       "verification scenario"},
      {"task.knob", ValueKind::Choice,
       "rho_to_zero delta_to_infinity delta_to_zero lambda_to_infinity boundary gamma_to_zero "
       "gamma_to_one market_rho_to_zero",
       "asymptotic sweep"},
      {"task.grid_x", ValueKind::Choice, "gamma rho", "heat map first axis"},
      {"task.grid_x_min", ValueKind::PositiveReal, "", ""},
      {"task.grid_x_max", ValueKind::PositiveReal, "", ""},
      {"task.grid_x_n", ValueKind::Count, "", ""},
      {"task.grid_y", ValueKind::Choice, "delta lambda", "heat map second axis"},
      {"task.grid_y_min", ValueKind::PositiveReal, "", ""},
      {"task.grid_y_max", ValueKind::PositiveReal, "", ""},
      {"task.grid_y_n", ValueKind::Count, "", ""},
      {"sim.paths", ValueKind::Count, "", "Monte Carlo paths"},
      {"sim.seed", ValueKind::Seed, "", "base seed (required by randomized commands)"},
      {"sim.threads", ValueKind::Count, "", "worker threads"},
      {"sim.tail", ValueKind::PositiveReal, "", "survival barrier tail e^{-beta B}"},
      {"sim.barrier", ValueKind::PositiveReal, "", "explicit survival barrier"},
      {"sim.dt", ValueKind::PositiveReal, "", "Euler step"},
      {"sim.cap", ValueKind::PositiveReal, "", "finite cap for maximal spending"},
      {"sim.t_max", ValueKind::PositiveReal, "", "censoring horizon"},
      {"output.path", ValueKind::Text, "", "output file (default stdout)"},
      {"output.format", ValueKind::Choice, "csv json", "output format"},
  };
  return schema;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline double parse_real(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + text + "' is not a finite number");
  }
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(key + ": '" + text + "' is out of range");
  return static_cast<std::uint64_t>(v);
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const KeySpec& find_spec(const std::string& key) {
  for (const auto& s : config_schema()) {
    if (key == s.key) return s;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

inline Coefficient parse_coefficient(const std::string& key, const std::string& text) {
  const auto w = split_ws(text);
  auto need = [&](std::size_t n) {
    if (w.size() != n + 1) {
      throw ConfigError(key + ": '" + w.front() + "' takes " + std::to_string(n) + " numbers");
    }
  };
  if (w.empty()) throw ConfigError(key + ": empty coefficient");
  if (w[0] == "constant") {
    need(1);
    return ConstantCoef{parse_real(key, w[1])};
  }
  if (w[0] == "affine") {
    need(3);
    return AffineCoef{parse_real(key, w[1]), parse_real(key, w[2]), parse_real(key, w[3])};
  }
  if (w[0] == "rational") {
    need(2);
    return RhoRatioCoef{parse_real(key, w[1]), parse_real(key, w[2])};
  }
  throw ConfigError(key + ": coefficient kind must be constant, affine or rational");
}

inline std::string format_coefficient(const Coefficient& c) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ConstantCoef>) {
          return "constant " + format_real(k.value);
        } else if constexpr (std::is_same_v<T, AffineCoef>) {
          return "affine " + format_real(k.scale) + " " + format_real(k.c1) + " " + format_real(k.c2);
        } else {
          return "rational " + format_real(k.nu) + " " + format_real(k.lambda0);
        }
      },
      c);
}

/// Validates one value against its key and returns the normalized text.
inline std::string normalize(const std::string& key, const std::string& raw) {
  const KeySpec& spec = find_spec(key);
  const std::string v = trim(raw);
  switch (spec.kind) {
    case ValueKind::Real: return format_real(parse_real(key, v));
    case ValueKind::NonNegativeReal: {
      const double x = parse_real(key, v);
      if (x < 0.0) throw ConfigError(key + " must be >= 0");
      return format_real(x);
    }
    case ValueKind::PositiveReal: {
      const double x = parse_real(key, v);
      if (!(x > 0.0)) throw ConfigError(key + " must be > 0");
      return format_real(x);
    }
    case ValueKind::Count: {
      const auto n = parse_unsigned(key, v);
      if (n == 0) throw ConfigError(key + " must be >= 1");
      return std::to_string(n);
    }
    case ValueKind::Seed: return std::to_string(parse_unsigned(key, v));
    case ValueKind::Choice: {
      for (const auto& c : split_ws(spec.choices)) {
        if (c == v) return v;
      }
      throw ConfigError(key + ": '" + v + "' is not one of {" + spec.choices + "}");
    }
    case ValueKind::Coefficient: return format_coefficient(parse_coefficient(key, v));
    case ValueKind::Text:
      if (v.empty()) throw ConfigError(key + " must not be empty");
      return v;
  }
  return v;
}

}  // namespace detail

class RunConfig {
 public:
  /// Parses configuration text; duplicate keys within one text are errors.
  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      if (seen.count(key)) {
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      }
      seen[key] = lineno;
      cfg.set(key, line.substr(eq + 1));
    }
    return cfg;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = detail::normalize(key, value);
  }

  /// Applies "key=value".
  void set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
  }

  /// Later entries win.
  void merge(const RunConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double real(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return detail::parse_real(key, it->second);
  }
  double real(const std::string& key, double fallback) const {
    return has(key) ? real(key) : fallback;
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : detail::parse_unsigned(key, it->second);
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  // Typed views.

  JumpLaw jump_law() const {
    const std::string kind = text("model.law", "exponential");
    if (kind == "exponential") return JumpLaw::exponential(real("model.nu"));
    if (kind == "gamma") return JumpLaw::gamma(real("model.shape"), real("model.theta"));
    return JumpLaw::deterministic(real("model.y0"));
  }

  ModelParams model_params() const {
    ModelParams p{real("model.rho"), real("model.lambda"), real("model.delta"), real("model.gamma")};
    p.validate();
    return p;
  }

  std::optional<MarketParams> market() const {
    if (!has("model.mu") && !has("model.sigma")) return std::nullopt;
    MarketParams m{real("model.mu"), real("model.sigma")};
    m.validate();
    return m;
  }

  bool is_state_model() const {
    return has("state.rho") || has("state.lambda") || has("state.delta");
  }

  StateModel state_model() const {
    for (const char* k : {"state.rho", "state.lambda", "state.delta"}) {
      if (!has(k)) throw ConfigError(std::string("state model needs ") + k);
    }
    StateModel m{detail::parse_coefficient("state.rho", text("state.rho")),
                 detail::parse_coefficient("state.lambda", text("state.lambda")),
                 detail::parse_coefficient("state.delta", text("state.delta")), real("model.gamma")};
    m.validate();
    return m;
  }

  /// Simulation settings; `seed_required` enforces an explicit seed.
  SimConfig sim_config(bool seed_required) const {
    if (seed_required && !has("sim.seed")) {
      throw ConfigError("randomized commands need an explicit seed (--seed or sim.seed)");
    }
    SimConfig s;
    s.n_paths = count("sim.paths", 100000);
    s.base_seed = count("sim.seed", 0);
    s.threads = static_cast<unsigned>(count("sim.threads", 1));
    s.barrier_tail = real("sim.tail", 1e-4);
    s.survival_barrier = real("sim.barrier", 0.0);
    s.euler_dt = real("sim.dt", 1e-3);
    s.cap_M = real("sim.cap", 1e3);
    s.t_max = real("sim.t_max", 1e5);
    return s;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Built-in named configurations, one per verification or plotting setup.
inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "fig1_noinvest", "fig1_rd",      "fig1_market",       "fig5_stateI",
      "fig6_stateII",  "gamma1_thresholds", "beta_c_limit", "fig3_heatmap",
      "fig4_heatmap"};
  return names;
}

inline RunConfig scenario_config(const std::string& name) {
  const std::string fig1 =
      "model.law = exponential\nmodel.nu = 0.1\nmodel.rho = 0.1\nmodel.lambda = 0.1\n"
      "model.delta = 1\nmodel.gamma = 0.5\ntask.x_min = 0\ntask.x_max = 10\ntask.x_n = 101\n";
  const std::string market = "model.mu = 0.1\nmodel.sigma = 0.2\n";
  std::string body;
  if (name == "fig1_noinvest" || name == "fig1_rd") {
    body = fig1;
  } else if (name == "fig1_market") {
    body = fig1 + market;
  } else if (name == "fig5_stateI") {
    body =
        "model.law = exponential\nmodel.nu = 0.1\nmodel.gamma = 0.5\n"
        "state.rho = constant 1\nstate.lambda = affine 0.1 1 1\nstate.delta = affine 1 1 1\n"
        "task.x_min = 0\ntask.x_max = 5\ntask.x_n = 51\n";
  } else if (name == "fig6_stateII") {
    body =
        "model.law = exponential\nmodel.nu = 0.1\nmodel.gamma = 1\n"
        "state.rho = affine 1 1 1\nstate.lambda = rational 0.1 1.2\nstate.delta = constant 0.4\n"
        "task.x_min = 0\ntask.x_max = 15\ntask.x_n = 151\n";
  } else if (name == "gamma1_thresholds") {
    body =
        "model.law = exponential\nmodel.nu = 0.1\nmodel.rho = 0.1\nmodel.lambda = 0.5\n"
        "model.delta = 5.5\nmodel.gamma = 1\n";
  } else if (name == "beta_c_limit") {
    body =
        "model.law = exponential\nmodel.nu = 0.1\nmodel.rho = 1\nmodel.lambda = 0.1\n"
        "model.delta = 1\nmodel.gamma = 1\n" + market;
  } else if (name == "fig3_heatmap") {
    body =
        "model.law = exponential\nmodel.nu = 2\nmodel.rho = 2\nmodel.lambda = 0.1\n"
        "model.delta = 1\nmodel.gamma = 0.5\n"
        "task.grid_x = gamma\ntask.grid_x_min = 0.05\ntask.grid_x_max = 0.95\ntask.grid_x_n = 19\n"
        "task.grid_y = delta\ntask.grid_y_min = 0.1\ntask.grid_y_max = 20\ntask.grid_y_n = 40\n";
  } else if (name == "fig4_heatmap") {
    body =
        "model.law = exponential\nmodel.nu = 0.1\nmodel.rho = 1\nmodel.lambda = 0.1\n"
        "model.delta = 1\nmodel.gamma = 0.5\n"
        "task.grid_x = rho\ntask.grid_x_min = 0.1\ntask.grid_x_max = 40\ntask.grid_x_n = 40\n"
        "task.grid_y = lambda\ntask.grid_y_min = 0.01\ntask.grid_y_max = 1\ntask.grid_y_n = 40\n";
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  RunConfig cfg = RunConfig::parse(body);
  for (const auto& s : detail::split_ws(detail::find_spec("task.scenario").choices)) {
    if (s == name) cfg.set("task.scenario", name);
  }
  return cfg;
}

}  // namespace dualrisk
