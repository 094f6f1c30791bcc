#pragma once

// Subcommand implementations behind the dualrisk executable. Each takes a
// RunConfig and an output stream and returns the process exit code:
//   0 success, 1 configuration or numeric error, 2 infeasible model,
//   3 verification failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualrisk/asymptotics.hpp"
#include "dualrisk/config.hpp"
#include "dualrisk/market.hpp"
#include "dualrisk/montecarlo.hpp"
#include "dualrisk/scenarios.hpp"
#include "dualrisk/solver.hpp"
#include "dualrisk/statedep.hpp"

namespace dualrisk {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInfeasible = 2, kExitVerifyFailed = 3 };

class InfeasibleColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// 12 significant digits, shortest form.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline nlohmann::json json_num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json json_rate(const SpendingRate& c) {
  if (c.is_max()) return "max";
  return c.value();
}

inline std::vector<double> linspace(double a, double b, std::uint64_t n) {
  std::vector<double> out(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (n > 1) out.back() = b;
  return out;
}

inline std::string format_of(const RunConfig& cfg, const std::string& fallback) {
  return cfg.text("output.format", fallback);
}

/// Optimal feedback policy for a state-dependent configuration.
inline Policy state_policy(const RunConfig& cfg, const StateModel& model) {
  const std::string kind = cfg.text("state.policy", "optimal");
  if (kind == "zero") return ConstantPolicy{0.0};
  if (kind == "constant") return ConstantPolicy{cfg.real("state.c")};
  if (model.gamma == 1.0) return BangBangPolicy{};
  return FunctionPolicy{[model](double x) { return c_star_pointwise(model, x); }};
}

/// Value function of the uncontrolled state model. The rational intensity
/// with matching nu has a closed form; other models go through quadrature.
inline std::function<double(double)> state_noinvest(const StateModel& model, double nu) {
  if (const auto* r = std::get_if<RhoRatioCoef>(&model.lambda); r && r->nu == nu) {
    StateExampleIIParams ex{1.0, 1.0, 1.0, r->lambda0, 0.0, nu};
    const double l0 = r->lambda0;
    if (!(l0 > 1.0)) throw InfeasibleColumn("v_noinvest: lambda0 <= 1, ruin is certain without investment");
    return [ex](double x) { return no_investment_state_ex2(ex, x); };
  }
  auto ev = std::make_shared<StateValueEvaluator>(model, nu, ConstantPolicy{0.0});
  return [ev](double x) { return ev->value(x); };
}

}  // namespace detail

/// Feasibility, regime, exponent and optimal controls as JSON.
inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const JumpLaw law = cfg.jump_law();
  const ModelParams p = cfg.model_params();
  const auto market = cfg.market();
  nlohmann::json j;
  bool feasible;
  if (market && p.gamma <= 1.0) {
    const auto s = solve_market(law, p, *market);
    feasible = true;
    j["feasible"] = true;
    j["regime"] = to_string(s.regime);
    j["beta"] = detail::json_num(s.beta);
    j["c_star"] = detail::json_rate(s.c_star);
    j["a_star"] = detail::json_num(s.a_star);
    j["residual"] = detail::json_num(s.residual);
    if (p.gamma < 1.0) {
      j["c_residual"] = detail::json_num(s.c_residual);
    } else {
      j["beta1"] = detail::json_num(s.beta1);
      j["beta2"] = detail::json_num(s.beta2);
    }
  } else {
    const auto s = solve(law, p);
    feasible = s.feasible;
    j["feasible"] = s.feasible;
    j["regime"] = to_string(s.regime);
    j["beta"] = s.feasible ? detail::json_num(s.beta) : nlohmann::json(nullptr);
    j["c_star"] = detail::json_rate(s.c_star);
    j["a_star"] = nullptr;
    j["residual"] = detail::json_num(s.residual);
    if (p.gamma < 1.0) {
      j["c_residual"] = detail::json_num(s.c_residual);
      j["condition_lhs"] = condition_one_lhs(law, p);
    }
    if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  }
  if (detail::format_of(cfg, "json") == "csv") {
    std::string head, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const char* sep = it == j.begin() ? "" : ",";
      head += sep + it.key();
      std::string v;
      if (it->is_number()) {
        v = detail::csv_num(it->get<double>());
      } else if (it->is_string()) {
        v = it->get<std::string>();
      } else if (it->is_boolean()) {
        v = it->get<bool>() ? "1" : "0";
      }
      row += sep + v;
    }
    out << head << "\n" << row << "\n";
  } else {
    out << j.dump(2) << "\n";
  }
  return feasible ? kExitOk : kExitInfeasible;
}

/// Value-function table over an x grid.
inline int cmd_curve(const RunConfig& cfg, std::ostream& out) {
  const double x_min = cfg.real("task.x_min", 0.0);
  const double x_max = cfg.real("task.x_max", 10.0);
  const std::uint64_t n = cfg.count("task.x_n", 101);
  if (n < 2 || !(x_min < x_max)) throw ConfigError("curve grid needs n >= 2 and x_min < x_max");
  const JumpLaw law = cfg.jump_law();

  std::vector<std::string> names;
  std::vector<std::function<double(double)>> cols;
  if (cfg.is_state_model()) {
    const StateModel model = cfg.state_model();
    if (!law.is_exponential()) throw ConfigError("state-dependent models need exponential jumps");
    const double nu = law.exponential_rate();
    names = {"v_noinvest", "v_rd"};
    cols.push_back(detail::state_noinvest(model, nu));
    auto ev = std::make_shared<StateValueEvaluator>(model, nu, detail::state_policy(cfg, model));
    cols.push_back([ev](double x) { return ev->value(x); });
  } else {
    const ModelParams p = cfg.model_params();
    const auto alpha = alpha_no_investment(law, p.rho, p.lambda);
    if (!alpha) throw InfeasibleColumn("v_noinvest: lambda E[Y] <= rho, ruin is certain without investment");
    names.push_back("v_noinvest");
    cols.push_back([a = *alpha](double x) { return x <= 0.0 ? 1.0 : std::exp(-a * x); });
    const auto s = solve(law, p);
    if (!s.feasible) throw InfeasibleColumn("v_rd: " + s.diagnostic);
    names.push_back("v_rd");
    cols.push_back([s](double x) { return s.value_at(x); });
    if (const auto m = cfg.market()) {
      const auto sm = solve_market(law, p, *m);
      names.push_back("v_rd_market");
      cols.push_back([sm](double x) { return sm.value_at(x); });
    }
  }
  out << "x";
  for (const auto& nm : names) out << "," << nm;
  out << "\n";
  for (double x : detail::linspace(x_min, x_max, n)) {
    out << detail::csv_num(x);
    for (const auto& f : cols) out << "," << detail::csv_num(f(x));
    out << "\n";
  }
  return kExitOk;
}

/// Long-format heat map of C* over two parameter axes.
inline int cmd_heatmap(const RunConfig& cfg, std::ostream& out) {
  const JumpLaw law = cfg.jump_law();
  const ModelParams base = cfg.model_params();
  const std::string ax = cfg.text("task.grid_x", "gamma");
  const std::string ay = cfg.text("task.grid_y", "delta");
  const auto nx = cfg.count("task.grid_x_n", 20);
  const auto ny = cfg.count("task.grid_y_n", 20);
  if (nx < 2 || ny < 2) throw ConfigError("heat map grids need at least two points per axis");
  const auto xs = detail::linspace(cfg.real("task.grid_x_min"), cfg.real("task.grid_x_max"), nx);
  const auto ys = detail::linspace(cfg.real("task.grid_y_min"), cfg.real("task.grid_y_max"), ny);
  out << ax << "," << ay << ",c_star,feasible\n";
  for (double x : xs) {
    for (double y : ys) {
      ModelParams p = base;
      (ax == "gamma" ? p.gamma : p.rho) = x;
      (ay == "delta" ? p.delta : p.lambda) = y;
      if (!(p.gamma < 1.0)) throw ConfigError("heat map cells need gamma < 1");
      const auto s = solve_sublinear(law, p);
      out << detail::csv_num(x) << "," << detail::csv_num(y) << ","
          << (s.feasible ? detail::csv_num(s.c_star.value()) : "") << "," << (s.feasible ? 1 : 0)
          << "\n";
    }
  }
  return kExitOk;
}

inline int cmd_asymptotics(const RunConfig& cfg, std::ostream& out) {
  const Knob knob = knob_from_string(cfg.text("task.knob", "rho_to_zero"));
  const auto rep = asymptotic_report(cfg.jump_law(), cfg.model_params(), knob, cfg.market());
  out << rep.param_name << ",feasible,beta,c_star,predicted,ratio\n";
  for (const auto& r : rep.rows) {
    out << detail::csv_num(r.param) << "," << (r.feasible ? 1 : 0) << ","
        << (r.feasible ? detail::csv_num(r.beta) : "") << ","
        << (r.feasible ? detail::csv_num(r.c_star) : "") << "," << detail::csv_num(r.predicted) << ","
        << (r.feasible ? detail::csv_num(r.ratio) : "") << "\n";
  }
  return kExitOk;
}

inline nlohmann::json estimate_json(const MCEstimate& e) {
  nlohmann::json j;
  j["p_hat"] = e.p_hat;
  j["std_err"] = e.std_err;
  j["n_paths"] = e.n_paths;
  j["n_ruined"] = e.n_ruined;
  j["n_survived"] = e.n_survived;
  j["n_censored"] = e.n_censored;
  j["bias_bound"] = e.bias_bound;
  j["bias_bound_kind"] = e.bias_bound_rigorous ? "closed-form" : "heuristic";
  if (e.step_drift) {
    j["step_drift"] = *e.step_drift;
    j["step_drift_se"] = *e.step_drift_se;
  }
  if (e.cap_drift) {
    j["cap_drift"] = *e.cap_drift;
    j["cap_drift_se"] = *e.cap_drift_se;
  }
  j["warnings"] = e.warnings;
  return j;
}

/// Monte Carlo estimate of the ruin probability from task.x0 under the
/// configured strategy, next to the analytic value.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  SimConfig sim = cfg.sim_config(true);
  const double x0 = cfg.real("task.x0", 1.0);
  const JumpLaw law = cfg.jump_law();
  const std::string strategy = cfg.text("task.strategy", "optimal");
  nlohmann::json j;
  MCEstimate e;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  bool rigorous = false;

  if (cfg.is_state_model()) {
    const StateModel model = cfg.state_model();
    const double nu = law.exponential_rate();
    Policy policy = detail::state_policy(cfg, model);
    if (strategy == "noinvest") policy = ConstantPolicy{0.0};
    if (strategy == "constant") policy = ConstantPolicy{cfg.real("task.c")};
    const StateValueEvaluator ev(model, nu, policy);
    analytic = ev.value(x0);
    if (!cfg.has("sim.barrier")) {
      sim.survival_barrier = barrier_from_value([&](double x) { return ev.value(x); }, x0, sim.barrier_tail);
    }
    e = simulate_state(model, nu, policy, x0, sim);
    j["strategy"] = strategy;
  } else {
    const ModelParams p = cfg.model_params();
    const auto market = cfg.market();
    SpendingRate c = SpendingRate::finite(0.0);
    double a = 0.0;
    double beta = std::numeric_limits<double>::quiet_NaN();
    if (strategy == "noinvest") {
      if (auto al = alpha_no_investment(law, p.rho, p.lambda)) beta = *al;
    } else if (strategy == "constant") {
      c = SpendingRate::finite(cfg.real("task.c"));
      if (auto al = alpha_constant_strategy(law, p, c.value())) beta = *al;
    } else if (market) {
      const auto s = solve_market(law, p, *market);
      c = s.c_star;
      a = s.a_star;
      beta = s.beta;
    } else {
      const auto s = solve(law, p);
      if (!s.feasible) {
        out << nlohmann::json{{"feasible", false}, {"diagnostic", s.diagnostic}}.dump(2) << "\n";
        return kExitInfeasible;
      }
      if (std::isinf(s.beta)) throw ConfigError("degenerate regime has no finite strategy to simulate");
      c = s.c_star;
      beta = s.beta;
    }
    // An explicit exposure has no closed-form exponent to compare with.
    if (cfg.has("task.a")) a = cfg.real("task.a");
    if (std::isfinite(beta) && !cfg.has("task.a")) {
      analytic = std::exp(-beta * x0);
      rigorous = true;
      if (!cfg.has("sim.barrier")) sim.survival_barrier = choose_barrier(beta, sim.barrier_tail);
    } else if (!cfg.has("sim.barrier")) {
      throw ConfigError("no exponent available to choose a barrier; set sim.barrier");
    }
    if (market) {
      e = simulate_market(law, p, *market, c, a, x0, sim);
    } else {
      e = simulate_constant(law, p, c, x0, sim);
    }
    j["strategy"] = strategy;
    j["c"] = detail::json_rate(c);
    j["a"] = a;
  }
  e.bias_bound_rigorous = rigorous && !cfg.has("sim.barrier");
  j["x0"] = x0;
  j["barrier"] = sim.survival_barrier;
  j["analytic"] = detail::json_num(analytic);
  j["z"] = std::isfinite(analytic) ? detail::json_num(e.z_score(analytic)) : nlohmann::json(nullptr);
  j["estimate"] = estimate_json(e);
  out << j.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.has("task.scenario")) throw ConfigError("verify needs task.scenario (or --scenario)");
  const std::string name = cfg.text("task.scenario");
  VerifyOptions o;
  const SimConfig sim = cfg.sim_config(scenario_is_randomized(name));
  o.paths = sim.n_paths;
  o.seed = sim.base_seed;
  o.threads = sim.threads;
  o.tail = sim.barrier_tail;
  o.euler_dt = sim.euler_dt;
  o.cap = sim.cap_M;
  const auto rep = verify_scenario(name, o);
  if (detail::format_of(cfg, "csv") == "json") {
    nlohmann::json j;
    j["scenario"] = rep.scenario;
    j["pass"] = rep.all_pass();
    for (const auto& c : rep.checks) {
      j["checks"].push_back({{"name", c.name},
                             {"expected", detail::json_num(c.expected)},
                             {"observed", detail::json_num(c.observed)},
                             {"std_err", detail::json_num(c.std_err)},
                             {"z", detail::json_num(c.z)},
                             {"tolerance", detail::json_num(c.tolerance)},
                             {"pass", c.pass},
                             {"note", c.note}});
    }
    out << j.dump(2) << "\n";
  } else {
    out << "check,expected,observed,std_err,z,tolerance,pass,note\n";
    for (const auto& c : rep.checks) {
      auto opt = [](double v) { return std::isnan(v) ? std::string() : detail::csv_num(v); };
      out << "\"" << c.name << "\"," << detail::csv_num(c.expected) << "," << detail::csv_num(c.observed)
          << "," << opt(c.std_err) << "," << opt(c.z) << "," << detail::csv_num(c.tolerance) << ","
          << (c.pass ? "PASS" : "FAIL") << ",\"" << c.note << "\"\n";
    }
  }
  return rep.all_pass() ? kExitOk : kExitVerifyFailed;
}

}  // namespace dualrisk
