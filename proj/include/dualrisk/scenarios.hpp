#pragma once

// Verification scenarios: each runs the analytic route and the simulator
// (or a second analytic route) on one of the built-in parameter sets and
// reports side-by-side values with a pass/fail verdict.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dualrisk/distributions.hpp"
#include "dualrisk/market.hpp"
#include "dualrisk/montecarlo.hpp"
#include "dualrisk/solver.hpp"
#include "dualrisk/statedep.hpp"

namespace dualrisk {

struct CheckResult {
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
  double std_err = std::numeric_limits<double>::quiet_NaN();  // MC checks only
  double z = std::numeric_limits<double>::quiet_NaN();        // MC checks only
  double tolerance = 0.0;  // allowed |observed - expected|
  bool pass = false;
  std::string note;
};

struct VerifyReport {
  std::string scenario;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return !checks.empty();
  }
};

struct VerifyOptions {
  std::uint64_t paths = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double tail = 1e-4;
  double euler_dt = 1e-3;
  double cap = 1e3;
  double z_max = 3.5;
};

struct LinearFit {
  double slope;
  double intercept;
  double r2;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double ss_res = syy - slope * sxy;
  return {slope, my - slope * mx, syy > 0 ? 1.0 - ss_res / syy : 1.0};
}

/// Smallest x >= x0 on a 0.05 lattice with value(x) <= tail.
inline double barrier_from_value(const std::function<double(double)>& value, double x0, double tail) {
  double b = x0 + 0.05;
  while (value(b) > tail) {
    b += 0.05;
    if (b > 1e4) throw ConfigError("no survival barrier below 1e4 reaches the requested tail");
  }
  return b;
}

namespace detail {

inline SimConfig sim_for(const VerifyOptions& o, std::uint64_t stream, double barrier) {
  SimConfig s;
  s.n_paths = o.paths;
  s.base_seed = o.seed + (stream << 32);
  s.threads = o.threads;
  s.barrier_tail = o.tail;
  s.survival_barrier = barrier;
  s.euler_dt = o.euler_dt;
  s.cap_M = o.cap;
  return s;
}

inline CheckResult mc_check(std::string name, double expected, const MCEstimate& e, double z_max,
                            double extra_tolerance = 0.0) {
  CheckResult c;
  c.name = std::move(name);
  c.expected = expected;
  c.observed = e.p_hat;
  c.std_err = e.std_err;
  c.z = e.z_score(expected);
  c.tolerance = std::max(z_max * e.std_err, extra_tolerance);
  c.pass = std::abs(c.observed - c.expected) <= c.tolerance;
  for (const auto& w : e.warnings) c.note += (c.note.empty() ? "" : "; ") + w;
  return c;
}

inline CheckResult exact_check(std::string name, double expected, double observed, double tol) {
  CheckResult c;
  c.name = std::move(name);
  c.expected = expected;
  c.observed = observed;
  c.tolerance = tol;
  c.pass = std::abs(observed - expected) <= tol;
  return c;
}

inline CheckResult flag_check(std::string name, bool ok, std::string note = "") {
  CheckResult c;
  c.name = std::move(name);
  c.expected = 1.0;
  c.observed = ok ? 1.0 : 0.0;
  c.pass = ok;
  c.note = std::move(note);
  return c;
}

inline const JumpLaw& fig1_law() {
  static const JumpLaw law = JumpLaw::exponential(0.1);
  return law;
}
inline ModelParams fig1_params() { return {0.1, 0.1, 1.0, 0.5}; }
inline MarketParams fig1_market() { return {0.1, 0.2}; }

inline const std::vector<double>& fig1_wealths() {
  static const std::vector<double> xs = {0.5, 1.0, 2.0};
  return xs;
}

inline void fig1_constant(VerifyReport& r, const VerifyOptions& o, double c, double beta,
                          std::uint64_t stream0) {
  std::uint64_t stream = stream0;
  for (double x : fig1_wealths()) {
    const auto cfg = sim_for(o, stream++, choose_barrier(beta, o.tail));
    const auto e = simulate_constant(fig1_law(), fig1_params(), c, x, cfg);
    r.checks.push_back(mc_check("ruin at x=" + std::to_string(x).substr(0, 4), std::exp(-beta * x), e,
                                o.z_max));
  }
}

inline VerifyReport verify_fig1_noinvest(const VerifyOptions& o) {
  VerifyReport r{"fig1_noinvest", {}};
  const auto p = fig1_params();
  const double alpha = *alpha_no_investment(fig1_law(), p.rho, p.lambda);
  r.checks.push_back(exact_check("alpha", p.lambda / p.rho - 0.1, alpha, 1e-10));
  fig1_constant(r, o, 0.0, alpha, 0);
  return r;
}

inline VerifyReport verify_fig1_rd(const VerifyOptions& o) {
  VerifyReport r{"fig1_rd", {}};
  const auto s = solve_sublinear(fig1_law(), fig1_params());
  r.checks.push_back(exact_check("implicit C* residual", 0.0, s.c_residual, 1e-9));
  fig1_constant(r, o, s.c_star.value(), s.beta, 10);
  return r;
}

inline VerifyReport verify_fig1_market(const VerifyOptions& o) {
  VerifyReport r{"fig1_market", {}};
  const auto p = fig1_params();
  const auto m = fig1_market();
  const auto s = solve_market_sublinear(fig1_law(), p, m);
  r.checks.push_back(exact_check("A* sigma^2 beta / mu", 1.0, s.a_star * m.sigma * m.sigma * s.beta / m.mu,
                                 1e-12));
  std::uint64_t stream = 20;
  for (double x : fig1_wealths()) {
    const auto cfg = sim_for(o, stream++, choose_barrier(s.beta, o.tail));
    const auto e = simulate_market(fig1_law(), p, m, s.c_star, s.a_star, x, cfg);
    const double drift = e.step_drift.value_or(0.0);
    auto c = mc_check("ruin at x=" + std::to_string(x).substr(0, 4), std::exp(-s.beta * x), e, o.z_max,
                      3.0 * std::abs(drift));
    c.note += (c.note.empty() ? "" : "; ") + std::string("step drift ") + std::to_string(drift);
    r.checks.push_back(c);
  }
  return r;
}

inline StateExampleIParams fig5_params() { return StateExampleIParams::make(1.0, 0.1, 1.0, 1.0, 1.0, 0.1, 0.5); }
inline StateExampleIIParams fig6_params() { return {1.0, 1.0, 1.0, 1.2, 0.4, 0.1}; }

inline VerifyReport verify_fig5_stateI(const VerifyOptions& o) {
  VerifyReport r{"fig5_stateI", {}};
  const auto ex = fig5_params();
  const StateValueEvaluator quad(ex.model(), ex.nu, ConstantPolicy{ex.c0});
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double x = 0.25 * k;
    worst = std::max(worst, std::abs(closed_form_state_ex1(ex, x) - quad.value(x)));
  }
  r.checks.push_back(exact_check("max |closed form - quadrature| on 20 points", 0.0, worst, 1e-8));
  auto v = [&](double x) { return closed_form_state_ex1(ex, x); };
  std::uint64_t stream = 30;
  for (double x : {0.5, 1.0, 2.0}) {
    auto cfg = sim_for(o, stream++, barrier_from_value(v, x, o.tail));
    const auto e = simulate_state(ex.model(), ex.nu, ConstantPolicy{ex.c0}, x, cfg);
    r.checks.push_back(mc_check("ruin at x=" + std::to_string(x).substr(0, 4), v(x), e, o.z_max));
  }
  return r;
}

inline VerifyReport verify_fig6_stateII(const VerifyOptions& o) {
  VerifyReport r{"fig6_stateII", {}};
  const auto ex = fig6_params();
  const double xs = ex.x_star();
  const auto at = ex2_branch_values(ex, xs);
  r.checks.push_back(exact_check("continuity at x*", at.power, at.exponential, 1e-10));

  // Decay character: below x* a power of (1+x) fits better than an
  // exponential; above x* the log-slope is -(delta0 - nu).
  std::vector<double> lx, x_lin, lv;
  for (int k = 0; k <= 30; ++k) {
    const double x = xs * k / 30.0;
    lx.push_back(std::log1p(x));
    x_lin.push_back(x);
    lv.push_back(std::log(closed_form_state_ex2(ex, x)));
  }
  const auto power_fit = linear_fit(lx, lv);
  const auto exp_fit = linear_fit(x_lin, lv);
  r.checks.push_back(flag_check("polynomial decay below x*", power_fit.r2 > exp_fit.r2,
                                "R2 log-log " + std::to_string(power_fit.r2) + " vs semilog " +
                                    std::to_string(exp_fit.r2)));
  std::vector<double> xa, la;
  for (int k = 0; k <= 40; ++k) {
    const double x = 5.0 + 10.0 * k / 40.0;
    xa.push_back(x);
    la.push_back(std::log(closed_form_state_ex2(ex, x)));
  }
  const double rate = -linear_fit(xa, la).slope;
  const double target = ex.delta0 - ex.nu;
  r.checks.push_back(exact_check("exponential rate above x*", target, rate, 0.05 * target));

  auto v = [&](double x) { return closed_form_state_ex2(ex, x); };
  const double x0 = 5.0;
  auto cfg = sim_for(o, 40, barrier_from_value(v, x0, o.tail));
  const auto e = simulate_state(ex.model(), ex.nu, BangBangPolicy{}, x0, cfg);
  auto c = mc_check("ruin at x=5 (cap " + std::to_string(static_cast<long long>(o.cap)) + ")", v(x0), e,
                    o.z_max, 0.01);
  if (e.cap_drift) c.note += (c.note.empty() ? "" : "; ") + std::string("cap drift ") + std::to_string(*e.cap_drift);
  r.checks.push_back(c);
  return r;
}

inline VerifyReport verify_gamma1_thresholds(const VerifyOptions& o) {
  VerifyReport r{"gamma1_thresholds", {}};
  const JumpLaw law = JumpLaw::exponential(0.1);
  const double x0 = 0.5;
  std::uint64_t stream = 50;
  for (double delta : {4.5, 5.5}) {
    const ModelParams p{0.1, 0.5, delta, 1.0};
    const auto s = solve_singular(law, p);
    const bool invest = delta > p.lambda / p.rho;
    const std::string tag = "delta=" + std::to_string(delta).substr(0, 3);
    r.checks.push_back(flag_check(tag + " regime", s.regime == (invest ? Regime::SingularMaxInvest
                                                                         : Regime::SingularNoInvest),
                                  to_string(s.regime)));
    const double closed = invest ? delta - 0.1 : p.lambda / p.rho - 0.1;
    r.checks.push_back(exact_check(tag + " exponent", closed, s.beta, 1e-10));

    // Simulate both candidate policies; the optimal one must be lower.
    const double alpha0 = *alpha_constant_strategy(law, p, 0.0);
    const double alpha_cap = *alpha_constant_strategy(law, p, o.cap);
    const double b = choose_barrier(std::min(alpha0, alpha_cap), o.tail);
    const auto e0 = simulate_constant(law, p, SpendingRate::finite(0.0), x0, sim_for(o, stream++, b));
    const auto ec = simulate_constant(law, p, SpendingRate::maximal(), x0, sim_for(o, stream++, b));
    r.checks.push_back(mc_check(tag + " no investment", std::exp(-alpha0 * x0), e0, o.z_max));
    r.checks.push_back(mc_check(tag + " capped maximal", std::exp(-alpha_cap * x0), ec, o.z_max));
    const auto& best = invest ? ec : e0;
    const auto& other = invest ? e0 : ec;
    const double joint = std::hypot(best.std_err, other.std_err);
    r.checks.push_back(flag_check(tag + " optimal policy has lower ruin",
                                  other.p_hat - best.p_hat > o.z_max * joint,
                                  std::to_string(best.p_hat) + " vs " + std::to_string(other.p_hat)));
  }
  return r;
}

inline VerifyReport verify_beta_c_limit(const VerifyOptions&) {
  VerifyReport r{"beta_c_limit", {}};
  const JumpLaw law = JumpLaw::exponential(0.1);
  const ModelParams p{1.0, 0.1, 1.0, 1.0};
  const MarketParams m{0.1, 0.2};
  const auto s = solve_market_singular(law, p, m);
  r.checks.push_back(flag_check("beta1 <= beta2 (maximal investment regime)", s.beta1 <= s.beta2,
                                std::to_string(s.beta1) + " vs " + std::to_string(s.beta2)));
  double prev = -1.0;
  bool monotone = true;
  double last = 0.0;
  for (double c = 0.0; c <= 1e6; c = (c == 0.0 ? 1.0 : c * 10.0)) {
    const double b = beta_of_capped_c(law, p, m, c);
    if (c == 0.0) r.checks.push_back(exact_check("beta(0) = beta1", s.beta1, b, 1e-12));
    monotone = monotone && b > prev;
    prev = b;
    last = b;
  }
  r.checks.push_back(flag_check("beta(c) increasing over c in {0, 1, ..., 1e6}", monotone));
  r.checks.push_back(exact_check("beta(1e6) vs beta2", s.beta2, last, 1e-3));
  return r;
}

}  // namespace detail

inline VerifyReport verify_scenario(const std::string& name, const VerifyOptions& o) {
  if (name == "fig1_noinvest") return detail::verify_fig1_noinvest(o);
  if (name == "fig1_rd") return detail::verify_fig1_rd(o);
  if (name == "fig1_market") return detail::verify_fig1_market(o);
  if (name == "fig5_stateI") return detail::verify_fig5_stateI(o);
  if (name == "fig6_stateII") return detail::verify_fig6_stateII(o);
  if (name == "gamma1_thresholds") return detail::verify_gamma1_thresholds(o);
  if (name == "beta_c_limit") return detail::verify_beta_c_limit(o);
  throw ConfigError("unknown verification scenario '" + name + "'");
}

/// Scenarios that draw random numbers and therefore need a seed.
inline bool scenario_is_randomized(const std::string& name) { return name != "beta_c_limit"; }

}  // namespace dualrisk
