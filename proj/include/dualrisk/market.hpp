#pragma once

// Joint R&D spending and investment of a constant amount A in a market
// index dS = mu S dt + sigma S dW. The diffusion adds the constant
// -mu^2 / (2 sigma^2) to the characteristic equations; the optimal exposure
// is A* = mu / (sigma^2 beta).

#include <cmath>
#include <stdexcept>
#include <string>

#include "dualrisk/solver.hpp"

namespace dualrisk {

struct MarketParams {
  double mu = 0.0;     // index drift
  double sigma = 0.0;  // index volatility

  void validate() const {
    if (!(mu > 0.0) || !(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
      throw std::invalid_argument("market parameters mu and sigma must be positive");
    }
  }

  /// mu^2 / (2 sigma^2)
  double half_sharpe_squared() const { return 0.5 * mu * mu / (sigma * sigma); }

  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

struct MarketRuinSolution {
  double beta = 0.0;
  SpendingRate c_star;
  double a_star = 0.0;
  Regime regime = Regime::SubLinearMarket;
  double beta1 = 0.0;  // gamma == 1 only: no-investment branch
  double beta2 = 0.0;  // gamma == 1 only: maximal-investment branch (0 if absent)
  double residual = 0.0;
  double c_residual = 0.0;

  double value_at(double x) const { return x <= 0.0 ? 1.0 : std::exp(-beta * x); }
};

inline double optimal_exposure(const MarketParams& m, double beta) {
  return m.mu / (m.sigma * m.sigma * beta);
}

/// H(beta) = G(beta) - mu^2 / (2 sigma^2 beta), increasing on (0, inf).
inline double market_characteristic(const GEvaluator& g, const ModelParams& p,
                                    const MarketParams& m, double beta) {
  return sublinear_characteristic(g, p, beta) - m.half_sharpe_squared() / beta;
}

/// 0 < gamma < 1. Always feasible: H < 0 near 0 and H -> rho at infinity.
inline MarketRuinSolution solve_market_sublinear(const JumpLaw& law, const ModelParams& p,
                                                 const MarketParams& m) {
  p.validate();
  m.validate();
  if (!(p.gamma < 1.0)) throw WrongRegime("solve_market_sublinear requires 0 < gamma < 1");
  const GEvaluator g(law);
  auto H = [&](double b) { return market_characteristic(g, p, m, b); };
  MarketRuinSolution s;
  s.regime = Regime::SubLinearMarket;
  s.beta = detail::solve_increasing(H);
  const double c = c_star_from_beta(g, p, s.beta);
  s.c_star = SpendingRate::finite(c);
  s.a_star = optimal_exposure(m, s.beta);
  s.residual = H(s.beta);
  // the diffusion term lowers the effective cost rate in the first-order condition
  ModelParams eff = p;
  eff.rho -= m.half_sharpe_squared() / s.beta;
  s.c_residual = implicit_c_residual(eff, c);
  return s;
}

/// F(beta) = rho beta + lambda (L(beta) - 1) - mu^2 / (2 sigma^2).
inline double market_f(const JumpLaw& law, const ModelParams& p, const MarketParams& m,
                       double beta) {
  return p.rho * beta - p.lambda * law.one_minus_laplace(beta) - m.half_sharpe_squared();
}

/// G(beta) = beta + delta (L(beta) - 1).
inline double market_g(const JumpLaw& law, const ModelParams& p, double beta) {
  return beta - p.delta * law.one_minus_laplace(beta);
}

/// gamma == 1. The value function is exp(-max(beta1, beta2) x) where beta1
/// solves F = 0 and beta2 solves G = 0 (beta2 = 0 when delta E[Y] <= 1).
inline MarketRuinSolution solve_market_singular(const JumpLaw& law, const ModelParams& p,
                                                const MarketParams& m) {
  p.validate();
  m.validate();
  if (p.gamma != 1.0) throw WrongRegime("solve_market_singular requires gamma == 1");
  const GEvaluator g(law);
  const double k = m.half_sharpe_squared();
  auto f_over_beta = [&](double b) { return p.rho - p.lambda * g(b) - k / b; };
  MarketRuinSolution s;
  s.beta1 = detail::solve_increasing(f_over_beta);
  if (p.delta * law.mean() > 1.0) {
    auto g_over_beta = [&](double b) { return 1.0 - p.delta * g(b); };
    s.beta2 = detail::solve_increasing(g_over_beta);
  }
  if (s.beta1 > s.beta2) {
    s.beta = s.beta1;
    s.regime = Regime::SingularMarketNoInvest;
    s.c_star = SpendingRate::finite(0.0);
    s.residual = market_f(law, p, m, s.beta);
  } else {
    s.beta = s.beta2;
    s.regime = Regime::SingularMarketMaxInvest;
    s.c_star = SpendingRate::maximal();
    s.residual = market_g(law, p, s.beta);
  }
  s.a_star = optimal_exposure(m, s.beta);
  return s;
}

/// Exponent beta(c) for gamma == 1 under the constant rate c and exposure
/// A* = mu / (sigma^2 beta):
///   (rho + c) beta - (lambda + delta c)(1 - L(beta)) - mu^2 / (2 sigma^2) = 0.
/// beta(0) is the no-investment root beta1; beta(c) -> beta2 as c -> inf.
inline double beta_of_capped_c(const JumpLaw& law, const ModelParams& p, const MarketParams& m,
                               double c) {
  p.validate();
  m.validate();
  if (p.gamma != 1.0) throw WrongRegime("beta_of_capped_c requires gamma == 1");
  if (!(c >= 0.0)) throw std::invalid_argument("beta_of_capped_c: c must be >= 0");
  const GEvaluator g(law);
  const double k = m.half_sharpe_squared();
  auto f = [&](double b) { return (p.rho + c) - (p.lambda + p.delta * c) * g(b) - k / b; };
  return detail::solve_increasing(f);
}

inline double beta_of_capped_c_residual(const JumpLaw& law, const ModelParams& p,
                                        const MarketParams& m, double c, double beta) {
  return (p.rho + c) * beta - (p.lambda + p.delta * c) * law.one_minus_laplace(beta) -
         m.half_sharpe_squared();
}

/// Dispatch on the concavity exponent; gamma > 1 is not defined here.
inline MarketRuinSolution solve_market(const JumpLaw& law, const ModelParams& p,
                                       const MarketParams& m) {
  if (p.gamma < 1.0) return solve_market_sublinear(law, p, m);
  if (p.gamma == 1.0) return solve_market_singular(law, p, m);
  throw WrongRegime("market model with gamma > 1 is degenerate (ruin probability 0)");
}

}  // namespace dualrisk
