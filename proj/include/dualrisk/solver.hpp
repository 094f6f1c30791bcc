#pragma once

// Minimal ruin probability and optimal R&D spending for the dual risk model
// dX = -(rho + C) dt + dJ, where J is compound Poisson with intensity
// lambda + delta C^gamma and jump law p(y).

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "dualrisk/distributions.hpp"
#include "dualrisk/numerics.hpp"

namespace dualrisk {

class WrongRegime : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelParams {
  double rho = 0.0;     // running cost rate
  double lambda = 0.0;  // base profit intensity
  double delta = 0.0;   // R&D effectiveness
  double gamma = 0.0;   // concavity exponent

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(rho) || !positive(lambda) || !positive(delta) || !positive(gamma)) {
      throw std::invalid_argument("model parameters rho, lambda, delta, gamma must be positive");
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class Regime {
  SubLinear,
  SingularNoInvest,
  SingularMaxInvest,
  SingularIndifferent,
  SuperLinearDegenerate,
  SubLinearMarket,
  SingularMarketNoInvest,
  SingularMarketMaxInvest,
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::SubLinear: return "SubLinear";
    case Regime::SingularNoInvest: return "SingularNoInvest";
    case Regime::SingularMaxInvest: return "SingularMaxInvest";
    case Regime::SingularIndifferent: return "SingularIndifferent";
    case Regime::SuperLinearDegenerate: return "SuperLinearDegenerate";
    case Regime::SubLinearMarket: return "SubLinearMarket";
    case Regime::SingularMarketNoInvest: return "SingularMarketNoInvest";
    case Regime::SingularMarketMaxInvest: return "SingularMarketMaxInvest";
  }
  return "Unknown";
}

/// R&D spending rate in [0, +inf]. The unbounded "invest maximally" policy
/// is a marker, never an infinite double.
class SpendingRate {
 public:
  SpendingRate() = default;
  static SpendingRate finite(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("spending rate must be finite and non-negative");
    }
    SpendingRate r;
    r.value_ = c;
    return r;
  }
  static SpendingRate maximal() {
    SpendingRate r;
    r.max_ = true;
    return r;
  }

  bool is_max() const { return max_; }
  double value() const {
    if (max_) throw std::logic_error("maximal spending rate has no finite value");
    return value_;
  }
  /// Finite stand-in: the rate itself, or `cap` for the maximal marker.
  double capped(double cap) const { return max_ ? cap : value_; }

  friend bool operator==(const SpendingRate&, const SpendingRate&) = default;

 private:
  double value_ = 0.0;
  bool max_ = false;
};

struct RuinSolution {
  bool feasible = false;
  double beta = 0.0;  // +inf for SuperLinearDegenerate
  SpendingRate c_star;
  std::optional<double> a_star;
  Regime regime = Regime::SubLinear;
  double residual = 0.0;    // defining equation of beta at the root
  double c_residual = 0.0;  // implicit first-order condition on c_star
  std::string diagnostic;

  /// Minimal ruin probability from initial wealth x.
  double value_at(double x) const {
    if (x <= 0.0 || !feasible) return 1.0;
    if (std::isinf(beta)) return 0.0;
    return std::exp(-beta * x);
  }
};

namespace detail {

inline numerics::Bracket bracket_increasing(const auto& f) {
  return numerics::expand_bracket(f, 1.0);
}

inline double solve_increasing(const auto& f) {
  return numerics::find_root(f, bracket_increasing(f), numerics::kTightTolerance);
}

}  // namespace detail

/// Exponent of the uncontrolled ruin probability e^{-alpha x}:
/// rho alpha + lambda (L(alpha) - 1) = 0. Empty when lambda E[Y] <= rho.
inline std::optional<double> alpha_no_investment(const JumpLaw& law, double rho, double lambda) {
  if (!(rho > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("alpha_no_investment: rho and lambda must be positive");
  }
  if (!(lambda * law.mean() > rho)) return std::nullopt;
  const GEvaluator g(law);
  auto f = [&](double a) { return rho - lambda * g(a); };
  try {
    return detail::solve_increasing(f);
  } catch (const numerics::NoBracketFound&) {
    return std::nullopt;
  }
}

/// Exponent of e^{-alpha_C x} for the constant strategy C (any gamma):
/// (rho + C) alpha + (lambda + delta C^gamma)(L(alpha) - 1) = 0.
inline std::optional<double> alpha_constant_strategy(const JumpLaw& law, const ModelParams& p,
                                                     double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("alpha_constant_strategy: C must be >= 0");
  const double drift = p.rho + c;
  const double intensity = p.lambda + p.delta * std::pow(c, p.gamma);
  return alpha_no_investment(law, drift, intensity);
}

/// Left side of the feasibility condition for gamma < 1:
/// (rho - lambda E[Y]) - (delta gamma)^{1/(1-gamma)} (1/gamma - 1) E[Y]^{1/(1-gamma)}.
inline double condition_one_lhs(const JumpLaw& law, const ModelParams& p) {
  if (!(p.gamma < 1.0)) throw WrongRegime("condition_one_lhs requires gamma < 1");
  const double m = law.mean();
  const double e = 1.0 / (1.0 - p.gamma);
  return (p.rho - p.lambda * m) - (1.0 / p.gamma - 1.0) * std::pow(p.delta * p.gamma * m, e);
}

/// True iff the minimized ruin probability is below one (gamma < 1).
/// Exact equality counts as infeasible.
inline bool check_condition_one(const JumpLaw& law, const ModelParams& p) {
  return condition_one_lhs(law, p) < 0.0;
}

/// G(beta) = rho - (delta gamma)^{1/(1-gamma)} (1/gamma - 1) g^{1/(1-gamma)} - lambda g.
inline double sublinear_characteristic(const GEvaluator& g, const ModelParams& p, double beta) {
  const double gb = g(beta);
  const double e = 1.0 / (1.0 - p.gamma);
  return p.rho - (1.0 / p.gamma - 1.0) * std::pow(p.delta * p.gamma * gb, e) - p.lambda * gb;
}

/// Optimal constant R&D rate given the exponent: C* = (delta gamma g(beta))^{1/(1-gamma)}.
inline double c_star_from_beta(const GEvaluator& g, const ModelParams& p, double beta) {
  return std::pow(p.delta * p.gamma * g(beta), 1.0 / (1.0 - p.gamma));
}

/// lambda + (1-gamma) delta C^gamma - rho delta gamma C^{gamma-1}; zero at the optimum.
inline double implicit_c_residual(const ModelParams& p, double c) {
  return p.lambda + (1.0 - p.gamma) * p.delta * std::pow(c, p.gamma) -
         p.rho * p.delta * p.gamma * std::pow(c, p.gamma - 1.0);
}

inline RuinSolution solve_sublinear(const JumpLaw& law, const ModelParams& p) {
  p.validate();
  if (!(p.gamma < 1.0)) throw WrongRegime("solve_sublinear requires 0 < gamma < 1");
  RuinSolution s;
  s.regime = Regime::SubLinear;
  const double lhs = condition_one_lhs(law, p);
  if (!(lhs < 0.0)) {
    s.diagnostic = "feasibility condition violated: lhs = " + std::to_string(lhs) + " >= 0";
    return s;
  }
  const GEvaluator g(law);
  auto G = [&](double b) { return sublinear_characteristic(g, p, b); };
  double beta;
  try {
    beta = detail::solve_increasing(G);
  } catch (const numerics::NoBracketFound& e) {
    s.diagnostic = std::string("no positive root: ") + e.what();
    return s;
  }
  s.feasible = true;
  s.beta = beta;
  const double c = c_star_from_beta(g, p, beta);
  s.c_star = SpendingRate::finite(c);
  s.residual = G(beta);
  s.c_residual = implicit_c_residual(p, c);
  return s;
}

inline RuinSolution solve_singular(const JumpLaw& law, const ModelParams& p) {
  p.validate();
  if (p.gamma != 1.0) throw WrongRegime("solve_singular requires gamma == 1");
  RuinSolution s;
  const double threshold = p.lambda / p.rho;
  const GEvaluator g(law);
  if (p.delta < threshold) {
    s.regime = Regime::SingularNoInvest;
    s.c_star = SpendingRate::finite(0.0);
    if (auto a = alpha_no_investment(law, p.rho, p.lambda)) {
      s.feasible = true;
      s.beta = *a;
      s.residual = p.rho * s.beta - p.lambda * law.one_minus_laplace(s.beta);
    } else {
      s.diagnostic = "lambda E[Y] <= rho: ruin is certain without investment";
    }
    return s;
  }
  s.regime = p.delta > threshold ? Regime::SingularMaxInvest : Regime::SingularIndifferent;
  s.c_star = p.delta > threshold ? SpendingRate::maximal() : SpendingRate::finite(0.0);
  if (!(p.delta * law.mean() > 1.0)) {
    s.diagnostic = "delta E[Y] <= 1: ruin is certain for every spending level";
    return s;
  }
  auto f = [&](double b) { return 1.0 - p.delta * g(b); };
  try {
    s.beta = detail::solve_increasing(f);
    s.feasible = true;
    s.residual = s.beta - p.delta * law.one_minus_laplace(s.beta);
  } catch (const numerics::NoBracketFound& e) {
    s.diagnostic = std::string("no positive root: ") + e.what();
  }
  return s;
}

/// gamma > 1: every large constant rate C gives exponent alpha_C -> inf,
/// so the infimum of the ruin probability is 0.
inline RuinSolution classify_superlinear(const JumpLaw& law, const ModelParams& p) {
  (void)law;
  p.validate();
  if (!(p.gamma > 1.0)) throw WrongRegime("classify_superlinear requires gamma > 1");
  RuinSolution s;
  s.regime = Regime::SuperLinearDegenerate;
  s.feasible = true;
  s.beta = std::numeric_limits<double>::infinity();
  s.c_star = SpendingRate::maximal();
  s.diagnostic = "minimized ruin probability is 0 for every x > 0";
  return s;
}

/// Dispatch on the concavity exponent.
inline RuinSolution solve(const JumpLaw& law, const ModelParams& p) {
  p.validate();
  if (p.gamma < 1.0) return solve_sublinear(law, p);
  if (p.gamma == 1.0) return solve_singular(law, p);
  return classify_superlinear(law, p);
}

}  // namespace dualrisk
