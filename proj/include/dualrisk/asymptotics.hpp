#pragma once

// Parameter sweeps toward the limiting regimes of the sub-linear model,
// comparing the solved beta or C* with its predicted asymptote.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualrisk/market.hpp"
#include "dualrisk/numerics.hpp"
#include "dualrisk/solver.hpp"

namespace dualrisk {

enum class Knob {
  RhoToZero,
  DeltaToInfinity,
  DeltaToZero,
  LambdaToInfinity,
  Boundary,
  GammaToZero,
  GammaToOne,
  MarketRhoToZero,
};

inline const char* to_string(Knob k) {
  switch (k) {
    case Knob::RhoToZero: return "rho_to_zero";
    case Knob::DeltaToInfinity: return "delta_to_infinity";
    case Knob::DeltaToZero: return "delta_to_zero";
    case Knob::LambdaToInfinity: return "lambda_to_infinity";
    case Knob::Boundary: return "boundary";
    case Knob::GammaToZero: return "gamma_to_zero";
    case Knob::GammaToOne: return "gamma_to_one";
    case Knob::MarketRhoToZero: return "market_rho_to_zero";
  }
  return "unknown";
}

inline Knob knob_from_string(const std::string& s) {
  for (Knob k : {Knob::RhoToZero, Knob::DeltaToInfinity, Knob::DeltaToZero, Knob::LambdaToInfinity,
                 Knob::Boundary, Knob::GammaToZero, Knob::GammaToOne, Knob::MarketRhoToZero}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown asymptotic knob '" + s + "'");
}

/// Quantity compared against the asymptote on a given knob.
enum class Tracked { Beta, CStar };

struct AsymptoticRow {
  double param = 0.0;  // value of the swept parameter
  bool feasible = false;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double c_star = std::numeric_limits<double>::quiet_NaN();
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // computed / predicted
};

struct AsymptoticReport {
  Knob knob = Knob::RhoToZero;
  Tracked tracked = Tracked::Beta;
  std::string param_name;
  std::vector<AsymptoticRow> rows;
};

/// Sweep endpoints. Each sweep runs geometrically from the supplied
/// parameter value (or its distance to the limit) to these values.
struct SweepEndpoints {
  double rho_small = 1e-4;
  double delta_large = 1e4;
  double delta_small = 1e-8;
  double lambda_large = 1e4;
  double boundary_gap = 1e-6;  // relative distance below the critical rho
  double gamma_small = 1e-4;
  double gamma_near_one = 0.999;
  int points = 9;
};

namespace detail {

inline std::vector<double> geometric(double from, double to, int n) {
  if (n < 2) throw std::invalid_argument("sweep needs at least two points");
  if (!(from > 0.0) || !(to > 0.0)) throw std::invalid_argument("geometric sweep needs positive ends");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double lf = std::log(from);
  const double lt = std::log(to);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(lf + (lt - lf) * i / (n - 1));
  out.front() = from;
  out.back() = to;
  return out;
}

/// Limit of C* as gamma -> 1 when rho delta = lambda: the root of
/// delta x + lambda (1 + ln x) = 0, which lies in (0, 1/e).
inline double critical_gamma_one_limit(double delta, double lambda) {
  auto f = [&](double x) { return delta * x + lambda * (1.0 + std::log(x)); };
  return numerics::find_root(f, {1e-300, 1.0}, numerics::kTightTolerance);
}

}  // namespace detail

/// Critical cost rate at which the feasibility condition holds with equality.
inline double critical_rho(const JumpLaw& law, const ModelParams& p) {
  const double m = law.mean();
  const double e = 1.0 / (1.0 - p.gamma);
  return p.lambda * m + (1.0 / p.gamma - 1.0) * std::pow(p.delta * p.gamma * m, e);
}

/// Sweep toward the knob's limit and tabulate computed/predicted ratios.
/// `market` is required for MarketRhoToZero and ignored otherwise.
inline AsymptoticReport asymptotic_report(const JumpLaw& law, const ModelParams& p, Knob knob,
                                          const std::optional<MarketParams>& market = std::nullopt,
                                          const SweepEndpoints& ends = {}) {
  p.validate();
  const bool gamma_knob = knob == Knob::GammaToZero || knob == Knob::GammaToOne;
  if (!gamma_knob && !(p.gamma < 1.0)) throw WrongRegime("asymptotic sweeps require gamma < 1");
  if (knob == Knob::MarketRhoToZero && !market) {
    throw std::invalid_argument("market_rho_to_zero needs market parameters");
  }

  AsymptoticReport rep;
  rep.knob = knob;
  std::vector<double> values;
  switch (knob) {
    case Knob::RhoToZero:
    case Knob::MarketRhoToZero:
      rep.param_name = "rho";
      values = detail::geometric(p.rho, ends.rho_small, ends.points);
      break;
    case Knob::DeltaToInfinity:
      rep.param_name = "delta";
      values = detail::geometric(p.delta, ends.delta_large, ends.points);
      break;
    case Knob::DeltaToZero:
      rep.param_name = "delta";
      values = detail::geometric(p.delta, ends.delta_small, ends.points);
      break;
    case Knob::LambdaToInfinity:
      rep.param_name = "lambda";
      values = detail::geometric(p.lambda, ends.lambda_large, ends.points);
      break;
    case Knob::Boundary: {
      rep.param_name = "rho";
      const double rc = critical_rho(law, p);
      for (double gap : detail::geometric(0.1, ends.boundary_gap, ends.points)) {
        values.push_back(rc * (1.0 - gap));
      }
      break;
    }
    case Knob::GammaToZero:
      rep.param_name = "gamma";
      values = detail::geometric(p.gamma, ends.gamma_small, ends.points);
      break;
    case Knob::GammaToOne: {
      rep.param_name = "gamma";
      const double start = p.gamma < 1.0 ? 1.0 - p.gamma : 0.5;
      for (double d : detail::geometric(start, 1.0 - ends.gamma_near_one, ends.points)) {
        values.push_back(1.0 - d);
      }
      values.back() = ends.gamma_near_one;
      break;
    }
  }
  rep.tracked = (knob == Knob::DeltaToInfinity || knob == Knob::LambdaToInfinity ||
                 knob == Knob::GammaToZero || knob == Knob::GammaToOne)
                    ? Tracked::CStar
                    : Tracked::Beta;

  const double m = law.mean();
  for (double v : values) {
    ModelParams q = p;
    switch (knob) {
      case Knob::RhoToZero:
      case Knob::MarketRhoToZero:
      case Knob::Boundary: q.rho = v; break;
      case Knob::DeltaToInfinity:
      case Knob::DeltaToZero: q.delta = v; break;
      case Knob::LambdaToInfinity: q.lambda = v; break;
      case Knob::GammaToZero:
      case Knob::GammaToOne: q.gamma = v; break;
    }
    AsymptoticRow row;
    row.param = v;
    if (knob == Knob::MarketRhoToZero) {
      const auto s = solve_market_sublinear(law, q, *market);
      row.feasible = true;
      row.beta = s.beta;
      row.c_star = s.c_star.value();
    } else {
      const auto s = solve_sublinear(law, q);
      row.feasible = s.feasible;
      if (s.feasible) {
        row.beta = s.beta;
        row.c_star = s.c_star.value();
      }
    }
    const double e = 1.0 / (1.0 - q.gamma);
    switch (knob) {
      case Knob::RhoToZero: row.predicted = q.lambda / q.rho; break;
      case Knob::MarketRhoToZero:
        row.predicted = (q.lambda + market->half_sharpe_squared()) / q.rho;
        break;
      case Knob::DeltaToInfinity: row.predicted = q.rho / (1.0 / q.gamma - 1.0); break;
      case Knob::DeltaToZero:
        if (auto a = alpha_no_investment(law, q.rho, q.lambda)) row.predicted = *a;
        break;
      case Knob::LambdaToInfinity:
        row.predicted = std::pow(q.delta * q.gamma, e) * std::pow(q.rho / q.lambda, e);
        break;
      case Knob::Boundary: {
        // Linearization of the characteristic function at beta = 0.
        const double lhs = condition_one_lhs(law, q);
        const double slope = (std::pow(q.delta * q.gamma, e) / q.gamma * std::pow(m, q.gamma * e) +
                              q.lambda) *
                             0.5 * law.second_moment();
        row.predicted = -lhs / slope;
        break;
      }
      case Knob::GammaToZero:
        row.predicted = q.rho * q.delta * q.gamma / (q.lambda + q.delta);
        break;
      case Knob::GammaToOne: {
        const double s = q.rho * q.delta - q.lambda;
        if (s > 0.0) {
          row.predicted = s / (q.delta * (1.0 - q.gamma));
        } else if (s < 0.0) {
          row.predicted = std::exp(-1.0) * std::pow(q.rho * q.delta / q.lambda, e);
        } else {
          row.predicted = detail::critical_gamma_one_limit(q.delta, q.lambda);
        }
        break;
      }
    }
    if (row.feasible) {
      const double got = rep.tracked == Tracked::Beta ? row.beta : row.c_star;
      row.ratio = got / row.predicted;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace dualrisk
