#pragma once

// State-dependent dual risk model
//   dX = -(rho(X) + C) dt + dJ,  intensity lambda(X-) + delta(X-) C^gamma,
// with exponential jumps. Under a feedback policy C(x) the ruin probability
// is a ratio of two semi-infinite integrals of
//   h(y) exp(nu y - int_0^y h(w) dw),  h = (lambda + delta C^gamma) / (rho + C).

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "dualrisk/numerics.hpp"
#include "dualrisk/solver.hpp"

namespace dualrisk {

class NonIntegrable : public numerics::NumericError {
 public:
  using numerics::NumericError::NumericError;
};

// Coefficient catalog. All members are positive and monotone on [0, inf).

struct ConstantCoef {
  double value;
  friend bool operator==(const ConstantCoef&, const ConstantCoef&) = default;
};

/// scale * (c1 x + c2)
struct AffineCoef {
  double scale;
  double c1;
  double c2;
  friend bool operator==(const AffineCoef&, const AffineCoef&) = default;
};

/// (nu + lambda0 / (1 + x)) * rho(x); only meaningful as the lambda coefficient.
struct RhoRatioCoef {
  double nu;
  double lambda0;
  friend bool operator==(const RhoRatioCoef&, const RhoRatioCoef&) = default;
};

using Coefficient = std::variant<ConstantCoef, AffineCoef, RhoRatioCoef>;

struct StateModel {
  Coefficient rho = ConstantCoef{1.0};
  Coefficient lambda = ConstantCoef{1.0};
  Coefficient delta = ConstantCoef{1.0};
  double gamma = 0.5;

  static StateModel constant(double rho, double lambda, double delta, double gamma) {
    StateModel m{ConstantCoef{rho}, ConstantCoef{lambda}, ConstantCoef{delta}, gamma};
    m.validate();
    return m;
  }

  void validate() const {
    auto check = [](const Coefficient& c, const char* name, bool allow_ratio) {
      std::visit(
          [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConstantCoef>) {
              if (!(k.value > 0.0) || !std::isfinite(k.value))
                throw std::invalid_argument(std::string(name) + ": constant must be positive");
            } else if constexpr (std::is_same_v<T, AffineCoef>) {
              if (!(k.scale > 0.0) || !(k.c1 >= 0.0) || !(k.c2 > 0.0))
                throw std::invalid_argument(std::string(name) +
                                            ": affine form needs scale > 0, c1 >= 0, c2 > 0");
            } else {
              if (!allow_ratio)
                throw std::invalid_argument(std::string(name) +
                                            ": rational form is only defined for lambda");
              if (!(k.nu > 0.0) || !(k.lambda0 > 0.0))
                throw std::invalid_argument(std::string(name) +
                                            ": rational form needs nu > 0, lambda0 > 0");
            }
          },
          c);
    };
    check(rho, "rho", false);
    check(lambda, "lambda", true);
    check(delta, "delta", false);
    if (!(gamma > 0.0) || !(gamma <= 1.0)) {
      throw std::invalid_argument("state model gamma must lie in (0, 1]");
    }
  }

  double rho_at(double x) const { return eval(rho, x); }
  double delta_at(double x) const { return eval(delta, x); }
  double lambda_at(double x) const {
    if (const auto* r = std::get_if<RhoRatioCoef>(&lambda)) return ratio(*r, x) * rho_at(x);
    return eval(lambda, x);
  }
  /// lambda(x) / rho(x), exact for the rational form.
  double lambda_over_rho(double x) const {
    if (const auto* r = std::get_if<RhoRatioCoef>(&lambda)) return ratio(*r, x);
    return eval(lambda, x) / rho_at(x);
  }

  /// A positive lower bound lambda_0 of lambda on [0, inf).
  double lambda_floor() const {
    return std::visit(
        [this](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ConstantCoef>) {
            return k.value;
          } else if constexpr (std::is_same_v<T, AffineCoef>) {
            return k.scale * k.c2;
          } else {
            // (nu + l0/(1+x)) * s (c1 x + c2) >= s (nu c2 + l0 min(c1, c2)) for affine rho.
            if (const auto* a = std::get_if<AffineCoef>(&rho)) {
              return a->scale * (k.nu * a->c2 + k.lambda0 * std::min(a->c1, a->c2));
            }
            return k.nu * eval(rho, 0.0);
          }
        },
        lambda);
  }

  friend bool operator==(const StateModel&, const StateModel&) = default;

 private:
  static double ratio(const RhoRatioCoef& r, double x) { return r.nu + r.lambda0 / (1.0 + x); }
  static double eval(const Coefficient& c, double x) {
    return std::visit(
        [x](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ConstantCoef>) {
            return k.value;
          } else if constexpr (std::is_same_v<T, AffineCoef>) {
            return k.scale * (k.c1 * x + k.c2);
          } else {
            throw std::logic_error("rational coefficient evaluated without rho");
          }
        },
        c);
  }
};

/// Optimal spending at wealth x for gamma < 1: the unique C > 0 with
/// lambda(x) + delta(x)(1-gamma) C^gamma = rho(x) delta(x) gamma C^{gamma-1}.
inline double c_star_pointwise(const StateModel& model, double x) {
  if (!(model.gamma < 1.0)) throw WrongRegime("c_star_pointwise requires gamma < 1");
  if (!(x >= 0.0)) throw std::domain_error("c_star_pointwise: x must be >= 0");
  const double r = model.rho_at(x);
  const double l = model.lambda_at(x);
  const double d = model.delta_at(x);
  const double g = model.gamma;
  // Multiplied through by C^{1-gamma}: increasing in C, negative at 0 and
  // equal to l * ceiling^{1-gamma} > 0 at the ceiling rho gamma / (1 - gamma).
  auto psi = [&](double c) { return l * std::pow(c, 1.0 - g) + d * (1.0 - g) * c - r * d * g; };
  const double ceiling = r * g / (1.0 - g);
  return numerics::find_root(psi, {0.0, ceiling}, numerics::kTightTolerance);
}

enum class BangBang { Zero, Max };

/// gamma == 1: no spending where delta(x) <= lambda(x)/rho(x), maximal elsewhere.
inline BangBang c_star_bangbang(const StateModel& model, double x) {
  if (model.gamma != 1.0) throw WrongRegime("c_star_bangbang requires gamma == 1");
  return model.delta_at(x) <= model.lambda_over_rho(x) ? BangBang::Zero : BangBang::Max;
}

struct ConstantPolicy {
  double c;
};

struct FunctionPolicy {
  std::function<double(double)> c;
};

/// Bang-bang feedback for gamma == 1. Without a cap the maximal branch is the
/// C -> inf limit (hazard ratio -> delta); with a cap it spends exactly M.
struct BangBangPolicy {
  std::optional<double> cap;
};

using Policy = std::variant<ConstantPolicy, FunctionPolicy, BangBangPolicy>;

/// Profit arrivals per unit of wealth spent at wealth x under the policy:
/// (lambda + delta C^gamma) / (rho + C).
inline double hazard_per_wealth(const StateModel& model, const Policy& policy, double x) {
  return std::visit(
      [&](const auto& pol) -> double {
        using T = std::decay_t<decltype(pol)>;
        double c;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          c = pol.c;
        } else if constexpr (std::is_same_v<T, FunctionPolicy>) {
          c = pol.c(x);
        } else {
          if (c_star_bangbang(model, x) == BangBang::Zero) return model.lambda_over_rho(x);
          if (!pol.cap) return model.delta_at(x);
          c = *pol.cap;
        }
        if (c == 0.0) return model.lambda_over_rho(x);
        return (model.lambda_at(x) + model.delta_at(x) * std::pow(c, model.gamma)) /
               (model.rho_at(x) + c);
      },
      policy);
}

/// Spending rate the policy prescribes at x (finite policies only).
inline double policy_rate(const StateModel& model, const Policy& policy, double x) {
  return std::visit(
      [&](const auto& pol) -> double {
        using T = std::decay_t<decltype(pol)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          return pol.c;
        } else if constexpr (std::is_same_v<T, FunctionPolicy>) {
          return pol.c(x);
        } else {
          if (c_star_bangbang(model, x) == BangBang::Zero) return 0.0;
          if (!pol.cap) throw std::logic_error("uncapped bang-bang policy has no finite rate");
          return *pol.cap;
        }
      },
      policy);
}

struct QuadratureSettings {
  double knot_tol = 1e-9;     // Hermite midpoint error allowed per knot interval
  double max_step = 1.0;      // widest knot interval
  double decay_log = 46.0;    // cut the outer integrand below max * e^{-decay_log}
  double y_limit = 1e4;       // give up (NonIntegrable) beyond this wealth
  double rel_tol = 1e-12;     // outer integrals
};

/// Ruin probability under a feedback policy for exponential(nu) jumps.
///
/// The cumulative hazard H(y) = int_0^y h is tabulated eagerly on an
/// adaptive knot grid and interpolated by cubic Hermite polynomials
/// (H' = h is known exactly at the knots). After construction the object is
/// read-only and may be shared between threads.
class StateValueEvaluator {
 public:
  StateValueEvaluator(StateModel model, double nu, Policy policy, QuadratureSettings settings = {})
      : model_(std::move(model)), nu_(nu), policy_(std::move(policy)), settings_(settings) {
    model_.validate();
    if (!(nu_ > 0.0)) throw std::invalid_argument("jump rate nu must be positive");
    build_grid();
    denominator_ = outer_integral(0.0);
    if (!(denominator_ > 0.0) || !std::isfinite(denominator_)) {
      throw NonIntegrable("normalizing integral is not positive and finite");
    }
  }

  double hazard(double y) const { return hazard_per_wealth(model_, policy_, y); }

  /// int_0^y h(w) dw from the knot table.
  double cumulative_hazard(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= knots_.back()) {
      // Beyond the table the integrand is already negligible; extend linearly.
      return cum_.back() + hazard(knots_.back()) * (y - knots_.back());
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    return hermite(i, y);
  }

  /// Unclamped ratio of the two outer integrals.
  double raw_value(double x) const {
    if (x <= 0.0) return 1.0;
    if (x >= cutoff_) return 0.0;
    return outer_integral(x) / denominator_;
  }

  /// Ruin probability clamped to [0, 1].
  double value(double x) const {
    const double v = raw_value(x);
    if (v > 1.0 + 1e-6 || v < -1e-6) {
      std::clog << "warning: quadrature ruin probability " << v << " at x=" << x
                << " outside [0,1]\n";
    }
    return std::clamp(v, 0.0, 1.0);
  }

  double cutoff() const { return cutoff_; }
  std::size_t knot_count() const { return knots_.size(); }
  const StateModel& model() const { return model_; }
  double nu() const { return nu_; }

 private:
  double log_integrand(double y) const { return std::log(hazard(y)) + nu_ * y - cumulative_hazard(y); }

  double outer_integral(double from) const {
    auto u = [this](double y) -> double {
      if (y >= cutoff_) return 0.0;
      return std::exp(log_integrand(y));
    };
    return numerics::integrate_semiinf(u, from, settings_.rel_tol);
  }

  double hermite(std::size_t i, double y) const {
    const double a = knots_[i];
    const double b = knots_[i + 1];
    const double w = b - a;
    const double t = (y - a) / w;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * cum_[i] + (t3 - 2 * t2 + t) * w * slope_[i] +
           (-2 * t3 + 3 * t2) * cum_[i + 1] + (t3 - t2) * w * slope_right_[i];
  }

  void build_grid() {
    auto h = [this](double y) { return hazard(y); };
    const double sub_tol = 1e-13;
    knots_.assign(1, 0.0);
    cum_.assign(1, 0.0);
    slope_.clear();
    slope_right_.clear();
    double y = 0.0;
    double H = 0.0;
    double step = std::min(0.25, settings_.max_step);
    double best_log = -std::numeric_limits<double>::infinity();
    for (;;) {
      if (y > settings_.y_limit) {
        throw NonIntegrable("outer integrand does not decay before y = " +
                            std::to_string(settings_.y_limit));
      }
      const double ly = std::log(h(y)) + nu_ * y - H;
      if (!std::isfinite(ly)) throw NonIntegrable("outer integrand is not finite");
      best_log = std::max(best_log, ly);
      if (ly < best_log - settings_.decay_log && h(y) > nu_) break;

      // Grow the knot interval until the Hermite midpoint misses the
      // integral by more than knot_tol, then accept the last good one.
      for (;;) {
        const double b = y + step;
        const double dH = numerics::integrate(h, y, b, sub_tol, 1e-16);
        const double mid = y + 0.5 * step;
        const double dHmid = numerics::integrate(h, y, mid, sub_tol, 1e-16);
        const double hl = h(y);
        const double hr = h(b);
        const double interp = 0.5 * (H + H + dH) + step / 8.0 * (hl - hr);
        if (std::abs(interp - (H + dHmid)) <= settings_.knot_tol || step < 1e-12) {
          slope_.push_back(hl);
          slope_right_.push_back(hr);
          y = b;
          H += dH;
          knots_.push_back(y);
          cum_.push_back(H);
          step = std::min(step * 1.5, settings_.max_step);
          break;
        }
        step *= 0.5;
      }
    }
    cutoff_ = y;
  }

  StateModel model_;
  double nu_;
  Policy policy_;
  QuadratureSettings settings_;
  std::vector<double> knots_;
  std::vector<double> cum_;
  std::vector<double> slope_;        // h at the left end of each interval
  std::vector<double> slope_right_;  // h at the right end of each interval
  double cutoff_ = 0.0;
  double denominator_ = 0.0;
};

inline double ruin_probability_quadrature(const StateModel& model, double nu, const Policy& policy,
                                          double x) {
  return StateValueEvaluator(model, nu, policy).value(x);
}

/// rho(x) = rho0, lambda(x) = lambda0 (c1 x + c2), delta(x) = delta0 (c1 x + c2).
/// The optimal rate is the constant C0 and the value function has an erfc
/// closed form in the constants a = c1, b = c2,
///   c = nu - k c2,  d = k c1 / 2,  k = (lambda0 + delta0 C0^gamma) / (rho0 + C0).
struct StateExampleIParams {
  double rho0, lambda0, delta0, c1, c2, nu, gamma;
  double c0 = 0.0;

  static StateExampleIParams make(double rho0, double lambda0, double delta0, double c1, double c2,
                                  double nu, double gamma) {
    StateExampleIParams p{rho0, lambda0, delta0, c1, c2, nu, gamma};
    p.c0 = c_star_pointwise(p.model(), 0.0);
    p.validate();
    return p;
  }

  /// Same coefficients with the spending rate fixed (C0 = 0 gives the
  /// uncontrolled model).
  StateExampleIParams with_rate(double c) const {
    StateExampleIParams p = *this;
    p.c0 = c;
    p.validate();
    return p;
  }

  StateModel model() const {
    StateModel m{ConstantCoef{rho0}, AffineCoef{lambda0, c1, c2}, AffineCoef{delta0, c1, c2},
                 gamma};
    m.validate();
    return m;
  }

  double ratio() const { return (lambda0 + delta0 * std::pow(c0, gamma)) / (rho0 + c0); }
  double a() const { return c1; }
  double b() const { return c2; }
  double c() const { return nu - ratio() * c2; }
  double d() const { return ratio() * c1 / 2.0; }

  void validate() const {
    for (double v : {rho0, lambda0, delta0, c1, c2, nu}) {
      if (!(v > 0.0)) throw std::invalid_argument("example I parameters must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("example I needs 0 < gamma < 1");
    if (!(c0 >= 0.0)) throw std::invalid_argument("example I spending rate must be >= 0");
    if (!(d() > 0.0)) throw std::invalid_argument("example I requires d > 0");
  }
};

/// Closed form of the example I value function,
///   [2a sqrt(d) e^{cx-dx^2} + sqrt(pi) e^{c^2/4d}(ac+2bd) erfc((2dx-c)/(2 sqrt d))] / [same at 0],
/// with the conventional erfc. For z = (2dx-c)/(2 sqrt d) >= 0 it is
/// evaluated through erfcx to avoid underflow.
inline double closed_form_state_ex1(const StateExampleIParams& p, double x) {
  if (x <= 0.0) return 1.0;
  const double a = p.a();
  const double b = p.b();
  const double c = p.c();
  const double d = p.d();
  const double sd = std::sqrt(d);
  const double k = std::sqrt(std::numbers::pi) * (a * c + 2.0 * b * d);
  // Returns (log scale, mantissa) with N = exp(scale) * mantissa.
  auto numerator = [&](double y) -> std::pair<double, double> {
    const double z = (2.0 * d * y - c) / (2.0 * sd);
    const double expo = c * y - d * y * y;
    if (z >= 0.0) {
      return {expo, 2.0 * a * sd + k * numerics::erfcx(z)};
    }
    return {0.0, 2.0 * a * sd * std::exp(expo) + k * std::exp(c * c / (4.0 * d)) * numerics::erfc(z)};
  };
  const auto [sx, mx] = numerator(x);
  const auto [s0, m0] = numerator(0.0);
  return std::clamp(std::exp(sx - s0) * mx / m0, 0.0, 1.0);
}

/// rho(x) = rho0 (c1 x + c2), lambda(x) = (nu + lambda0/(1+x)) rho(x),
/// delta(x) = delta0, gamma = 1, with nu < delta0 < nu + lambda0.
struct StateExampleIIParams {
  double rho0, c1, c2, lambda0, delta0, nu;

  double x_star() const { return (lambda0 - delta0 + nu) / (delta0 - nu); }

  StateModel model() const {
    StateModel m{AffineCoef{rho0, c1, c2}, RhoRatioCoef{nu, lambda0}, ConstantCoef{delta0}, 1.0};
    m.validate();
    return m;
  }

  void validate() const {
    for (double v : {rho0, c1, c2, lambda0, delta0, nu}) {
      if (!(v > 0.0)) throw std::invalid_argument("example II parameters must be positive");
    }
    if (!(nu < delta0 && delta0 < nu + lambda0)) {
      throw std::invalid_argument("example II requires nu < delta0 < nu + lambda0");
    }
    if (lambda0 == 1.0) {
      throw std::invalid_argument("example II closed form is singular at lambda0 = 1");
    }
  }
};

namespace detail {

inline double ex2_tail_mass(const StateExampleIIParams& p) {
  // contribution of (x*, inf) to the outer integral: (1+x*)^{-l0} delta0/(delta0-nu)
  return std::pow(1.0 + p.x_star(), -p.lambda0) * p.delta0 / (p.delta0 - p.nu);
}

inline double ex2_below(const StateExampleIIParams& p, double x) {
  const double xs = p.x_star();
  const double l0 = p.lambda0;
  return p.nu / (1.0 - l0) * (std::pow(1.0 + xs, 1.0 - l0) - std::pow(1.0 + x, 1.0 - l0)) +
         std::pow(1.0 + x, -l0) - std::pow(1.0 + xs, -l0) + ex2_tail_mass(p);
}

}  // namespace detail

/// Piecewise closed form of the example II value function: power-law
/// branch for x <= x*, exponential branch e^{-(delta0-nu)x} above.
inline double closed_form_state_ex2(const StateExampleIIParams& p, double x) {
  p.validate();
  if (x <= 0.0) return 1.0;
  const double xs = p.x_star();
  const double denom = detail::ex2_below(p, 0.0);
  double num;
  if (x > xs) {
    const double k = p.delta0 - p.nu;
    num = detail::ex2_tail_mass(p) * std::exp(-k * (x - xs));
  } else {
    num = detail::ex2_below(p, x);
  }
  return num / denom;
}

struct Ex2Branches {
  double power;        // below-threshold formula
  double exponential;  // above-threshold formula
};

/// Both branch formulas of the example II value function evaluated at x,
/// regardless of which side of x* it lies on.
inline Ex2Branches ex2_branch_values(const StateExampleIIParams& p, double x) {
  p.validate();
  const double denom = detail::ex2_below(p, 0.0);
  const double k = p.delta0 - p.nu;
  return {detail::ex2_below(p, x) / denom,
          detail::ex2_tail_mass(p) * std::exp(-k * (x - p.x_star())) / denom};
}

/// Example II ruin probability without investment (requires lambda0 > 1):
/// [nu (1+x)^{1-l0} + (l0 - 1)(1+x)^{-l0}] / (l0 + nu - 1).
inline double no_investment_state_ex2(const StateExampleIIParams& p, double x) {
  if (!(p.lambda0 > 1.0)) {
    throw std::invalid_argument("uncontrolled example II value needs lambda0 > 1");
  }
  if (x <= 0.0) return 1.0;
  const double l0 = p.lambda0;
  return (p.nu * std::pow(1.0 + x, 1.0 - l0) + (l0 - 1.0) * std::pow(1.0 + x, -l0)) /
         (l0 + p.nu - 1.0);
}

}  // namespace dualrisk
