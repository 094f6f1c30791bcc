#pragma once

// Jump-size laws for the profit arrivals. Each law provides its density,
// Laplace transform, first two moments and a sampler. New families are
// added as another alternative of JumpLaw::Kind plus one case in each
// visitor below.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "dualrisk/random.hpp"

namespace dualrisk {

struct ExponentialJumps {
  double rate;  // nu
};

struct GammaJumps {
  double shape;  // k
  double rate;   // theta
};

struct DeterministicJumps {
  double value;  // y0
};

class JumpLaw {
 public:
  using Kind = std::variant<ExponentialJumps, GammaJumps, DeterministicJumps>;

  explicit JumpLaw(Kind kind) : kind_(kind) { validate(); }

  static JumpLaw exponential(double rate) { return JumpLaw(ExponentialJumps{rate}); }
  static JumpLaw gamma(double shape, double rate) { return JumpLaw(GammaJumps{shape, rate}); }
  static JumpLaw deterministic(double value) { return JumpLaw(DeterministicJumps{value}); }

  const Kind& kind() const { return kind_; }
  bool is_exponential() const { return std::holds_alternative<ExponentialJumps>(kind_); }

  /// Rate nu of an exponential law; throws for other families.
  double exponential_rate() const {
    if (const auto* e = std::get_if<ExponentialJumps>(&kind_)) return e->rate;
    throw std::logic_error("jump law is not exponential");
  }

  /// Density p(y). The deterministic law has no density and reports 0.
  double density(double y) const {
    if (y < 0.0) return 0.0;
    return std::visit(
        [y](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return k.rate * std::exp(-k.rate * y);
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            if (y == 0.0) {
              if (k.shape < 1.0) return std::numeric_limits<double>::infinity();
              return k.shape == 1.0 ? k.rate : 0.0;
            }
            return std::exp(k.shape * std::log(k.rate) + (k.shape - 1.0) * std::log(y) -
                            k.rate * y - std::lgamma(k.shape));
          } else {
            return 0.0;
          }
        },
        kind_);
  }

  /// Laplace transform L(beta) = E[exp(-beta Y)].
  double laplace(double beta) const {
    return std::visit(
        [beta](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return k.rate / (k.rate + beta);
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return std::pow(k.rate / (k.rate + beta), k.shape);
          } else {
            return std::exp(-beta * k.value);
          }
        },
        kind_);
  }

  /// 1 - L(beta), evaluated without cancellation for small beta.
  double one_minus_laplace(double beta) const {
    return std::visit(
        [beta](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return beta / (k.rate + beta);
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return -std::expm1(-k.shape * std::log1p(beta / k.rate));
          } else {
            return -std::expm1(-beta * k.value);
          }
        },
        kind_);
  }

  double mean() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return 1.0 / k.rate;
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return k.shape / k.rate;
          } else {
            return k.value;
          }
        },
        kind_);
  }

  double second_moment() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return 2.0 / (k.rate * k.rate);
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return k.shape * (k.shape + 1.0) / (k.rate * k.rate);
          } else {
            return k.value * k.value;
          }
        },
        kind_);
  }

  /// One draw. Exponential by inversion, Gamma by Marsaglia-Tsang rejection.
  template <typename Rng>
  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return exponential_draw(rng, k.rate);
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return sample_gamma(rng, k.shape) / k.rate;
          } else {
            return k.value;
          }
        },
        kind_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            return "Exponential(nu=" + std::to_string(k.rate) + ")";
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            return "Gamma(k=" + std::to_string(k.shape) + ", theta=" + std::to_string(k.rate) + ")";
          } else {
            return "Deterministic(y0=" + std::to_string(k.value) + ")";
          }
        },
        kind_);
  }

  friend bool operator==(const JumpLaw& a, const JumpLaw& b) {
    return a.kind_.index() == b.kind_.index() &&
           std::visit(
               [&b](const auto& k) -> bool {
                 using T = std::decay_t<decltype(k)>;
                 const auto& o = std::get<T>(b.kind_);
                 if constexpr (std::is_same_v<T, ExponentialJumps>) {
                   return k.rate == o.rate;
                 } else if constexpr (std::is_same_v<T, GammaJumps>) {
                   return k.shape == o.shape && k.rate == o.rate;
                 } else {
                   return k.value == o.value;
                 }
               },
               a.kind_);
  }

 private:
  template <typename Rng>
  static double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
      // Boost to shape+1 and scale by U^(1/shape).
      return sample_gamma(rng, shape + 1.0) * std::pow(uniform_open(rng), 1.0 / shape);
    }
    NormalSource normal;
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal(rng);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open(rng);
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  void validate() const {
    std::visit(
        [](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExponentialJumps>) {
            if (!(k.rate > 0.0) || !std::isfinite(k.rate))
              throw std::invalid_argument("exponential jump rate must be positive");
          } else if constexpr (std::is_same_v<T, GammaJumps>) {
            if (!(k.shape > 0.0) || !(k.rate > 0.0) || !std::isfinite(k.shape) ||
                !std::isfinite(k.rate))
              throw std::invalid_argument("gamma jump shape and rate must be positive");
          } else {
            if (!(k.value > 0.0) || !std::isfinite(k.value))
              throw std::invalid_argument("deterministic jump size must be positive");
          }
        },
        kind_);
  }

  Kind kind_;
};

inline double laplace(const JumpLaw& law, double beta) {
  if (beta < 0.0) throw std::domain_error("laplace: beta must be non-negative");
  return law.laplace(beta);
}

template <typename Rng>
double sample(const JumpLaw& law, Rng& rng) {
  return law.sample(rng);
}

/// g(beta) = (1 - L(beta)) / beta, continued to g(0) = E[Y].
///
/// Below `switch_point` the two-term Taylor expansion
/// E[Y] - beta E[Y^2] / 2 is used.
class GEvaluator {
 public:
  explicit GEvaluator(JumpLaw law, double switch_point = 1e-8)
      : law_(law), switch_point_(switch_point), mean_(law.mean()), m2_(law.second_moment()) {}

  double operator()(double beta) const {
    if (beta < 0.0) throw std::domain_error("g: beta must be non-negative");
    if (beta <= switch_point_) return mean_ - 0.5 * beta * m2_;
    return law_.one_minus_laplace(beta) / beta;
  }

  /// Direct quotient, bypassing the Taylor branch (beta > 0).
  double direct(double beta) const { return law_.one_minus_laplace(beta) / beta; }
  double taylor(double beta) const { return mean_ - 0.5 * beta * m2_; }

  const JumpLaw& law() const { return law_; }
  double switch_point() const { return switch_point_; }

 private:
  JumpLaw law_;
  double switch_point_;
  double mean_;
  double m2_;
};

inline double g_of_beta(const GEvaluator& g, double beta) { return g(beta); }

}  // namespace dualrisk
