#pragma once

// Path simulation of the controlled dual risk process and ruin-probability
// estimation. Survival is declared at a wealth barrier B; when the value
// function is e^{-beta x} the declaration bias is at most e^{-beta B}.
//
// Paths are grouped in fixed blocks of 4096; block b draws from a generator
// seeded with splitmix64(base_seed) + b. The estimate therefore depends only
// on (config, seed), never on the number of worker threads, and nearby base
// seeds do not share blocks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dualrisk/distributions.hpp"
#include "dualrisk/market.hpp"
#include "dualrisk/random.hpp"
#include "dualrisk/solver.hpp"
#include "dualrisk/statedep.hpp"

namespace dualrisk {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EnvelopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::uint64_t n_paths = 100000;
  std::uint64_t base_seed = 0;
  double survival_barrier = 0.0;  // must exceed x0
  double barrier_tail = 1e-4;     // e^{-beta B} target used to pick B
  double t_max = 1e5;             // paths unresolved at t_max are censored
  double euler_dt = 1e-3;
  double cap_M = 1e3;             // finite stand-in for maximal spending
  unsigned threads = 1;

  void validate(double x0) const {
    if (n_paths < 1000) throw ConfigError("n_paths must be at least 1000");
    if (!(x0 > 0.0)) throw ConfigError("initial wealth must be positive");
    if (!(survival_barrier > x0)) {
      throw ConfigError("survival barrier must exceed the initial wealth");
    }
    if (!(barrier_tail > 0.0 && barrier_tail < 1.0)) throw ConfigError("barrier_tail must lie in (0,1)");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (!(euler_dt > 0.0)) throw ConfigError("euler_dt must be positive");
    if (!(cap_M > 0.0) || !std::isfinite(cap_M)) throw ConfigError("cap_M must be positive and finite");
  }
};

struct MCEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t n_ruined = 0;
  std::uint64_t n_survived = 0;
  std::uint64_t n_censored = 0;
  double bias_bound = 0.0;
  bool bias_bound_rigorous = false;  // true when backed by a closed-form exponent
  // Step-halving diagnostic (diffusion): p(dt/2) - p(dt) on the coupled subset.
  std::optional<double> step_drift;
  std::optional<double> step_drift_se;
  // Cap sensitivity (maximal spending): p(2M) - p(M) on the paired subset.
  std::optional<double> cap_drift;
  std::optional<double> cap_drift_se;
  std::vector<std::string> warnings;

  double z_score(double target) const {
    const double diff = p_hat - target;
    if (std_err > 0.0) return diff / std_err;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
};

/// B = ln(1/tail) / beta, so that e^{-beta B} = tail.
inline double choose_barrier(double beta_hint, double tail) {
  if (!(beta_hint > 0.0) || !std::isfinite(beta_hint)) {
    throw ConfigError("choose_barrier: beta hint must be positive and finite");
  }
  if (!(tail > 0.0 && tail < 0.1)) throw ConfigError("choose_barrier: tail must lie in (0, 0.1)");
  return -std::log(tail) / beta_hint;
}

enum class Outcome : std::uint8_t { Ruined, Survived, Censored };

struct PathRecord {
  Outcome outcome = Outcome::Censored;
  double first_jump_time = 0.0;  // first arrival of the jump clock, drawn even if ruin comes first
};

namespace detail {

inline constexpr std::uint64_t kBlockSize = 4096;

inline std::uint64_t block_seed(std::uint64_t base_seed, std::uint64_t block) {
  std::uint64_t state = base_seed;
  return splitmix64(state) + block;
}

struct Tally {
  std::uint64_t ruined = 0;
  std::uint64_t survived = 0;
  std::uint64_t censored = 0;
  // paired sub-study: difference alt - base of the ruin indicators
  std::uint64_t pair_n = 0;
  std::int64_t pair_diff = 0;
  std::uint64_t pair_diff_sq = 0;
  // second paired sub-study (cap sensitivity when the first is step halving)
  std::uint64_t cap_n = 0;
  std::int64_t cap_diff = 0;
  std::uint64_t cap_diff_sq = 0;

  void add(Outcome o) {
    switch (o) {
      case Outcome::Ruined: ++ruined; break;
      case Outcome::Survived: ++survived; break;
      case Outcome::Censored: ++censored; break;
    }
  }
  void add_pair(Outcome base, Outcome alt) {
    const int d = int(alt == Outcome::Ruined) - int(base == Outcome::Ruined);
    ++pair_n;
    pair_diff += d;
    pair_diff_sq += static_cast<std::uint64_t>(d * d);
  }
  void add_cap_pair(Outcome base, Outcome alt) {
    const int d = int(alt == Outcome::Ruined) - int(base == Outcome::Ruined);
    ++cap_n;
    cap_diff += d;
    cap_diff_sq += static_cast<std::uint64_t>(d * d);
  }
  Tally& operator+=(const Tally& o) {
    ruined += o.ruined;
    survived += o.survived;
    censored += o.censored;
    pair_n += o.pair_n;
    pair_diff += o.pair_diff;
    pair_diff_sq += o.pair_diff_sq;
    cap_n += o.cap_n;
    cap_diff += o.cap_diff;
    cap_diff_sq += o.cap_diff_sq;
    return *this;
  }
};

/// Runs fn(rng, path_index, tally) for every path, block-parallel.
template <typename PathFn>
Tally run_blocks(const SimConfig& cfg, PathFn&& fn) {
  const std::uint64_t n_blocks = (cfg.n_paths + kBlockSize - 1) / kBlockSize;
  std::vector<Tally> per_block(n_blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        Xoshiro256 rng(block_seed(cfg.base_seed, b));
        const std::uint64_t first = b * kBlockSize;
        const std::uint64_t last = std::min(cfg.n_paths, first + kBlockSize);
        for (std::uint64_t i = first; i < last; ++i) fn(rng, i, per_block[b]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_blocks);
        return;
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, cfg.threads), n_blocks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Tally total;
  for (const auto& t : per_block) total += t;
  return total;
}

inline std::pair<double, double> paired_mean(std::uint64_t n, std::int64_t sum, std::uint64_t sum_sq) {
  const double nn = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / nn;
  const double var = std::max(0.0, static_cast<double>(sum_sq) / nn - mean * mean);
  return {mean, std::sqrt(var / nn)};
}

inline MCEstimate finalize(const SimConfig& cfg, const Tally& t) {
  MCEstimate e;
  e.n_paths = cfg.n_paths;
  e.n_ruined = t.ruined;
  e.n_survived = t.survived;
  e.n_censored = t.censored;
  const double n = static_cast<double>(cfg.n_paths);
  e.p_hat = static_cast<double>(t.ruined) / n;
  e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  e.bias_bound = cfg.barrier_tail;
  if (static_cast<double>(t.censored) > 0.01 * n) {
    e.warnings.push_back("CensoringWarning: " + std::to_string(t.censored) +
                         " paths reached t_max; raise t_max");
  }
  return e;
}

inline void attach_cap_drift(MCEstimate& e, std::uint64_t n, std::int64_t sum, std::uint64_t sq) {
  if (n == 0) return;
  const auto [d, se] = paired_mean(n, sum, sq);
  e.cap_drift = d;
  e.cap_drift_se = se;
}

/// Constant drift and intensity between exponentially spaced jumps; ruin
/// inside an inter-arrival interval is detected exactly.
template <typename Rng>
PathRecord constant_path(const JumpLaw& law, double drift, double intensity, double x0,
                         double barrier, double t_max, Rng& rng) {
  PathRecord rec;
  double x = x0;
  double t = 0.0;
  for (;;) {
    const double tau = exponential_draw(rng, intensity);
    if (t == 0.0) rec.first_jump_time = tau;
    if (x <= drift * tau) {
      rec.outcome = Outcome::Ruined;
      return rec;
    }
    t += tau;
    if (t > t_max) {
      rec.outcome = Outcome::Censored;
      return rec;
    }
    x += law.sample(rng) - drift * tau;
    if (x >= barrier) {
      rec.outcome = Outcome::Survived;
      return rec;
    }
  }
}

}  // namespace detail

/// Exact event-driven simulation under the constant rate C.
inline MCEstimate simulate_constant(const JumpLaw& law, const ModelParams& p, double c, double x0,
                                    const SimConfig& cfg) {
  p.validate();
  cfg.validate(x0);
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("spending rate must be finite and >= 0");
  const double drift = p.rho + c;
  const double intensity = p.lambda + p.delta * std::pow(c, p.gamma);
  const double B = cfg.survival_barrier;
  const auto t = detail::run_blocks(cfg, [&](Xoshiro256& rng, std::uint64_t, detail::Tally& tally) {
    tally.add(detail::constant_path(law, drift, intensity, x0, B, cfg.t_max, rng).outcome);
  });
  return detail::finalize(cfg, t);
}

/// Constant-rate simulation accepting the maximal-spending marker, which
/// is replaced by cfg.cap_M. Every tenth path is replayed with the same
/// random numbers at 2 cap_M to report cap sensitivity.
inline MCEstimate simulate_constant(const JumpLaw& law, const ModelParams& p, SpendingRate c,
                                    double x0, const SimConfig& cfg) {
  if (!c.is_max()) return simulate_constant(law, p, c.value(), x0, cfg);
  p.validate();
  cfg.validate(x0);
  auto rates = [&](double cap) {
    return std::pair{p.rho + cap, p.lambda + p.delta * std::pow(cap, p.gamma)};
  };
  const auto [d1, i1] = rates(cfg.cap_M);
  const auto [d2, i2] = rates(2.0 * cfg.cap_M);
  const double B = cfg.survival_barrier;
  const auto t = detail::run_blocks(cfg, [&](Xoshiro256& rng, std::uint64_t i, detail::Tally& tally) {
    if (i % 10 == 0) {
      Xoshiro256 replay = rng;
      const Outcome base = detail::constant_path(law, d1, i1, x0, B, cfg.t_max, rng).outcome;
      const Outcome alt = detail::constant_path(law, d2, i2, x0, B, cfg.t_max, replay).outcome;
      tally.add(base);
      tally.add_cap_pair(base, alt);
    } else {
      tally.add(detail::constant_path(law, d1, i1, x0, B, cfg.t_max, rng).outcome);
    }
  });
  auto e = detail::finalize(cfg, t);
  detail::attach_cap_drift(e, t.cap_n, t.cap_diff, t.cap_diff_sq);
  return e;
}

/// Single constant-rate path, exposed for distributional tests.
template <typename Rng>
PathRecord simulate_constant_path(const JumpLaw& law, const ModelParams& p, double c, double x0,
                                  double barrier, double t_max, Rng& rng) {
  return detail::constant_path(law, p.rho + c, p.lambda + p.delta * std::pow(c, p.gamma), x0,
                               barrier, t_max, rng);
}

namespace detail {

/// One state-dependent path. Between jumps wealth decreases monotonically,
/// so the jump process is simulated in the wealth variable: on a window
/// [lo, x] the arrival rate per unit of wealth lost is
/// h = (lambda + delta C^gamma) / (rho + C), dominated by 1.05 times its
/// larger endpoint value and thinned at each candidate.
template <typename Rng>
Outcome state_path(const StateModel& model, const Policy& policy, double nu, double x0,
                   double barrier, double t_max, Rng& rng) {
  constexpr double kWindow = 0.5;
  constexpr double kSafety = 1.05;
  auto h = [&](double y) { return hazard_per_wealth(model, policy, y); };
  auto speed = [&](double y) { return model.rho_at(y) + policy_rate(model, policy, y); };
  double x = x0;
  double t = 0.0;
  for (;;) {
    const double lo = std::max(0.0, x - kWindow);
    const double env = kSafety * std::max(h(x), h(lo));
    if (!std::isfinite(env) || !(env > 0.0)) {
      throw EnvelopeError("thinning envelope is not finite on [" + std::to_string(lo) + ", " +
                          std::to_string(x) + "]");
    }
    const double y = x - exponential_draw(rng, env);
    if (y <= lo) {
      t += (x - lo) / speed(0.5 * (x + lo));
      if (lo == 0.0) return Outcome::Ruined;
      x = lo;
      if (t > t_max) return Outcome::Censored;
      continue;
    }
    t += (x - y) / speed(0.5 * (x + y));
    if (t > t_max) return Outcome::Censored;
    const double hy = h(y);
    if (hy > env) {
      throw EnvelopeError("intensity exceeds the thinning envelope at wealth " + std::to_string(y));
    }
    x = y;
    if (uniform_open(rng) * env < hy) {
      x += exponential_draw(rng, nu);
      if (x >= barrier) return Outcome::Survived;
    }
  }
}

}  // namespace detail

/// Simulation of the state-dependent model with exponential(nu) jumps. An
/// uncapped bang-bang policy spends cfg.cap_M on its maximal branch and
/// every tenth path is replayed at 2 cap_M.
inline MCEstimate simulate_state(const StateModel& model, double nu, const Policy& policy,
                                 double x0, const SimConfig& cfg) {
  model.validate();
  cfg.validate(x0);
  if (!(nu > 0.0)) throw ConfigError("jump rate nu must be positive");
  const auto* bb = std::get_if<BangBangPolicy>(&policy);
  const double B = cfg.survival_barrier;
  if (bb == nullptr) {
    const auto t = detail::run_blocks(cfg, [&](Xoshiro256& rng, std::uint64_t, detail::Tally& tally) {
      tally.add(detail::state_path(model, policy, nu, x0, B, cfg.t_max, rng));
    });
    return detail::finalize(cfg, t);
  }
  const double cap = bb->cap.value_or(cfg.cap_M);
  const Policy base_policy = BangBangPolicy{cap};
  const Policy alt_policy = BangBangPolicy{2.0 * cap};
  const auto t = detail::run_blocks(cfg, [&](Xoshiro256& rng, std::uint64_t i, detail::Tally& tally) {
    if (i % 10 == 0) {
      Xoshiro256 replay = rng;
      const Outcome base = detail::state_path(model, base_policy, nu, x0, B, cfg.t_max, rng);
      const Outcome alt = detail::state_path(model, alt_policy, nu, x0, B, cfg.t_max, replay);
      tally.add(base);
      tally.add_cap_pair(base, alt);
    } else {
      tally.add(detail::state_path(model, base_policy, nu, x0, B, cfg.t_max, rng));
    }
  });
  auto e = detail::finalize(cfg, t);
  detail::attach_cap_drift(e, t.cap_n, t.cap_diff, t.cap_diff_sq);
  return e;
}

namespace detail {

struct MarketPath {
  double drift;      // -(rho + C) + A mu
  double vol;        // A sigma
  double intensity;  // lambda + delta C^gamma
  double barrier;
  double t_max;
  double dt;
};

/// Jump-diffusion path: exact jump times, Euler-Maruyama in between with
/// ruin checked at every substep. With `coupled` a second walker on the
/// half step shares the jumps and Brownian increments; the coarse walker
/// alone has the same law as an uncoupled run.
template <typename Rng>
std::pair<Outcome, Outcome> market_path(const JumpLaw& law, const MarketPath& q, double x0,
                                        bool coupled, Rng& rng) {
  struct Walker {
    double x;
    bool done = false;
    Outcome out = Outcome::Censored;
    void step(double dx, double barrier) {
      if (done) return;
      x += dx;
      if (x <= 0.0) {
        done = true;
        out = Outcome::Ruined;
      } else if (x >= barrier) {
        done = true;
        out = Outcome::Survived;
      }
    }
  };
  NormalSource normal;
  Walker coarse{x0};
  Walker fine{x0};
  if (!coupled) fine.done = true;
  double t = 0.0;
  while (!coarse.done || !fine.done) {
    const double tau = exponential_draw(rng, q.intensity);
    if (t + tau > q.t_max) break;
    t += tau;
    const double n = std::max(1.0, std::ceil(tau / q.dt));
    const double h = tau / n;
    const auto steps = static_cast<std::uint64_t>(n);
    if (coupled) {
      const double sh = std::sqrt(0.5 * h);
      for (std::uint64_t k = 0; k < steps && !(coarse.done && fine.done); ++k) {
        const double w1 = sh * normal(rng);
        const double w2 = sh * normal(rng);
        fine.step(0.5 * h * q.drift + q.vol * w1, q.barrier);
        fine.step(0.5 * h * q.drift + q.vol * w2, q.barrier);
        coarse.step(h * q.drift + q.vol * (w1 + w2), q.barrier);
      }
    } else {
      const double sh = std::sqrt(h);
      const double mean_step = h * q.drift;
      for (std::uint64_t k = 0; k < steps && !coarse.done; ++k) {
        coarse.step(mean_step + q.vol * sh * normal(rng), q.barrier);
      }
    }
    if (coarse.done && fine.done) break;
    const double y = law.sample(rng);
    coarse.step(y, q.barrier);
    fine.step(y, q.barrier);
  }
  return {coarse.out, fine.out};
}

}  // namespace detail

/// Jump-diffusion simulation with constant exposure A. Every tenth path is
/// also run at euler_dt / 2 with shared randomness; the paired difference
/// is reported as step_drift and flagged (StepWarning) when it exceeds
/// twice the standard error of the main estimate. For the maximal-spending
/// marker, paths with index 5 mod 10 are replayed at 2 cap_M.
inline MCEstimate simulate_market(const JumpLaw& law, const ModelParams& p, const MarketParams& m,
                                  SpendingRate c, double a, double x0, const SimConfig& cfg) {
  p.validate();
  m.validate();
  cfg.validate(x0);
  if (!std::isfinite(a)) throw ConfigError("market exposure must be finite");
  auto path_for = [&](double rate) {
    return detail::MarketPath{-(p.rho + rate) + a * m.mu, a * m.sigma,
                              p.lambda + p.delta * std::pow(rate, p.gamma), cfg.survival_barrier,
                              cfg.t_max, cfg.euler_dt};
  };
  const double rate = c.capped(cfg.cap_M);
  const auto q = path_for(rate);
  const auto q_cap = path_for(2.0 * cfg.cap_M);
  const bool cap_study = c.is_max();
  const auto t = detail::run_blocks(cfg, [&](Xoshiro256& rng, std::uint64_t i, detail::Tally& tally) {
    if (i % 10 == 0) {
      const auto [coarse, fine] = detail::market_path(law, q, x0, true, rng);
      tally.add(coarse);
      tally.add_pair(coarse, fine);
    } else if (cap_study && i % 10 == 5) {
      Xoshiro256 replay = rng;
      const Outcome base = detail::market_path(law, q, x0, false, rng).first;
      const Outcome alt = detail::market_path(law, q_cap, x0, false, replay).first;
      tally.add(base);
      tally.add_cap_pair(base, alt);
    } else {
      tally.add(detail::market_path(law, q, x0, false, rng).first);
    }
  });
  auto e = detail::finalize(cfg, t);
  if (t.pair_n > 0) {
    const auto [d, se] = detail::paired_mean(t.pair_n, t.pair_diff, t.pair_diff_sq);
    e.step_drift = d;
    e.step_drift_se = se;
    if (std::abs(d) > 2.0 * e.std_err) {
      e.warnings.push_back("StepWarning: step-halving drift " + std::to_string(d) +
                           " exceeds 2 standard errors");
    }
  }
  if (cap_study) detail::attach_cap_drift(e, t.cap_n, t.cap_diff, t.cap_diff_sq);
  return e;
}

}  // namespace dualrisk
