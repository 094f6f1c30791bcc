#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dualrisk/montecarlo.hpp"

using namespace dualrisk;

namespace {

const JumpLaw kLaw = JumpLaw::exponential(0.1);
const ModelParams kFig1{0.1, 0.1, 1.0, 0.5};
const MarketParams kMarket{0.1, 0.2};

SimConfig config(std::uint64_t n, std::uint64_t seed, double barrier) {
  SimConfig c;
  c.n_paths = n;
  c.base_seed = seed;
  c.survival_barrier = barrier;
  return c;
}

double joint_se(const MCEstimate& a, const MCEstimate& b) {
  return std::hypot(a.std_err, b.std_err);
}

bool has_warning(const MCEstimate& e, const std::string& prefix) {
  return std::any_of(e.warnings.begin(), e.warnings.end(),
                     [&](const std::string& w) { return w.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST(ChooseBarrier, Examples) {
  EXPECT_NEAR(choose_barrier(1.0, std::exp(-10.0)), 10.0, 1e-12);
  // ln(1e4)/2.0583 = 4.47473..., ln(1e4)/0.9 = 10.23371...
  EXPECT_NEAR(choose_barrier(2.0583, 1e-4), std::log(1e4) / 2.0583, 1e-12);
  EXPECT_NEAR(choose_barrier(2.0583, 1e-4), 4.47473, 1e-5);
  EXPECT_NEAR(choose_barrier(0.9, 1e-4), 10.23371, 1e-5);
  EXPECT_THROW(choose_barrier(0.0, 1e-4), ConfigError);
  EXPECT_THROW(choose_barrier(1.0, 0.2), ConfigError);
}

TEST(SimConfig, Validation) {
  EXPECT_THROW(simulate_constant(kLaw, kFig1, 0.0, 5.0, config(10000, 1, 5.0)), ConfigError);
  EXPECT_THROW(simulate_constant(kLaw, kFig1, 0.0, 5.0, config(10000, 1, 4.0)), ConfigError);
  EXPECT_THROW(simulate_constant(kLaw, kFig1, -1.0, 1.0, config(10000, 1, 4.0)), ConfigError);
  EXPECT_THROW(simulate_constant(kLaw, kFig1, 0.0, 1.0, config(10, 1, 4.0)), ConfigError);
}

TEST(SimulateConstant, NoInvestmentMatchesExponential) {
  const auto e = simulate_constant(kLaw, kFig1, 0.0, 1.0, config(100000, 11, choose_barrier(0.9, 1e-4)));
  EXPECT_LE(std::abs(e.z_score(std::exp(-0.9))), 3.5) << e.p_hat;
  EXPECT_EQ(e.n_ruined + e.n_survived + e.n_censored, e.n_paths);
  EXPECT_EQ(e.n_censored, 0u);
}

TEST(SimulateConstant, OptimalRateMatchesExponential) {
  const auto s = solve_sublinear(kLaw, kFig1);
  const auto e = simulate_constant(kLaw, kFig1, s.c_star.value(), 1.0,
                                   config(100000, 12, choose_barrier(s.beta, 1e-4)));
  EXPECT_LE(std::abs(e.z_score(std::exp(-s.beta))), 3.5) << e.p_hat;
}

TEST(SimulateConstant, ReproducibleAcrossThreadCounts) {
  auto c = config(20000, 99, 10.0);
  const auto a = simulate_constant(kLaw, kFig1, 0.0, 1.0, c);
  c.threads = 3;
  const auto b = simulate_constant(kLaw, kFig1, 0.0, 1.0, c);
  EXPECT_EQ(a.n_ruined, b.n_ruined);
  EXPECT_EQ(a.n_survived, b.n_survived);
  EXPECT_EQ(a.p_hat, b.p_hat);
  c.base_seed = 100;
  EXPECT_NE(simulate_constant(kLaw, kFig1, 0.0, 1.0, c).n_ruined, a.n_ruined);
}

TEST(SimulateConstant, NominalCoverageOverSeeds) {
  const double target = std::exp(-0.9);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto e = simulate_constant(kLaw, kFig1, 0.0, 1.0, config(10000, seed, 10.2326));
    if (std::abs(e.p_hat - target) <= 2.58 * e.std_err) ++hits;
  }
  EXPECT_GE(hits, 44);
}

TEST(SimulateConstant, NeighbouringSeedsShareNoBlocks) {
  for (std::uint64_t b = 0; b < 1000; ++b) {
    EXPECT_NE(detail::block_seed(7, b + 1), detail::block_seed(8, b));
  }
}

TEST(SimulateConstant, MonotoneInInitialWealth) {
  const double B = choose_barrier(0.9, 1e-4);
  const auto one = simulate_constant(kLaw, kFig1, 0.0, 1.0, config(50000, 3, B));
  const auto two = simulate_constant(kLaw, kFig1, 0.0, 2.0, config(50000, 4, B));
  EXPECT_GT(one.p_hat - two.p_hat, 3.0 * joint_se(one, two));
}

TEST(SimulateConstant, FirstJumpTimesAreExponential) {
  // Kolmogorov-Smirnov against Exponential(lambda), 1% level
  Xoshiro256 rng(2024);
  const int n = 10000;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) {
    t[i] = simulate_constant_path(kLaw, kFig1, 0.0, 1.0, 10.0, 1e5, rng).first_jump_time;
  }
  std::sort(t.begin(), t.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-0.1 * t[i]);
    d = std::max({d, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(double(n)));
}

TEST(SimulateConstant, MaximalSpendingUsesCapAndReportsSensitivity) {
  // gamma = 1, delta > lambda/rho: C = M gives alpha_M = (lambda + delta M)/(rho + M) - nu
  const ModelParams p{0.1, 0.05, 1.0, 1.0};
  auto c = config(50000, 21, choose_barrier(0.9, 1e-4));
  const auto e = simulate_constant(kLaw, p, SpendingRate::maximal(), 1.0, c);
  const double alpha_m = (0.05 + 1000.0) / (0.1 + 1000.0) - 0.1;
  EXPECT_LE(std::abs(e.z_score(std::exp(-alpha_m))), 3.5);
  ASSERT_TRUE(e.cap_drift.has_value());
  EXPECT_LE(std::abs(*e.cap_drift), 4.0 * *e.cap_drift_se + 1e-3);
}

TEST(SimulateConstant, CensoringIsReported) {
  auto c = config(5000, 5, 10.0);
  c.t_max = 1.0;
  const auto e = simulate_constant(kLaw, kFig1, 0.0, 1.0, c);
  EXPECT_GT(e.n_censored, 50u);
  EXPECT_TRUE(has_warning(e, "CensoringWarning"));
}

TEST(SimulateState, ConstantModelAgreesWithConstantSimulator) {
  const auto s = solve_sublinear(kLaw, kFig1);
  const double B = choose_barrier(s.beta, 1e-4);
  const auto a = simulate_constant(kLaw, kFig1, s.c_star.value(), 1.0, config(50000, 31, B));
  const auto b = simulate_state(StateModel::constant(0.1, 0.1, 1.0, 0.5), 0.1,
                                ConstantPolicy{s.c_star.value()}, 1.0, config(50000, 32, B));
  EXPECT_LE(std::abs(a.p_hat - b.p_hat), 2.0 * joint_se(a, b));
}

TEST(SimulateState, ExampleOneMatchesClosedForm) {
  const auto p = StateExampleIParams::make(1.0, 0.1, 1.0, 1.0, 1.0, 0.1, 0.5);
  double B = 1.0;
  while (closed_form_state_ex1(p, B) > 1e-4) B += 0.05;
  const auto e = simulate_state(p.model(), p.nu, ConstantPolicy{p.c0}, 1.0, config(50000, 41, B));
  EXPECT_LE(std::abs(e.z_score(closed_form_state_ex1(p, 1.0))), 3.5) << e.p_hat;
}

TEST(SimulateState, ExampleTwoBangBangWithCap) {
  const StateExampleIIParams p{1.0, 1.0, 1.0, 1.2, 0.4, 0.1};
  double B = 5.0;
  while (closed_form_state_ex2(p, B) > 1e-4) B += 0.05;
  const auto e = simulate_state(p.model(), p.nu, BangBangPolicy{}, 5.0, config(50000, 51, B));
  const double target = closed_form_state_ex2(p, 5.0);
  EXPECT_LE(std::abs(e.p_hat - target), std::max(3.5 * e.std_err, 0.01)) << e.p_hat << " vs " << target;
  ASSERT_TRUE(e.cap_drift.has_value());
}

TEST(SimulateState, EnvelopeViolationAborts) {
  // spending spike inside a window whose endpoints see no spending
  const auto m = StateModel::constant(1.0, 0.1, 10.0, 0.5);
  const Policy spiky = FunctionPolicy{[](double x) { return std::abs(x - 0.77) < 0.1 ? 1.0 : 0.0; }};
  EXPECT_THROW(simulate_state(m, 0.1, spiky, 1.0, config(10000, 61, 50.0)), EnvelopeError);
}

TEST(SimulateMarket, ZeroExposureReducesToConstant) {
  const auto s = solve_sublinear(kLaw, kFig1);
  const double B = choose_barrier(s.beta, 1e-4);
  const auto a = simulate_constant(kLaw, kFig1, s.c_star.value(), 1.0, config(20000, 71, B));
  auto c = config(20000, 72, B);
  c.euler_dt = 1e-2;
  const auto b = simulate_market(kLaw, kFig1, kMarket, s.c_star, 0.0, 1.0, c);
  EXPECT_LE(std::abs(a.p_hat - b.p_hat), 2.0 * joint_se(a, b));
  ASSERT_TRUE(b.step_drift.has_value());
  // without diffusion the discrete ruin check is exact
  EXPECT_EQ(*b.step_drift, 0.0);
}

TEST(SimulateMarket, Fig1ParamsOptimalStrategy) {
  const auto s = solve_market_sublinear(kLaw, kFig1, kMarket);
  const auto e = simulate_market(kLaw, kFig1, kMarket, s.c_star, s.a_star, 1.0,
                                 config(50000, 81, choose_barrier(s.beta, 1e-4)));
  ASSERT_TRUE(e.step_drift.has_value());
  const double tol = std::max(3.5 * e.std_err, 3.0 * std::abs(*e.step_drift));
  EXPECT_LE(std::abs(e.p_hat - std::exp(-s.beta)), tol) << e.p_hat;
}

TEST(SimulateMarket, HighVolatilityApproachesNoMarket) {
  const MarketParams m{0.1, 5.0};
  const auto s = solve_market_sublinear(kLaw, kFig1, m);
  EXPECT_LT(s.a_star, 0.002);
  const auto plain = solve_sublinear(kLaw, kFig1);
  EXPECT_NEAR(s.beta / plain.beta, 1.0, 1e-3);
  auto c = config(20000, 91, choose_barrier(s.beta, 1e-4));
  c.euler_dt = 1e-2;
  const auto e = simulate_market(kLaw, kFig1, m, s.c_star, s.a_star, 1.0, c);
  EXPECT_LE(std::abs(e.z_score(std::exp(-plain.beta))), 3.5);
}

TEST(SimulateMarket, RejectsNonFiniteExposure) {
  EXPECT_THROW(simulate_market(kLaw, kFig1, kMarket, SpendingRate::finite(0.0), INFINITY, 1.0,
                               config(10000, 1, 5.0)),
               ConfigError);
}
