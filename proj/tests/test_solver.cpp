#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dualrisk/solver.hpp"

using namespace dualrisk;

namespace {

// Closed forms for exponential jumps and gamma = 1/2.
double beta_closed(double rho, double lambda, double delta, double nu) {
  return (lambda + std::sqrt(lambda * lambda + rho * delta * delta)) / (2.0 * rho) - nu;
}
double c_closed(double rho, double lambda, double delta) {
  const double s = lambda + std::sqrt(lambda * lambda + rho * delta * delta);
  return delta * delta * rho * rho / (s * s);
}

// Plain bisection, deliberately simpler than the library root finder.
template <typename F>
double bisect(F f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == (f(lo) < 0.0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

const JumpLaw kFig1Law = JumpLaw::exponential(0.1);
const ModelParams kFig1{0.1, 0.1, 1.0, 0.5};

}  // namespace

TEST(AlphaNoInvestment, ExponentialClosedForm) {
  const auto a = alpha_no_investment(kFig1Law, 0.1, 0.1);
  ASSERT_TRUE(a);
  EXPECT_NEAR(*a, 0.9, 1e-12);
}

TEST(AlphaNoInvestment, InfeasibleIsAValue) {
  EXPECT_FALSE(alpha_no_investment(JumpLaw::exponential(1.0), 2.0, 1.0));
  // lambda E[Y] == rho exactly
  EXPECT_FALSE(alpha_no_investment(JumpLaw::exponential(1.0), 1.0, 1.0));
}

TEST(AlphaNoInvestment, GammaLawAgainstBisection) {
  const auto law = JumpLaw::gamma(2.0, 1.0);
  const auto a = alpha_no_investment(law, 1.0, 1.0);
  ASSERT_TRUE(a);
  // Gamma(2,1): L(b) = (1+b)^{-2}
  auto eq = [](double b) { return b + std::pow(1.0 + b, -2.0) - 1.0; };
  EXPECT_NEAR(*a, bisect(eq, 1e-6, 10.0), 1e-12);
  EXPECT_LT(std::abs(eq(*a)), 1e-12);
}

TEST(AlphaNoInvestment, RejectsNonPositiveRates) {
  EXPECT_THROW(alpha_no_investment(kFig1Law, 0.0, 1.0), std::invalid_argument);
}

TEST(ConditionOne, KnownValues) {
  EXPECT_TRUE(check_condition_one(kFig1Law, kFig1));
  EXPECT_FALSE(check_condition_one(JumpLaw::exponential(2.0), {2.0, 0.1, 1.0, 0.5}));
  EXPECT_TRUE(check_condition_one(JumpLaw::exponential(0.1), {0.5, 1.0, 1e-6, 0.3}));
}

TEST(ConditionOne, ExactEqualityIsInfeasible) {
  // (2 - 1) - (2 * 0.5)^2 (2 - 1) 1^2 == 0
  const ModelParams p{2.0, 1.0, 2.0, 0.5};
  EXPECT_EQ(condition_one_lhs(JumpLaw::exponential(1.0), p), 0.0);
  EXPECT_FALSE(check_condition_one(JumpLaw::exponential(1.0), p));
  const auto s = solve_sublinear(JumpLaw::exponential(1.0), p);
  EXPECT_FALSE(s.feasible);
  EXPECT_FALSE(s.diagnostic.empty());
}

TEST(ConditionOne, WrongRegime) {
  EXPECT_THROW(check_condition_one(kFig1Law, {0.1, 0.1, 1.0, 1.0}), WrongRegime);
  EXPECT_THROW(solve_sublinear(kFig1Law, {0.1, 0.1, 1.0, 1.5}), WrongRegime);
}

TEST(SolveSublinear, Fig1ParamsValues) {
  const auto s = solve_sublinear(kFig1Law, kFig1);
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.regime, Regime::SubLinear);
  EXPECT_NEAR(s.beta, beta_closed(0.1, 0.1, 1.0, 0.1), 1e-12);
  EXPECT_NEAR(s.beta, 2.0583124, 1e-7);
  EXPECT_NEAR(s.c_star.value(), c_closed(0.1, 0.1, 1.0), 1e-12);
  EXPECT_NEAR(s.c_star.value(), 0.0536676, 1e-7);
  EXPECT_LE(std::abs(s.residual), 1e-9);
  EXPECT_LE(std::abs(s.c_residual), 1e-9);
  EXPECT_FALSE(s.a_star);
}

TEST(SolveSublinear, ClosedFormGrid) {
  const std::vector<double> axis{0.05, 0.3, 1.0, 2.5, 5.0};
  int solved = 0;
  for (double rho : axis)
    for (double lambda : axis)
      for (double delta : axis)
        for (double nu : axis) {
          const auto s = solve_sublinear(JumpLaw::exponential(nu), {rho, lambda, delta, 0.5});
          // exponential gamma=1/2 form of the condition
          const bool want = rho - lambda / nu - delta * delta / (4.0 * nu * nu) < 0.0;
          ASSERT_EQ(s.feasible, want) << rho << " " << lambda << " " << delta << " " << nu;
          if (!s.feasible) continue;
          ++solved;
          EXPECT_NEAR(s.beta, beta_closed(rho, lambda, delta, nu), 1e-10);
          EXPECT_NEAR(s.c_star.value(), c_closed(rho, lambda, delta), 1e-10);
        }
  EXPECT_GT(solved, 300);
}

TEST(SolveSublinear, GammaLawAgainstBisection) {
  const auto law = JumpLaw::gamma(3.0, 0.5);
  const ModelParams p{1.0, 0.2, 0.7, 0.4};
  const auto s = solve_sublinear(law, p);
  ASSERT_TRUE(s.feasible);
  auto g = [&](double b) { return (1.0 - std::pow(1.0 + b / 0.5, -3.0)) / b; };
  const double e = 1.0 / 0.6;
  auto G = [&](double b) {
    return p.rho - (1.0 / p.gamma - 1.0) * std::pow(p.delta * p.gamma * g(b), e) - p.lambda * g(b);
  };
  const double want = bisect(G, 1e-6, 50.0);
  EXPECT_NEAR(s.beta, want, 1e-11);
  EXPECT_NEAR(s.c_star.value(), std::pow(p.delta * p.gamma * g(want), e), 1e-10);
}

TEST(SolveSublinear, SmallDeltaApproachesNoInvestment) {
  const auto s = solve_sublinear(kFig1Law, {0.1, 0.1, 1e-8, 0.5});
  ASSERT_TRUE(s.feasible);
  EXPECT_NEAR(s.beta, *alpha_no_investment(kFig1Law, 0.1, 0.1), 1e-5);
}

TEST(SolveSublinear, ConditionViolatedIsFlaggedNotThrown) {
  const auto s = solve_sublinear(kFig1Law, {100.0, 0.1, 1.0, 0.5});
  EXPECT_FALSE(s.feasible);
  EXPECT_EQ(s.value_at(3.0), 1.0);
}

TEST(SolveSublinear, CStarBoundAndResiduals) {
  for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double rho : {0.05, 0.5, 2.0}) {
      for (const auto& law : {JumpLaw::exponential(0.5), JumpLaw::gamma(2.0, 1.0), JumpLaw::deterministic(1.5)}) {
        const ModelParams p{rho, 0.3, 1.2, gamma};
        const auto s = solve_sublinear(law, p);
        if (!s.feasible) continue;
        EXPECT_LE(s.c_star.value(), rho * gamma / (1.0 - gamma) * (1.0 + 1e-12));
        EXPECT_LE(std::abs(s.residual), 1e-9);
        EXPECT_LE(std::abs(s.c_residual), 1e-9);
      }
    }
  }
}

TEST(SolveSublinear, MonotoneInParameters) {
  const auto law = JumpLaw::exponential(0.5);
  double prev = INFINITY;
  for (int i = 0; i < 10; ++i) {
    const double rho = 0.05 * std::pow(1.4, i);
    const auto s = solve_sublinear(law, {rho, 0.5, 1.0, 0.5});
    ASSERT_TRUE(s.feasible);
    EXPECT_LT(s.beta, prev);
    prev = s.beta;
  }
  prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto s = solve_sublinear(law, {0.5, 0.5, 0.2 * std::pow(1.5, i), 0.5});
    ASSERT_TRUE(s.feasible);
    EXPECT_GT(s.beta, prev);
    prev = s.beta;
  }
  prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto s = solve_sublinear(law, {0.5, 0.1 * std::pow(1.5, i), 1.0, 0.5});
    ASSERT_TRUE(s.feasible);
    EXPECT_GT(s.beta, prev);
    prev = s.beta;
  }
}

TEST(SolveSublinear, InvestingDominatesNoInvestment) {
  for (double delta : {1e-4, 0.01, 0.5, 3.0}) {
    const auto s = solve_sublinear(kFig1Law, {0.1, 0.1, delta, 0.5});
    ASSERT_TRUE(s.feasible);
    EXPECT_GE(s.beta, 0.9);
  }
}

TEST(SolveSublinear, ValueFunctionShape) {
  const auto s = solve(kFig1Law, kFig1);
  EXPECT_EQ(s.value_at(0.0), 1.0);
  double prev = 1.0;
  for (double x = 0.1; x < 5.0; x += 0.1) {
    EXPECT_LT(s.value_at(x), prev);
    prev = s.value_at(x);
  }
}

TEST(SolveSingular, MaxInvestClosedForm) {
  const auto s = solve_singular(JumpLaw::exponential(0.1), {0.1, 0.05, 1.0, 1.0});
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.regime, Regime::SingularMaxInvest);
  EXPECT_TRUE(s.c_star.is_max());
  EXPECT_NEAR(s.beta, 0.9, 1e-12);
}

TEST(SolveSingular, NoInvestClosedForm) {
  const auto s = solve_singular(JumpLaw::exponential(0.1), {0.1, 0.5, 1.0, 1.0});
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.regime, Regime::SingularNoInvest);
  EXPECT_EQ(s.c_star.value(), 0.0);
  EXPECT_NEAR(s.beta, 4.9, 1e-12);
}

TEST(SolveSingular, IndifferentAtExactThreshold) {
  // lambda / rho == 2 exactly
  const ModelParams p{0.5, 1.0, 2.0, 1.0};
  const auto law = JumpLaw::exponential(0.25);
  const auto s = solve_singular(law, p);
  EXPECT_EQ(s.regime, Regime::SingularIndifferent);
  ASSERT_TRUE(s.feasible);
  EXPECT_NEAR(s.beta, *alpha_no_investment(law, p.rho, p.lambda), 1e-12);
  EXPECT_NEAR(s.beta, 2.0 - 0.25, 1e-12);
}

TEST(SolveSingular, InfeasibleBranches) {
  // no-invest branch with lambda E[Y] < rho
  auto s = solve_singular(JumpLaw::exponential(1.0), {1.0, 0.5, 0.1, 1.0});
  EXPECT_EQ(s.regime, Regime::SingularNoInvest);
  EXPECT_FALSE(s.feasible);
  // max-invest branch with delta E[Y] < 1
  s = solve_singular(JumpLaw::exponential(2.0), {1.0, 0.5, 1.0, 1.0});
  EXPECT_EQ(s.regime, Regime::SingularMaxInvest);
  EXPECT_FALSE(s.feasible);
}

TEST(SolveSingular, WrongRegime) {
  EXPECT_THROW(solve_singular(kFig1Law, kFig1), WrongRegime);
}

TEST(SuperLinear, Classification) {
  const auto s = solve(JumpLaw::exponential(1.0), {1.0, 1.0, 1.0, 2.0});
  EXPECT_EQ(s.regime, Regime::SuperLinearDegenerate);
  EXPECT_TRUE(s.feasible);
  EXPECT_TRUE(std::isinf(s.beta));
  EXPECT_TRUE(s.c_star.is_max());
  EXPECT_EQ(s.value_at(0.01), 0.0);
  EXPECT_EQ(s.value_at(0.0), 1.0);
  EXPECT_THROW(classify_superlinear(JumpLaw::exponential(1.0), {1.0, 1.0, 1.0, 1.0}), WrongRegime);
}

TEST(SuperLinear, AlphaGrowsWithSpending) {
  const auto law = JumpLaw::exponential(1.0);
  const ModelParams p{1.0, 1.0, 1.0, 2.0};
  // exponential: alpha_C = (lambda + delta C^2)/(rho + C) - nu; zero at C = 1
  EXPECT_FALSE(alpha_constant_strategy(law, p, 1.0));
  const auto a10 = alpha_constant_strategy(law, p, 10.0);
  const auto a100 = alpha_constant_strategy(law, p, 100.0);
  ASSERT_TRUE(a10 && a100);
  EXPECT_NEAR(*a10, 101.0 / 11.0 - 1.0, 1e-12);
  EXPECT_NEAR(*a100, 10001.0 / 101.0 - 1.0, 1e-10);
  EXPECT_GT(*a100, *a10);
  EXPECT_GT(*a10, 0.0);
}

TEST(ConstantStrategy, ZeroSpendingIsNoInvestment) {
  EXPECT_EQ(alpha_constant_strategy(kFig1Law, kFig1, 0.0), alpha_no_investment(kFig1Law, 0.1, 0.1));
}

TEST(ConstantStrategy, OptimalRateMaximizesExponent) {
  const auto s = solve_sublinear(kFig1Law, kFig1);
  const double c = s.c_star.value();
  const double best = *alpha_constant_strategy(kFig1Law, kFig1, c);
  EXPECT_NEAR(best, s.beta, 1e-10);
  for (double f : {0.5, 0.9, 1.1, 2.0}) EXPECT_LT(*alpha_constant_strategy(kFig1Law, kFig1, c * f), best);
}

TEST(SpendingRate, Marker) {
  EXPECT_THROW(SpendingRate::finite(-1.0), std::invalid_argument);
  EXPECT_THROW(SpendingRate::finite(INFINITY), std::invalid_argument);
  EXPECT_THROW(SpendingRate::maximal().value(), std::logic_error);
  EXPECT_EQ(SpendingRate::maximal().capped(7.0), 7.0);
  EXPECT_EQ(SpendingRate::finite(2.0).capped(7.0), 2.0);
}

TEST(ModelParams, Validation) {
  EXPECT_THROW(solve(kFig1Law, {0.0, 0.1, 1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(solve(kFig1Law, {0.1, 0.1, 1.0, -0.5}), std::invalid_argument);
  EXPECT_THROW(solve(kFig1Law, {0.1, NAN, 1.0, 0.5}), std::invalid_argument);
}
