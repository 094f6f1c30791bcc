#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "dualrisk/numerics.hpp"

namespace nm = dualrisk::numerics;

TEST(FindRoot, SquareRootOfTwo) {
  const double r = nm::find_root([](double x) { return x * x - 2.0; }, {0.0, 2.0});
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
}

TEST(FindRoot, DottieNumber) {
  const double r = nm::find_root([](double x) { return std::cos(x) - x; }, {0.0, 1.0},
                                 nm::kTightTolerance);
  EXPECT_NEAR(r, 0.7390851332151607, 1e-15);
}

TEST(FindRoot, ExactEndpointRootIsReturned) {
  EXPECT_EQ(nm::find_root([](double x) { return x - 1.0; }, {1.0, 3.0}), 1.0);
  EXPECT_EQ(nm::find_root([](double x) { return x - 3.0; }, {1.0, 3.0}), 3.0);
}

TEST(FindRoot, DecreasingFunction) {
  const double r = nm::find_root([](double x) { return 5.0 - x * x * x; }, {0.0, 5.0});
  EXPECT_NEAR(r, std::cbrt(5.0), 1e-12);
}

TEST(FindRoot, NoSignChangeThrows) {
  EXPECT_THROW(nm::find_root([](double x) { return x * x + 1.0; }, {-1.0, 1.0}), nm::NoSignChange);
  EXPECT_THROW(nm::find_root([](double) { return std::nan(""); }, {0.0, 1.0}), nm::NoSignChange);
  EXPECT_THROW(nm::find_root([](double x) { return x; }, {1.0, -1.0}), nm::NoSignChange);
}

TEST(FindRoot, IterationCapThrows) {
  nm::Tolerance tol{1e-300, 1e-300, 3};
  EXPECT_THROW(nm::find_root([](double x) { return std::tanh(50.0 * (x - 0.3)); }, {-7.0, 9.0}, tol),
               nm::MaxIterExceeded);
}

TEST(FindRoot, SteepFunctionStillConverges) {
  const double r = nm::find_root([](double x) { return std::tanh(50.0 * (x - 0.3)); }, {-7.0, 9.0},
                                 nm::kTightTolerance);
  EXPECT_NEAR(r, 0.3, 1e-14);
}

TEST(ExpandBracket, GrowsUpward) {
  auto f = [](double x) { return x - 1e3; };
  const auto b = nm::expand_bracket(f, 1.0);
  EXPECT_LT(f(b.lo), 0.0);
  EXPECT_GT(f(b.hi), 0.0);
}

TEST(ExpandBracket, ShrinksDownward) {
  auto f = [](double x) { return x - 1e-7; };
  const auto b = nm::expand_bracket(f, 1.0);
  EXPECT_LT(f(b.lo), 0.0);
  EXPECT_GT(f(b.hi), 0.0);
  EXPECT_NEAR(nm::find_root(f, b, nm::kTightTolerance), 1e-7, 1e-20);
}

TEST(ExpandBracket, ExhaustionThrows) {
  EXPECT_THROW(nm::expand_bracket([](double) { return -1.0; }, 1.0), nm::NoBracketFound);
  EXPECT_THROW(nm::expand_bracket([](double) { return 1.0; }, 1.0), nm::NoBracketFound);
}

TEST(Integrate, Polynomials) {
  EXPECT_NEAR(nm::integrate([](double x) { return x * x * x; }, 0.0, 2.0, 1e-12), 4.0, 1e-12);
}

TEST(Integrate, SineOverHalfPeriod) {
  EXPECT_NEAR(nm::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12), 2.0,
              1e-11);
}

TEST(Integrate, KinkedIntegrand) {
  // int_0^1 |x - 1/3| dx = (1/3)^2/2 + (2/3)^2/2 = 5/18
  EXPECT_NEAR(nm::integrate([](double x) { return std::abs(x - 1.0 / 3.0); }, 0.0, 1.0, 1e-12),
              5.0 / 18.0, 1e-11);
}

TEST(Integrate, ReversedLimitsFlipSign) {
  EXPECT_NEAR(nm::integrate([](double x) { return std::exp(x); }, 1.0, 0.0, 1e-12),
              -(std::exp(1.0) - 1.0), 1e-11);
}

TEST(IntegrateSemiInfinite, Exponential) {
  EXPECT_NEAR(nm::integrate_semiinf([](double x) { return std::exp(-x); }, 0.0, 1e-12), 1.0, 1e-11);
}

TEST(IntegrateSemiInfinite, InverseSquare) {
  EXPECT_NEAR(nm::integrate_semiinf([](double x) { return 1.0 / (x * x); }, 1.0, 1e-12), 1.0, 1e-10);
}

TEST(IntegrateSemiInfinite, GaussianMoment) {
  EXPECT_NEAR(nm::integrate_semiinf([](double x) { return x * std::exp(-x * x); }, 0.0, 1e-12), 0.5,
              1e-11);
}

TEST(IntegrateSemiInfinite, ShiftedStart) {
  // int_3^inf e^{-2x} dx = e^{-6}/2
  EXPECT_NEAR(nm::integrate_semiinf([](double x) { return std::exp(-2.0 * x); }, 3.0, 1e-12),
              0.5 * std::exp(-6.0), 1e-14);
}

TEST(IntegrateSemiInfinite, RejectsUnreasonableTolerance) {
  auto f = [](double x) { return std::exp(-x); };
  EXPECT_THROW(nm::integrate_semiinf(f, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(nm::integrate_semiinf(f, 0.0, 1e-16), std::invalid_argument);
}

// libm's erfc is an independent implementation.
TEST(ErrorFunction, ErfcMatchesLibm) {
  for (double x = -6.0; x <= 27.0; x += 0.0625) {
    const double want = std::erfc(x);
    // below the normal range the result is flushed to zero
    if (want < std::numeric_limits<double>::min()) {
      EXPECT_LT(nm::erfc(x), std::numeric_limits<double>::min());
      continue;
    }
    EXPECT_NEAR(nm::erfc(x) / want, 1.0, 2e-14) << "x=" << x;
  }
}

TEST(ErrorFunction, ErfMatchesLibm) {
  for (double x = -5.0; x <= 5.0; x += 0.03125) {
    EXPECT_NEAR(nm::erf(x), std::erf(x), 2e-16 + 1e-14 * std::abs(std::erf(x))) << "x=" << x;
  }
}

TEST(ErrorFunction, ErfIsOdd) {
  for (double x : {1e-10, 0.1, 0.4, 0.47, 0.5, 1.0, 3.0}) EXPECT_EQ(nm::erf(-x), -nm::erf(x));
}

TEST(ErrorFunction, SpecialValues) {
  EXPECT_EQ(nm::erfc(0.0), 1.0);
  EXPECT_EQ(nm::erf(0.0), 0.0);
  EXPECT_EQ(nm::erfc(-40.0), 2.0);
  EXPECT_EQ(nm::erfc(40.0), 0.0);
}

TEST(ErrorFunction, ScaledComplementMatchesProduct) {
  for (double x = -3.0; x <= 6.0; x += 0.125) {
    const double want = std::exp(x * x) * std::erfc(x);
    EXPECT_NEAR(nm::erfcx(x) / want, 1.0, 5e-14) << "x=" << x;
  }
}

TEST(ErrorFunction, ScaledComplementAsymptotic) {
  // erfcx(x) = (1/(x sqrt(pi))) (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...)
  for (double x : {100.0, 1e3, 1e6}) {
    const double s = 1.0 / (x * std::sqrt(std::numbers::pi));
    const double u = 1.0 / (x * x);
    const double want = s * (1.0 - 0.5 * u + 0.75 * u * u - 1.875 * u * u * u);
    EXPECT_NEAR(nm::erfcx(x) / want, 1.0, 1e-13) << "x=" << x;
  }
}
