#pragma once

// Scalar kernels shared by every solver: bracketed root finding on monotone
// functions, adaptive Simpson quadrature (finite and semi-infinite ranges)
// and a self-contained complementary error function.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualrisk::numerics {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSignChange : public NumericError {
 public:
  using NumericError::NumericError;
};

class MaxIterExceeded : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoBracketFound : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonConvergent : public NumericError {
 public:
  using NumericError::NumericError;
};

template <typename F>
concept ScalarFunction = requires(F f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

struct Bracket {
  double lo = 0.0;
  double hi = 1.0;
};

struct Tolerance {
  double abs_x = 1e-12;
  double abs_f = 1e-12;
  int max_iter = 200;
};

/// Tolerance used by the characteristic-equation solvers. The residual
/// threshold is far below the default so that the abscissa, not the
/// residual, decides termination.
inline constexpr Tolerance kTightTolerance{1e-15, 1e-17, 400};

/// Root of a continuous monotone function on a sign-changing bracket.
///
/// Secant steps are taken while they shrink the bracket by at least half
/// every two iterations; otherwise the step falls back to bisection, so the
/// bracket width is guaranteed to go to zero. Iteration also stops when the
/// midpoint is no longer representable between the endpoints.
template <ScalarFunction F>
double find_root(F&& f, Bracket bracket, const Tolerance& tol = {}) {
  if (!(bracket.lo < bracket.hi)) {
    throw NoSignChange("find_root: bracket requires lo < hi");
  }
  if (!(tol.abs_x > 0.0) || !(tol.abs_f > 0.0) || tol.max_iter <= 0) {
    throw std::invalid_argument("find_root: tolerances must be positive");
  }
  double lo = bracket.lo;
  double hi = bracket.hi;
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0.0) == (fhi > 0.0)) {
    throw NoSignChange("find_root: f(lo) and f(hi) have the same sign");
  }

  double width_two_steps_ago = hi - lo;
  double width_prev = hi - lo;
  for (int iter = 0; iter < tol.max_iter; ++iter) {
    const double width = hi - lo;
    const double mid = lo + 0.5 * width;
    if (width <= tol.abs_x || mid <= lo || mid >= hi) {
      return std::abs(flo) < std::abs(fhi) ? lo : hi;
    }

    double x = mid;
    const bool slow = width > 0.5 * width_two_steps_ago;
    if (!slow && std::isfinite(flo) && std::isfinite(fhi)) {
      const double secant = lo - flo * (hi - lo) / (fhi - flo);
      // Keep the secant point strictly inside and away from the endpoints.
      const double margin = 1e-3 * width;
      if (secant > lo + margin && secant < hi - margin) x = secant;
    }

    const double fx = f(x);
    if (std::isnan(fx)) {
      throw NumericError("find_root: function returned NaN at x=" + std::to_string(x));
    }
    if (std::abs(fx) <= tol.abs_f) return x;
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    width_two_steps_ago = width_prev;
    width_prev = width;
  }
  throw MaxIterExceeded("find_root: neither tolerance met within max_iter iterations");
}

/// Bracket for an increasing function by geometric expansion from `seed`.
///
/// If f(seed) < 0 the upper end is doubled until f turns positive; if
/// f(seed) > 0 the lower end is halved toward 0+. Exhausting the expansion
/// budget means no positive root exists, which for the characteristic
/// equations signals an infeasible model.
template <ScalarFunction F>
Bracket expand_bracket(F&& f, double seed = 1.0, int max_expansions = 200) {
  if (!(seed > 0.0)) throw std::invalid_argument("expand_bracket: seed must be positive");
  const double fs = f(seed);
  if (std::isnan(fs)) throw NumericError("expand_bracket: f(seed) is NaN");
  if (fs == 0.0) return {0.5 * seed, 2.0 * seed};
  double lo = seed;
  double hi = seed;
  if (fs < 0.0) {
    for (int i = 0; i < max_expansions; ++i) {
      lo = hi;
      hi *= 2.0;
      const double fh = f(hi);
      if (std::isnan(fh)) break;
      if (fh >= 0.0) return {lo, hi};
    }
  } else {
    for (int i = 0; i < max_expansions; ++i) {
      hi = lo;
      lo *= 0.5;
      const double fl = f(lo);
      if (std::isnan(fl)) break;
      if (fl <= 0.0) return {lo, hi};
    }
  }
  throw NoBracketFound("expand_bracket: no sign change found from seed " + std::to_string(seed));
}

namespace detail {

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
  double eps;
  int depth;
};

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace detail

struct QuadratureOptions {
  int initial_panels = 32;
  int max_depth = 48;
  std::size_t max_panels = 4'000'000;
};

/// Adaptive Simpson quadrature of f on [a, b] with relative tolerance.
///
/// The absolute target is rel_tol times a first-pass composite estimate
/// (floored by abs_tol); panels are split until the Richardson-corrected
/// difference of one and two Simpson steps falls below their share.
template <ScalarFunction F>
double integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                 const QuadratureOptions& opt = {}) {
  if (a == b) return 0.0;
  if (!(a < b)) return -integrate(f, b, a, rel_tol, abs_tol, opt);

  const int n = std::max(2, opt.initial_panels);
  const double h = (b - a) / n;
  std::vector<double> nodes(2 * n + 1);
  std::vector<double> vals(2 * n + 1);
  for (int i = 0; i <= 2 * n; ++i) {
    nodes[i] = (i == 2 * n) ? b : a + 0.5 * h * i;
    vals[i] = f(nodes[i]);
  }
  double coarse = 0.0;
  double coarse_abs = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = detail::simpson(nodes[2 * i], nodes[2 * i + 2], vals[2 * i],
                                     vals[2 * i + 1], vals[2 * i + 2]);
    coarse += s;
    coarse_abs += std::abs(s);
  }
  if (!std::isfinite(coarse)) {
    throw NonConvergent("integrate: integrand is not finite on the sampling grid");
  }
  const double target = std::max(rel_tol * std::abs(coarse), abs_tol);
  if (target == 0.0 && coarse_abs == 0.0) return 0.0;
  const double eps_total = target > 0.0 ? target : rel_tol * coarse_abs;

  std::vector<detail::SimpsonPanel> stack;
  stack.reserve(256);
  for (int i = n - 1; i >= 0; --i) {
    detail::SimpsonPanel p{nodes[2 * i], nodes[2 * i + 1], nodes[2 * i + 2],
                           vals[2 * i],  vals[2 * i + 1],  vals[2 * i + 2],
                           0.0,          eps_total / n,     0};
    p.whole = detail::simpson(p.a, p.b, p.fa, p.fm, p.fb);
    stack.push_back(p);
  }

  double total = 0.0;
  std::size_t processed = 0;
  while (!stack.empty()) {
    const detail::SimpsonPanel p = stack.back();
    stack.pop_back();
    if (++processed > opt.max_panels) {
      throw NonConvergent("integrate: panel budget exhausted");
    }
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = detail::simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = detail::simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (!std::isfinite(delta)) {
      throw NonConvergent("integrate: integrand is not finite");
    }
    if (std::abs(delta) <= 15.0 * p.eps || p.depth >= opt.max_depth || lm <= p.a || rm >= p.b) {
      if (p.depth >= opt.max_depth && std::abs(delta) > 15.0 * p.eps) {
        throw NonConvergent("integrate: maximum subdivision depth reached");
      }
      total += left + right + delta / 15.0;
      continue;
    }
    stack.push_back({p.m, rm, p.b, p.fm, frm, p.fb, right, 0.5 * p.eps, p.depth + 1});
    stack.push_back({p.a, lm, p.m, p.fa, flm, p.fm, left, 0.5 * p.eps, p.depth + 1});
  }
  return total;
}

/// Integral of f over [a, inf) via y = a + t/(1-t), t in [0, 1).
///
/// The transformed integrand is taken as 0 at t = 1; f must decay fast
/// enough that f(y)(1+y-a)^2 -> 0.
template <ScalarFunction F>
double integrate_semiinf(F&& f, double a, double rel_tol, const QuadratureOptions& opt = {}) {
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2)) {
    throw std::invalid_argument("integrate_semiinf: rel_tol must lie in (1e-14, 1e-2)");
  }
  auto mapped = [&](double t) -> double {
    if (t >= 1.0) return 0.0;
    const double s = 1.0 - t;
    const double y = a + t / s;
    if (!std::isfinite(y)) return 0.0;
    const double v = f(y);
    if (v == 0.0) return 0.0;
    return v / (s * s);
  };
  return integrate(mapped, 0.0, 1.0, rel_tol, 0.0, opt);
}

namespace detail {

// Rational Chebyshev approximations of W. J. Cody (Math. Comp. 1969),
// coefficients as published in the SPECFUN CALERF routine.
inline constexpr std::array<double, 5> kErfA{3.1611237438705656, 113.864154151050156,
                                             377.485237685302021, 3209.37758913846947,
                                             0.185777706184603153};
inline constexpr std::array<double, 4> kErfB{23.6012909523441209, 244.024637934444173,
                                             1282.61652607737228, 2844.23683343917062};
inline constexpr std::array<double, 9> kErfcC{
    0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
    298.635138197400131,  881.95222124176909,  1712.04761263407058,
    2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
inline constexpr std::array<double, 8> kErfcD{15.7449261107098347, 117.693950891312499,
                                              537.181101862009858, 1621.38957456669019,
                                              3290.79923573345963, 4362.61909014324716,
                                              3439.36767414372164, 1230.33935480374942};
inline constexpr std::array<double, 6> kErfcP{0.305326634961232344, 0.360344899949804439,
                                              0.125781726111229246, 0.0160837851487422766,
                                              6.58749161529837803e-4, 0.0163153871373020978};
inline constexpr std::array<double, 5> kErfcQ{2.56852019228982242, 1.87295284992346047,
                                              0.527905102951428412, 0.0605183413124413191,
                                              0.00233520497626869185};
inline constexpr double kOneOverSqrtPi = 0.56418958354775628695;

// exp(-y*y) split as exp(-r*r) * exp(-(y-r)(y+r)) with r = y rounded down to
// 1/16, which keeps the squared argument exact.
inline double exp_neg_square(double y) {
  const double r = std::trunc(y * 16.0) / 16.0;
  const double del = (y - r) * (y + r);
  return std::exp(-r * r) * std::exp(-del);
}

// erfc(y) for y > 0.46875 without the exp(-y^2) factor when scaled is true.
inline double erfc_tail(double y, bool scaled) {
  double result;
  if (y <= 4.0) {
    double num = kErfcC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + kErfcC[i]) * y;
      den = (den + kErfcD[i]) * y;
    }
    result = (num + kErfcC[7]) / (den + kErfcD[7]);
  } else {
    if (!scaled && y >= 26.543) return 0.0;
    const double ysq = 1.0 / (y * y);
    double num = kErfcP[5] * ysq;
    double den = ysq;
    for (int i = 0; i < 4; ++i) {
      num = (num + kErfcP[i]) * ysq;
      den = (den + kErfcQ[i]) * ysq;
    }
    result = ysq * (num + kErfcP[4]) / (den + kErfcQ[4]);
    result = (kOneOverSqrtPi - result) / y;
  }
  return scaled ? result : exp_neg_square(y) * result;
}

inline double erf_small(double x) {
  const double y = std::abs(x);
  const double ysq = y > 1.11e-16 ? y * y : 0.0;
  double num = kErfA[4] * ysq;
  double den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = (num + kErfA[i]) * ysq;
    den = (den + kErfB[i]) * ysq;
  }
  return x * (num + kErfA[3]) / (den + kErfB[3]);
}

}  // namespace detail

/// Complementary error function with the conventional 2/sqrt(pi) scaling.
///
/// Three-interval rational Chebyshev scheme (Cody): a rational function for
/// erf on |x| <= 0.46875, and rational approximations of exp(x^2) erfc(x)
/// on (0.46875, 4] and (4, inf). Negative arguments use erfc(-x) = 2 - erfc(x).
inline double erfc(double x) {
  if (std::isnan(x)) return x;
  const double y = std::abs(x);
  if (y <= 0.46875) return 1.0 - detail::erf_small(x);
  const double tail = detail::erfc_tail(y, false);
  return x < 0.0 ? 2.0 - tail : tail;
}

inline double erf(double x) {
  if (std::isnan(x)) return x;
  const double y = std::abs(x);
  if (y <= 0.46875) return detail::erf_small(x);
  const double tail = detail::erfc_tail(y, false);
  return x < 0.0 ? tail - 1.0 : 1.0 - tail;
}

/// Scaled complementary error function exp(x^2) erfc(x), for x >= -26.6.
inline double erfcx(double x) {
  if (std::isnan(x)) return x;
  const double y = std::abs(x);
  double result;
  if (y <= 0.46875) {
    result = std::exp(y * y) * (1.0 - detail::erf_small(y));
  } else {
    result = detail::erfc_tail(y, true);
  }
  if (x < 0.0) {
    if (x < -26.628) return std::numeric_limits<double>::infinity();
    const double r = std::trunc(x * 16.0) / 16.0;
    const double del = (x - r) * (x + r);
    const double e = std::exp(r * r) * std::exp(del);
    result = 2.0 * e - result;
  }
  return result;
}

}  // namespace dualrisk::numerics
