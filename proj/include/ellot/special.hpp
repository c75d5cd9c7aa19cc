#pragma once

// Regularized incomplete gamma and beta functions and their inverses.
//
// Everything is evaluated in log space so that both tails stay accurate far
// beyond the range where 1 - p is representable. Inverses take the smaller
// of the two tail probabilities and solve on that side.

#include <cmath>
#include <limits>
#include <utility>

#include "ellot/errors.hpp"

namespace ellot::special {

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxTerms = 100000;

/// log of the lower regularized series sum for P(a, x), valid for x < a + 1.
inline double log_gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps * 0.5) break;
  }
  return std::log(sum) - x + a * std::log(x) - std::lgamma(a);
}

/// log Q(a, x) by the Legendre continued fraction (modified Lentz), x >= a + 1.
inline double log_gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps * 0.5) break;
  }
  return std::log(h) - x + a * std::log(x) - std::lgamma(a);
}

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps * 0.5) break;
  }
  return h;
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// log I_x(a, b) through the fraction, accurate when x < (a + 1) / (a + b + 2).
inline double log_beta_direct(double a, double b, double x) {
  return a * std::log(x) + b * std::log1p(-x) - log_beta(a, b) +
         std::log(beta_fraction(a, b, x) / a);
}

/// Safeguarded Newton iteration on an increasing residual r(x) with r(root)=0.
///
/// `eval(x)` returns {r(x), r'(x)}. The bracket grows from `x0` by `grow` /
/// `shrink` until it straddles the root; afterwards Newton steps that leave
/// the bracket are replaced by bisection (geometric when the bracket spans
/// more than a factor of two).
template <typename Eval, typename Grow, typename Shrink>
double solve_increasing(Eval eval, double x0, Grow grow, Shrink shrink) {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double x = x0;
  for (int iter = 0; iter < 4000; ++iter) {
    auto [r, dr] = eval(x);
    if (r == 0.0) return x;
    if (r < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const bool newton_ok = std::isfinite(r) && std::isfinite(dr) && dr > 0.0;
    const double newton = newton_ok ? x - r / dr : std::numeric_limits<double>::quiet_NaN();
    double next;
    if (!std::isfinite(hi)) {
      next = grow(x);
      if (newton > x) next = std::min(newton, next);
    } else if (lo == 0.0) {
      next = (newton > 0.0 && newton < x) ? newton : shrink(x);
    } else {
      if (hi - lo <= 4.0 * kEps * hi) return 0.5 * (lo + hi);
      next = newton;
      if (!(next > lo && next < hi)) {
        next = (hi > 2.0 * lo) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
      }
    }
    if (std::abs(next - x) <= 2.0 * kEps * std::abs(x)) return next;
    x = next;
  }
  return x;
}

}  // namespace detail

/// log P(a, x), the lower regularized incomplete gamma function.
inline double log_gamma_p(double a, double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) return detail::log_gamma_p_series(a, x);
  return std::log1p(-std::exp(detail::log_gamma_q_fraction(a, x)));
}

/// log Q(a, x) = log(1 - P(a, x)).
inline double log_gamma_q(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return std::log1p(-std::exp(detail::log_gamma_p_series(a, x)));
  return detail::log_gamma_q_fraction(a, x);
}

inline double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }
inline double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

/// Solves P(a, x) = p when `upper` is false, Q(a, x) = p otherwise.
/// Requires 0 < p <= 0.5 for full accuracy; larger p is folded to the other tail.
inline double gamma_inv_tail(double a, double p, bool upper) {
  if (!(a > 0.0)) throw DomainError("gamma inverse: shape must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma inverse: probability outside (0,1)");
  if (p > 0.5) {
    return gamma_inv_tail(a, 1.0 - p, !upper);
  }
  const double log_target = std::log(p);
  const double lg = std::lgamma(a);
  auto log_density = [&](double x) { return (a - 1.0) * std::log(x) - x - lg; };
  auto eval = [&](double x) -> std::pair<double, double> {
    if (!upper) {
      const double lf = log_gamma_p(a, x);
      return {lf - log_target, std::exp(log_density(x) - lf)};
    }
    const double lg_q = log_gamma_q(a, x);
    return {log_target - lg_q, std::exp(log_density(x) - lg_q)};
  };
  double x0;
  if (!upper) {
    // P(a, x) ~ x^a / Gamma(a + 1) near zero.
    x0 = std::exp((log_target + std::lgamma(a + 1.0)) / a);
    x0 = std::min(x0, std::max(a, 1.0));
  } else {
    x0 = std::max(a, 1.0) - log_target;
  }
  return detail::solve_increasing(
      eval, x0, [](double x) { return 2.0 * x + 1.0; },
      [](double x) { return 0.5 * x; });
}

/// x with P(a, x) = p.
inline double gamma_p_inv(double a, double p) { return gamma_inv_tail(a, p, false); }
/// x with Q(a, x) = q.
inline double gamma_q_inv(double a, double q) { return gamma_inv_tail(a, q, true); }

/// log I_x(a, b), the regularized incomplete beta function.
inline double log_beta_i(double a, double b, double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x >= 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return detail::log_beta_direct(a, b, x);
  return std::log1p(-std::exp(detail::log_beta_direct(b, a, 1.0 - x)));
}

inline double beta_i(double a, double b, double x) { return std::exp(log_beta_i(a, b, x)); }

/// Complement 1 - I_x(a, b) given y = 1 - x exactly: equals I_y(b, a).
inline double beta_i_complement(double a, double b, double y) {
  return beta_i(b, a, y);
}

/// x in (0, 1) with I_x(a, b) = p, for p <= 0.5 solved directly. For p > 0.5
/// callers should pass the complement through the swapped parameters to keep
/// accuracy: 1 - x = beta_i_inv(b, a, 1 - p).
inline double beta_i_inv(double a, double b, double p) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta inverse: parameters must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("beta inverse: probability outside (0,1)");
  if (p > 0.5) return 1.0 - beta_i_inv(b, a, 1.0 - p);
  const double log_target = std::log(p);
  const double lb = detail::log_beta(a, b);
  auto eval = [&](double x) -> std::pair<double, double> {
    if (x >= 1.0) return {-log_target, std::numeric_limits<double>::infinity()};
    const double lf = log_beta_i(a, b, x);
    const double ld = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
    return {lf - log_target, std::exp(ld - lf)};
  };
  // I_x(a, b) ~ x^a / (a B(a, b)) near zero.
  double x0 = std::exp((log_target + std::log(a) + lb) / a);
  x0 = std::min(x0, 0.5);
  return detail::solve_increasing(
      eval, x0, [](double x) { return x < 0.25 ? 2.0 * x : x + 0.5 * (1.0 - x); },
      [](double x) { return 0.5 * x; });
}

}  // namespace ellot::special
