#include "sentshift/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sentshift::stats {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 200000;

/// Remainder of Stirling's series for log Gamma; accurate to ~1e-17 for z >= 10.
double stirling_correction(double z) {
  const double z2 = 1.0 / (z * z);
  return (1.0 / 12.0 +
          z2 * (-1.0 / 360.0 +
                z2 * (1.0 / 1260.0 + z2 * (-1.0 / 1680.0 + z2 * (1.0 / 1188.0 + z2 * (-691.0 / 360360.0 + z2 / 156.0)))))) /
         z;
}

/// log(1 + u) - u without cancellation for small u.
double log1pmx(double u) {
  if (std::fabs(u) >= 0.5)
    return std::log1p(u) - u;
  double term = u;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    term *= -u;
    const double add = term / k;
    sum += add;
    if (std::fabs(add) <= std::fabs(sum) * kEps * 0.25)
      break;
  }
  return sum;
}

double log_beta(double a, double b) {
  if (a < b)
    std::swap(a, b);
  if (a < 10.0)
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  const double s = a + b;
  if (b >= 10.0) {
    return 0.5 * std::log(2.0 * std::numbers::pi) + (a - 0.5) * -std::log1p(b / a) +
           (b - 0.5) * -std::log1p(a / b) - 0.5 * std::log(s) + stirling_correction(a) + stirling_correction(b) -
           stirling_correction(s);
  }
  // lgamma(a) - lgamma(a + b) through Stirling, with the large terms cancelled analytically.
  const double delta = (a - 0.5) * -std::log1p(b / a) - b * std::log(s) + b + stirling_correction(a) -
                       stirling_correction(s);
  return log_gamma(b) + delta;
}

/// Continued fraction for I_x(a, b) by the modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps)
      return h;
  }
  return h;
}

/// s*log(x) - x - lgamma(s), stable for large s.
double log_gamma_prefactor(double s, double x) {
  if (s < 10.0)
    return s * std::log(x) - x - log_gamma(s);
  return s * log1pmx((x - s) / s) + 0.5 * std::log(s / (2.0 * std::numbers::pi)) - stirling_correction(s);
}

double gamma_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps * 0.5)
      break;
  }
  return sum * std::exp(log_gamma_prefactor(s, x));
}

double gamma_continued_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps)
      break;
  }
  return std::exp(log_gamma_prefactor(s, x)) * h;
}

void check_gamma_args(double s, double x) {
  if (!(s > 0.0) || !std::isfinite(s) || !(x >= 0.0))
    throw StatsError(StatsError::Kind::InvalidArgs, "incomplete gamma needs s > 0 and x >= 0");
}

} // namespace

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(y >= 0.0))
    throw StatsError(StatsError::Kind::InvalidArgs, "incomplete beta needs a, b > 0 and x in [0,1]");
  if (x == 0.0)
    return 0.0;
  if (y == 0.0)
    return 1.0;
  const double log_x = x > 0.5 ? std::log1p(-y) : std::log(x);
  const double log_y = y > 0.5 ? std::log1p(-x) : std::log(y);
  const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double gamma_p(double s, double x) {
  check_gamma_args(s, x);
  if (x == 0.0)
    return 0.0;
  if (std::isinf(x))
    return 1.0;
  if (x < s + 1.0)
    return gamma_series(s, x);
  return 1.0 - gamma_continued_fraction(s, x);
}

double gamma_q(double s, double x) {
  check_gamma_args(s, x);
  if (x == 0.0)
    return 1.0;
  if (std::isinf(x))
    return 0.0;
  if (x < s + 1.0)
    return 1.0 - gamma_series(s, x);
  return gamma_continued_fraction(s, x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double student_t_sf(double t, double df) {
  if (!(df > 0.0))
    throw StatsError(StatsError::Kind::InvalidDf, "student_t_sf needs df > 0");
  if (std::isnan(t))
    throw StatsError(StatsError::Kind::InvalidArgs, "student_t_sf got NaN");
  if (std::isinf(df))
    return normal_sf(t);
  if (t == 0.0)
    return 0.5;
  if (std::isinf(t))
    return t > 0.0 ? 0.0 : 1.0;

  // x = df / (df + t^2), y = t^2 / (df + t^2), formed without overflow.
  double x;
  double y;
  if (std::fabs(t) > 1.0) {
    const double r = (df / t) / t;
    x = r / (1.0 + r);
    y = 1.0 / (1.0 + r);
  } else {
    const double t2 = t * t;
    x = df / (df + t2);
    y = t2 / (df + t2);
  }
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x, y);
  return t > 0.0 ? tail : 1.0 - tail;
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0) || !(x >= 0.0))
    throw StatsError(StatsError::Kind::InvalidArgs, "chi2_sf needs x >= 0 and df > 0");
  if (x == 0.0)
    return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

} // namespace sentshift::stats
