#include "sentshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sentshift::stats {

namespace {

void require_finite(std::span<const double> v, const char *what) {
  for (double x : v) {
    if (!std::isfinite(x))
      throw StatsError(StatsError::Kind::InvalidArgs, std::string(what) + " contains a non-finite value");
  }
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

struct Moments {
  double mean_x;
  double mean_y;
  double sxx;
  double syy;
  double sxy;
};

Moments centered_moments(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw StatsError(StatsError::Kind::LengthMismatch, "x and y differ in length");
  if (x.size() < 2)
    throw StatsError(StatsError::Kind::TooFewSamples, "need at least two points");
  require_finite(x, "x");
  require_finite(y, "y");
  if (is_constant(x) || is_constant(y))
    throw StatsError(StatsError::Kind::ZeroVariance, "a coordinate has zero variance");
  Moments m{mean(x), mean(y), 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

} // namespace

double mean(std::span<const double> values) {
  if (values.empty())
    throw StatsError(StatsError::Kind::EmptySample, "mean of an empty sample");
  double sum = 0.0;
  for (double v : values)
    sum += v;
  return sum / static_cast<double>(values.size());
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  if (a.size() != b.size())
    throw StatsError(StatsError::Kind::LengthMismatch, "paired samples differ in length");
  if (a.size() < 2)
    throw StatsError(StatsError::Kind::TooFewSamples, "paired t-test needs n >= 2");
  require_finite(a, "a");
  require_finite(b, "b");

  const std::size_t n = a.size();
  std::vector<double> d(n);
  double largest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    largest = std::max(largest, std::fabs(d[i]));
  }
  const double m = mean(d);
  double ss = 0.0;
  for (double v : d)
    ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TestResult r;
  r.df = static_cast<double>(n - 1);
  r.alternative = alternative;

  // Spread at rounding level counts as zero: identical differences can leave
  // a residue of a few ulps after the mean is subtracted.
  if (sd <= 1e-12 * largest || largest == 0.0) {
    if (m == 0.0) {
      r.statistic = 0.0;
      r.p_value = alternative == Alternative::two_sided ? 1.0 : 0.5;
      return r;
    }
    r.statistic = m > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    switch (alternative) {
    case Alternative::two_sided:
      r.p_value = 0.0;
      break;
    case Alternative::greater:
      r.p_value = m > 0.0 ? 0.0 : 1.0;
      break;
    case Alternative::less:
      r.p_value = m < 0.0 ? 0.0 : 1.0;
      break;
    }
    return r;
  }

  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  r.statistic = t;
  switch (alternative) {
  case Alternative::greater:
    r.p_value = student_t_sf(t, r.df);
    break;
  case Alternative::less:
    r.p_value = student_t_sf(-t, r.df);
    break;
  case Alternative::two_sided:
    r.p_value = std::min(1.0, 2.0 * std::min(student_t_sf(t, r.df), student_t_sf(-t, r.df)));
    break;
  }
  return r;
}

TestResult chi_square_labels(const LabelCounts &counts_a, const LabelCounts &counts_b) {
  if (counts_a.size() != counts_b.size())
    throw StatsError(StatsError::Kind::KeyMismatch, "label counts have different keys");
  std::vector<std::pair<double, double>> columns;
  double row_a = 0.0;
  double row_b = 0.0;
  for (auto ia = counts_a.begin(), ib = counts_b.begin(); ia != counts_a.end(); ++ia, ++ib) {
    if (ia->first != ib->first)
      throw StatsError(StatsError::Kind::KeyMismatch, "label '" + ia->first + "' is not in both count sets");
    if (ia->second < 0 || ib->second < 0)
      throw StatsError(StatsError::Kind::InvalidArgs, "negative count for '" + ia->first + "'");
    if (ia->second + ib->second == 0)
      continue;
    columns.emplace_back(static_cast<double>(ia->second), static_cast<double>(ib->second));
    row_a += static_cast<double>(ia->second);
    row_b += static_cast<double>(ib->second);
  }
  if (columns.size() < 2)
    throw StatsError(StatsError::Kind::DegenerateTable, "fewer than two labels observed");
  if (row_a == 0.0 || row_b == 0.0)
    throw StatsError(StatsError::Kind::DegenerateTable, "one version has no counts");

  const double total = row_a + row_b;
  std::vector<double> terms;
  terms.reserve(columns.size() * 2);
  for (const auto &[oa, ob] : columns) {
    const double col = oa + ob;
    const double ea = row_a * col / total;
    const double eb = row_b * col / total;
    terms.push_back((oa - ea) * (oa - ea) / ea);
    terms.push_back((ob - eb) * (ob - eb) / eb);
  }
  // Summing in sorted order makes the statistic exactly invariant under label permutation.
  std::sort(terms.begin(), terms.end());
  double stat = 0.0;
  for (double t : terms)
    stat += t;

  TestResult r;
  r.statistic = stat;
  r.df = static_cast<double>(columns.size() - 1);
  r.p_value = chi2_sf(stat, r.df);
  return r;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw StatsError(StatsError::Kind::EmptySample, "wasserstein_1d needs non-empty samples");
  require_finite(a, "a");
  require_finite(b, "b");

  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  // On [prev, x) the CDFs are i/na and j/nb; integrate |i*nb - j*na| / (na*nb).
  const auto na = static_cast<long double>(sa.size());
  const auto nb = static_cast<long double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  long double prev = std::min(sa.front(), sb.front());
  long double area = 0.0L;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j]))
      x = sa[i];
    else
      x = sb[j];
    const long double gap = std::fabs(static_cast<long double>(i) * nb - static_cast<long double>(j) * na);
    area += gap * (static_cast<long double>(x) - prev);
    while (i < sa.size() && sa[i] == x)
      ++i;
    while (j < sb.size() && sb[j] == x)
      ++j;
    prev = x;
  }
  return static_cast<double>(area / (na * nb));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  const Moments m = centered_moments(x, y);
  const double r = m.sxy / std::sqrt(m.sxx * m.syy);
  return std::clamp(r, -1.0, 1.0);
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
  const Moments m = centered_moments(x, y);
  LinearFit fit;
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.mean_y - fit.slope * m.mean_x;
  fit.r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
  return fit;
}

} // namespace sentshift::stats
