#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sentshift::stats {

class StatsError : public std::invalid_argument {
public:
  enum class Kind {
    InvalidDf,
    InvalidArgs,
    LengthMismatch,
    TooFewSamples,
    KeyMismatch,
    DegenerateTable,
    EmptySample,
    ZeroVariance,
  };

  StatsError(Kind kind, const std::string &what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

enum class Alternative { two_sided, greater, less };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;
  Alternative alternative = Alternative::two_sided;
};

using LabelCounts = std::map<std::string, long long>;

// Special functions. Target relative error is about 1e-12 over the ranges the
// tests use.

double log_gamma(double x);
/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately avoids cancellation when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
/// Regularized lower incomplete gamma P(s, x).
double gamma_p(double s, double x);
/// Regularized upper incomplete gamma Q(s, x).
double gamma_q(double s, double x);

/// P(T >= t) for Student's t with `df` degrees of freedom.
double student_t_sf(double t, double df);
/// P(X >= x) for chi-squared with `df` degrees of freedom.
double chi2_sf(double x, double df);
double normal_sf(double z);

/// Paired t-test on d_i = a_i - b_i. `greater` tests mean(a) > mean(b).
/// Differences with (numerically) zero spread follow the degenerate rule:
/// zero mean gives t = 0 and p = 1 (two-sided) or 0.5 (one-sided); a nonzero
/// mean gives p = 0 in the matching direction and 1 in the opposite one.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                         Alternative alternative = Alternative::two_sided);

/// Chi-squared homogeneity test on a 2 x K table of label counts. Columns that
/// are empty in both rows are dropped; no continuity correction.
TestResult chi_square_labels(const LabelCounts &counts_a, const LabelCounts &counts_b);

/// Exact W1 distance between two empirical distributions (sizes may differ).
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

double pearson_r(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> values);

} // namespace sentshift::stats
