#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace threshold_regret {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard normal quantile, via the inverse error function.
double normal_quantile(double p);

double mean(std::span<const double> v);
/// Unbiased sample variance (n - 1 denominator).
double variance(std::span<const double> v);
double standard_deviation(std::span<const double> v);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);
double median(std::vector<double> v);

/// Two-sample Kolmogorov-Smirnov statistic sup|F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// KS statistic between the empirical law of v and the law of -v.
double ks_symmetry(std::span<const double> v);
/// One-sample KS statistic against a continuous cdf.
double ks_one_sample(std::vector<double> v, const std::function<double(double)>& cdf);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace threshold_regret
