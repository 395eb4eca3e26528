#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace threshold_regret {

/// Smooth CDF-like weight used in place of the indicator 1{x > t}.
///
/// `k` rises from 0 at -inf to 1 at +inf; `k1`, `k2` are its first two
/// derivatives. `order` is the kernel order h: the first nonzero moment
/// of k' beyond the zeroth is the h-th. `alpha1 = int z^h k'(z) dz` and
/// `alpha2 = int k'(z)^2 dz`.
struct Kernel {
  std::string name;
  std::function<double(double)> k;
  std::function<double(double)> k1;
  std::function<double(double)> k2;
  int order = 2;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  /// |z| beyond which k(z) equals its limit to double precision and k1, k2
  /// vanish; infinity when the kernel never saturates.
  double saturation = 0.0;
};

/// Standard normal CDF kernel, order 2, alpha1 = 1, alpha2 = 1 / (2 sqrt(pi)).
Kernel gaussian_cdf_kernel();

/// h! for small h.
double factorial(int h);

// Bandwidth rules for the smoothed estimator.

struct FixedBandwidth {
  double sigma;
};
/// sigma_n = (lambda / n)^(1 / (2h + 1)).
struct LambdaRate {
  double lambda;
  int order = 2;
};
/// sigma_n from the plug-in regret-optimal lambda.
struct PlugInOptimal {};
/// sigma_n = (lambda / n)^(1 / (2h + 1)) * n^(-exponent_shrink). Without a
/// lambda the plug-in optimum is used as the base.
struct Undersmoothed {
  double exponent_shrink = 0.05;
  std::optional<double> lambda;
};

using BandwidthRule = std::variant<FixedBandwidth, LambdaRate, PlugInOptimal, Undersmoothed>;

/// Throws ValidationError on a nonpositive sigma/lambda, an order below 2 or
/// a nonpositive undersmoothing shrink.
void validate_rule(const BandwidthRule& rule);
std::string describe(const BandwidthRule& rule);

/// Bandwidth implied by lambda at sample size n for a kernel of order h.
double sigma_from_lambda(double lambda, std::size_t n, int order);

}  // namespace threshold_regret
