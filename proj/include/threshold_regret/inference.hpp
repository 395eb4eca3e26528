#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/estimate.hpp"
#include "threshold_regret/kernel.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/sample.hpp"

namespace threshold_regret {

enum class IntervalMethod { EwmPlugIn, EwmBootstrap, SwmBiasCorrected, SwmUndersmoothed };

const char* to_string(IntervalMethod m);

/// Confidence interval for the optimal threshold. For the bias-corrected
/// interval lo = center - bias_correction - half_width and
/// hi = center - bias_correction + half_width; other methods have
/// bias_correction = 0 and center at the interval midpoint.
struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::EwmPlugIn;
  double center = 0.0;
  double half_width = 0.0;
  double bias_correction = 0.0;

  bool covers(double t) const { return lo <= t && t <= hi; }
};

/// t_hat +- n^(-1/3) (2 sqrt(K_hat) / H_hat)^(2/3) c, with c the
/// (1 - alpha/2) quantile of the Chernoff law.
ConfidenceInterval ewm_ci(const Sample& sample, const ThresholdEstimate& estimate,
                          const NuisanceEstimates& nuisance, const ChernoffTable& chernoff,
                          double level);

/// Half-width of ewm_ci for a given critical value.
double ewm_ci_half_width(std::size_t n, double k_hat, double h_hat, double critical_value);

/// Reshaped bootstrap law of n^(1/3) (t_boot - t_hat).
struct BootstrapDistribution {
  std::vector<double> draws;  ///< replicate order
  double t_hat = 0.0;
  double h_hat = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  /// Percentile interval [t_hat - q_hi n^(-1/3), t_hat - q_lo n^(-1/3)].
  ConfidenceInterval percentile_interval(double level) const;
};

/// Each replicate resamples n rows with replacement and maximizes
///   (1/n) sum_i (c_i - 1) g_i 1{x_i > t} - H_hat (t - t_hat)^2 / 2
/// (c_i = resample count of unit i), the bootstrap welfare gain minus the
/// original-sample gain with the estimated curvature restored. The step part
/// is constant between distinct x, so on each segment the penalty alone
/// picks the point nearest t_hat; the search over segments is exact.
/// Replicate b uses derive_seed(seed, {b}).
BootstrapDistribution ewm_bootstrap(const Sample& sample, const ThresholdEstimate& estimate,
                                    double h_hat, std::size_t replications, std::uint64_t seed,
                                    unsigned jobs = 0);

enum class SwmIntervalMode { BiasCorrected, Undersmoothed };

/// Normal-approximation interval around the SWM threshold. Bias-corrected:
/// center t_hat - b, b = (n sigma)^(-1/2) lambda^(1/2) A_hat / H_hat.
/// Undersmoothed: requires an Undersmoothed bandwidth rule; b = 0.
/// Half-width (n sigma)^(-1/2) sqrt(alpha2 K_hat) / H_hat * z_(1 - alpha/2).
ConfidenceInterval swm_ci(const Sample& sample, const ThresholdEstimate& estimate,
                          const NuisanceEstimates& nuisance, const Kernel& kernel, double lambda,
                          double level, SwmIntervalMode mode);

}  // namespace threshold_regret
