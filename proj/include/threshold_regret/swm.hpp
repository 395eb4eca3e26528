#pragma once

#include <functional>
#include <vector>

#include "threshold_regret/estimate.hpp"
#include "threshold_regret/kernel.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/sample.hpp"

namespace threshold_regret {

/// The kernel-smoothed welfare gain S(t) = (1/n) sum_i g_i k((x_i - t) / sigma)
/// and its first two derivatives in t.
///
/// Units sorted by x are split into three bands: those far above t (weight
/// exactly 1, summed from a suffix table), those far below (weight 0) and a
/// window of width 2 * saturation * sigma where the kernel is evaluated.
class SmoothedObjective {
 public:
  SmoothedObjective(const Sample& sample, const Kernel& kernel, double sigma);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  double sigma() const { return sigma_; }
  double max_abs_score() const { return max_abs_g_; }

 private:
  std::pair<std::size_t, std::size_t> window(double t) const;

  const Kernel* kernel_;
  double sigma_;
  std::vector<double> xs_;
  std::vector<double> gs_;
  std::vector<double> suffix_;
  double max_abs_g_ = 0.0;
};

double smoothed_objective(const Sample& sample, const Kernel& kernel, double sigma, double t);
double smoothed_objective_derivative(const Sample& sample, const Kernel& kernel, double sigma,
                                     double t);

/// Supplies K/H/A estimates for plug-in bandwidth selection.
using NuisanceProvider = std::function<NuisanceEstimates(const Sample&)>;

/// Default provider: estimate K, H, A at the EWM threshold.
NuisanceProvider ewm_plug_in_nuisance(const ParamSpace& space,
                                      const Kernel& kernel = gaussian_cdf_kernel(),
                                      const NuisanceOptions& options = {});

struct ResolvedBandwidth {
  double sigma = 0.0;
  /// n * sigma^(2h + 1).
  double lambda = 0.0;
  bool fallback = false;
  std::vector<std::string> warnings;
};

/// Turns a bandwidth rule into a concrete sigma for this sample. Plug-in
/// rules whose lambda is unusable (|A_hat| < 1e-8, K_hat <= 0, non-finite,
/// or a failed nuisance fit) fall back to sigma = sd(x) n^(-1/(2h+1)).
ResolvedBandwidth resolve_bandwidth(const Sample& sample, const Kernel& kernel,
                                    const BandwidthRule& rule, const NuisanceProvider& nuisance);

/// Smoothed Welfare Maximizer. Maximizes S(t) over `space` with a coarse
/// grid of max(201, 4 * ceil(range / sigma)) points, golden-section
/// refinement around the best grid point to 1e-8 * range, then a guarded
/// Newton polish on S'(t) = 0.
ThresholdEstimate fit_swm(const Sample& sample, const Kernel& kernel, const BandwidthRule& rule,
                          const ParamSpace& space, const NuisanceProvider& nuisance = {});

/// Maximizer of an already-built objective over `space`.
double maximize_smoothed(const SmoothedObjective& objective, const ParamSpace& space);

}  // namespace threshold_regret
