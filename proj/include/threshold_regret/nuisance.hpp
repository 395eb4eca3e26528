#pragma once

#include <cstddef>
#include <span>

#include "threshold_regret/kernel.hpp"
#include "threshold_regret/sample.hpp"

namespace threshold_regret {

/// Plug-in estimates of the constants driving both limit laws, evaluated at
/// a candidate threshold:
///   K = f(t) (E[Y1^2 | t] / p + E[Y0^2 | t] / (1 - p)),
///   H = f(t) (nu1'(t) - nu0'(t)),
///   A = -(alpha1 / h!) (2 f'(t) (nu1' - nu0') + f(t) (nu1'' - nu0'')),
/// with nu_j(x) = E[Y | X = x, D = j].
struct NuisanceEstimates {
  double k_hat = 0.0;
  double h_hat = 0.0;
  double a_hat = 0.0;
  double eval_point = 0.0;
  double kde_bandwidth = 0.0;
  /// Regression bandwidth of the treated arm; the control arm's is below.
  double reg_bandwidth = 0.0;
  double reg_bandwidth_control = 0.0;
};

struct NuisanceOptions {
  /// Rule-of-thumb multiplier: kde bandwidth = scale * sd * n^(-1/5), and
  /// n^(-1/7) for the density derivative.
  double kde_scale = 1.06;
  /// Regression bandwidth = reg_scale * kde_scale * sd_j * n_j^(-1/5) per arm.
  double reg_scale = 1.5;
  /// Widen the derivative fits to the n_j^(-1/7) (first) and n_j^(-1/9)
  /// (second derivative) rates, same multiplier.
  bool derivative_rates = true;
  /// Polynomial degree for the conditional-mean derivative fits.
  int mean_degree = 3;
  /// Polynomial degree for the conditional second moment fit.
  int second_moment_degree = 1;
  /// Minimum Kish effective sample size of the kernel weights in each arm.
  double min_effective_obs = 10.0;
};

/// Gaussian kernel density estimate of f (derivative = 0) or f' (derivative = 1).
double kde(std::span<const double> x, double point, double bandwidth, int derivative = 0);

/// Gaussian-weighted local polynomial regression of y on x at `point`;
/// returns the derivative-th derivative of the fitted polynomial at point
/// (derivative! times that coefficient). Throws InsufficientLocalData when
/// the weighted design is rank deficient.
double local_poly(std::span<const double> x, std::span<const double> y, double point,
                  double bandwidth, int degree, int derivative);

/// Silverman's rule of thumb 1.06 * sd * n^(-1/5).
double silverman_bandwidth(std::span<const double> x);

NuisanceEstimates estimate_khA(const Sample& sample, double t_eval,
                               const Kernel& kernel = gaussian_cdf_kernel(),
                               const NuisanceOptions& options = {});

struct OptimalBandwidth {
  double lambda_star = 0.0;
  double sigma_star = 0.0;
  /// K_hat = 0: both constants are zero and unusable as a bandwidth.
  bool degenerate = false;
};

/// lambda* = alpha2 K / (2 h A^2), sigma* = (lambda* / n)^(1 / (2h + 1)).
OptimalBandwidth optimal_bandwidth(const NuisanceEstimates& nuisance, const Kernel& kernel,
                                   std::size_t n);

}  // namespace threshold_regret
