#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/kernel.hpp"

namespace threshold_regret {

enum class RegretLaw { EwmChernoffSquared, SwmNoncentralChiSquared };

/// Limit law of the regret of a fitted threshold, written as
/// scale * V with V = Z^2 (EWM; Z Chernoff) or V ~ chi2(1, noncentrality)
/// (SWM). Quantiles of V come from a seeded simulation held by the object.
class RegretDistribution {
 public:
  RegretLaw law() const { return law_; }
  double scale() const { return scale_; }
  /// Zero for the EWM law.
  double noncentrality() const { return noncentrality_; }
  double mean() const { return mean_; }
  double median() const { return quantile(0.5); }
  double quantile(double q) const;

  double k() const { return k_; }
  double h() const { return h_; }
  double a() const { return a_; }
  double lambda() const { return lambda_; }
  double sigma_n() const { return sigma_n_; }
  std::size_t n() const { return n_; }

 private:
  friend RegretDistribution ewm_regret_dist(double, double, std::size_t, const ChernoffTable&);
  friend RegretDistribution swm_regret_dist(double, double, double, double, const Kernel&,
                                            std::size_t, std::optional<double>, std::uint64_t,
                                            std::size_t);

  RegretLaw law_ = RegretLaw::EwmChernoffSquared;
  double scale_ = 0.0;
  double noncentrality_ = 0.0;
  double mean_ = 0.0;
  double k_ = 0.0, h_ = 0.0, a_ = 0.0, lambda_ = 0.0, sigma_n_ = 0.0;
  std::size_t n_ = 0;
  std::shared_ptr<const std::vector<double>> base_sorted_;
};

/// C^e = 2^(1/3) E[Z^2], taken from the table.
double ewm_regret_constant(const ChernoffTable& table);
/// C^s = ((2h + 1) / 2) (alpha2 / (2h))^(2h / (2h + 1)).
double swm_regret_constant(const Kernel& kernel);

/// Law of n^(-2/3) (2 K^2 / H)^(1/3) Z^2.
RegretDistribution ewm_regret_dist(double k, double h, std::size_t n, const ChernoffTable& table);

/// Law of (n sigma_n)^(-1) (alpha2 K / 2H) chi2(1, lambda A^2 / (alpha2 K))
/// with sigma_n = (lambda / n)^(1/(2h+1)) unless given explicitly (required
/// when lambda = 0). Quantiles use `draws` simulated (N(sqrt(nc), 1))^2
/// variates from `seed`.
RegretDistribution swm_regret_dist(double k, double h, double a, double lambda,
                                   const Kernel& kernel, std::size_t n,
                                   std::optional<double> sigma_n = std::nullopt,
                                   std::uint64_t seed = 7, std::size_t draws = 1000000);

/// Regret-optimal lambda* = alpha2 K / (2 h A^2).
double optimal_lambda(double k, double a, const Kernel& kernel);

/// Mean of the SWM limit law at lambda*:
/// n^(-2h/(2h+1)) |A|^(2/(2h+1)) K^(2h/(2h+1)) H^(-1) C^s.
double optimal_lambda_mean(double k, double h, double a, const Kernel& kernel, std::size_t n);

struct ComparisonReport {
  std::size_t n = 0;
  double ewm_mean = 0.0;
  double swm_mean = 0.0;
  double lambda_star = 0.0;
  /// ewm_mean / swm_mean.
  double ratio = 0.0;
  /// The same ratio from the closed form in K, H, A, C^e, C^s and n.
  double closed_form_ratio = 0.0;
};

ComparisonReport compare_policies(double k, double h, double a, const Kernel& kernel,
                                  std::size_t n, const ChernoffTable& table);

}  // namespace threshold_regret
