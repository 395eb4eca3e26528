#include "threshold_regret/inference.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <limits>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/parallel.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

const char* to_string(IntervalMethod m) {
  switch (m) {
    case IntervalMethod::EwmPlugIn: return "ewm-plugin";
    case IntervalMethod::EwmBootstrap: return "ewm-bootstrap";
    case IntervalMethod::SwmBiasCorrected: return "swm-bias-corrected";
    case IntervalMethod::SwmUndersmoothed: return "swm-undersmoothed";
  }
  return "unknown";
}

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");
}

}  // namespace

double ewm_ci_half_width(std::size_t n, double k_hat, double h_hat, double critical_value) {
  if (!(h_hat > 0.0))
    throw NumericError("H_hat must be positive for an EWM interval (got " + std::to_string(h_hat) + ")");
  if (!(k_hat > 0.0)) throw NumericError("K_hat must be positive for an EWM interval");
  return std::pow(static_cast<double>(n), -1.0 / 3.0) *
         std::pow(2.0 * std::sqrt(k_hat) / h_hat, 2.0 / 3.0) * critical_value;
}

ConfidenceInterval ewm_ci(const Sample& sample, const ThresholdEstimate& estimate,
                          const NuisanceEstimates& nuisance, const ChernoffTable& chernoff,
                          double level) {
  check_level(level);
  if (estimate.policy_kind != PolicyKind::Ewm) throw ValidationError("ewm_ci needs an EWM estimate");
  const double c = chernoff_quantile(chernoff, 1.0 - (1.0 - level) / 2.0);
  ConfidenceInterval ci;
  ci.level = level;
  ci.method = IntervalMethod::EwmPlugIn;
  ci.center = estimate.t_hat;
  ci.half_width = ewm_ci_half_width(sample.size(), nuisance.k_hat, nuisance.h_hat, c);
  ci.lo = ci.center - ci.half_width;
  ci.hi = ci.center + ci.half_width;
  return ci;
}

ConfidenceInterval BootstrapDistribution::percentile_interval(double level) const {
  check_level(level);
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - level;
  const double q_lo = quantile_sorted(sorted, alpha / 2.0);
  const double q_hi = quantile_sorted(sorted, 1.0 - alpha / 2.0);
  const double scale = std::pow(static_cast<double>(n), -1.0 / 3.0);
  ConfidenceInterval ci;
  ci.level = level;
  ci.method = IntervalMethod::EwmBootstrap;
  ci.lo = t_hat - q_hi * scale;
  ci.hi = t_hat - q_lo * scale;
  ci.center = 0.5 * (ci.lo + ci.hi);
  ci.half_width = 0.5 * (ci.hi - ci.lo);
  return ci;
}

BootstrapDistribution ewm_bootstrap(const Sample& sample, const ThresholdEstimate& estimate,
                                    double h_hat, std::size_t replications, std::uint64_t seed,
                                    unsigned jobs) {
  if (replications < 200) throw ValidationError("bootstrap needs at least 200 replications");
  if (!(h_hat > 0.0) || !std::isfinite(h_hat))
    throw NumericError("bootstrap curvature H_hat must be positive and finite");
  const std::size_t n = sample.size();
  const auto& order = sample.order();
  const auto x = sample.x();
  if (x[order.front()] == x[order.back()])
    throw NumericError("bootstrap: all x values are identical");

  // Sorted scores and boundaries of distinct-x groups.
  std::vector<double> g_sorted(n);
  for (std::size_t k = 0; k < n; ++k)
    g_sorted[k] = treated_term(sample, order[k]) - control_term(sample, order[k]);
  std::vector<std::size_t> group_start;
  for (std::size_t k = 0; k < n; ++k)
    if (k == 0 || x[order[k]] != x[order[k - 1]]) group_start.push_back(k);
  // position_of[i] = sorted rank of unit i.
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;

  const double t_hat = estimate.t_hat;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double root = std::cbrt(static_cast<double>(n));
  constexpr double inf = std::numeric_limits<double>::infinity();

  BootstrapDistribution out;
  out.t_hat = t_hat;
  out.h_hat = h_hat;
  out.n = n;
  out.seed = seed;
  out.draws.resize(replications);

  parallel_for(replications, jobs, [&](std::size_t b) {
    Engine engine = make_engine(derive_seed(seed, {b}));
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<int> counts(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[rank[pick(engine)]];

    // step[s] = weight of all units above the s-th cut; walk cuts upward.
    CompensatedSum total;
    for (std::size_t k = 0; k < n; ++k) total += (counts[k] - 1) * g_sorted[k];
    double above = total.value();
    double best_value = -inf;
    double best_t = t_hat;
    const std::size_t groups = group_start.size();
    std::size_t k = 0;
    for (std::size_t s = 0; s <= groups; ++s) {
      // Segment s: below group s (s = 0 is below min x).
      const double seg_lo = s == 0 ? -inf : x[order[group_start[s - 1]]];
      const double seg_hi = s == groups ? inf : x[order[group_start[s]]];
      const double t = std::clamp(t_hat, seg_lo, seg_hi);
      const double value = above * inv_n - 0.5 * h_hat * (t - t_hat) * (t - t_hat);
      if (value > best_value) {
        best_value = value;
        best_t = t;
      }
      if (s < groups) {
        const std::size_t end = s + 1 < groups ? group_start[s + 1] : n;
        for (; k < end; ++k) above -= (counts[k] - 1) * g_sorted[k];
      }
    }
    out.draws[b] = root * (best_t - t_hat);
  });
  return out;
}

ConfidenceInterval swm_ci(const Sample& sample, const ThresholdEstimate& estimate,
                          const NuisanceEstimates& nuisance, const Kernel& kernel, double lambda,
                          double level, SwmIntervalMode mode) {
  check_level(level);
  if (estimate.policy_kind != PolicyKind::Swm || !estimate.bandwidth)
    throw ValidationError("swm_ci needs an SWM estimate with a recorded bandwidth");
  const bool undersmoothed_rule = estimate.rule && std::holds_alternative<Undersmoothed>(*estimate.rule);
  if (mode == SwmIntervalMode::Undersmoothed && !undersmoothed_rule)
    throw ValidationError("undersmoothed interval requires an undersmoothed bandwidth rule");
  if (mode == SwmIntervalMode::BiasCorrected && undersmoothed_rule)
    throw ValidationError("bias-corrected interval requires a non-undersmoothed bandwidth rule");
  if (!(nuisance.h_hat > 0.0))
    throw NumericError("H_hat must be positive for an SWM interval (got " +
                       std::to_string(nuisance.h_hat) + ")");
  if (!(nuisance.k_hat > 0.0)) throw NumericError("K_hat must be positive for an SWM interval");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");

  const double root = std::sqrt(static_cast<double>(sample.size()) * *estimate.bandwidth);
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  ConfidenceInterval ci;
  ci.level = level;
  ci.method = mode == SwmIntervalMode::BiasCorrected ? IntervalMethod::SwmBiasCorrected
                                                     : IntervalMethod::SwmUndersmoothed;
  ci.center = estimate.t_hat;
  ci.bias_correction =
      mode == SwmIntervalMode::BiasCorrected ? std::sqrt(lambda) * nuisance.a_hat / (root * nuisance.h_hat) : 0.0;
  ci.half_width = std::sqrt(kernel.alpha2 * nuisance.k_hat) / (root * nuisance.h_hat) * z;
  ci.lo = ci.center - ci.bias_correction - ci.half_width;
  ci.hi = ci.center - ci.bias_correction + ci.half_width;
  return ci;
}

}  // namespace threshold_regret
