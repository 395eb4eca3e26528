#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "threshold_regret/kernel.hpp"

namespace threshold_regret {

enum class PolicyKind { Ewm, Swm };

inline const char* to_string(PolicyKind k) { return k == PolicyKind::Ewm ? "ewm" : "swm"; }

/// A fitted threshold with the metadata of the estimator that produced it.
struct ThresholdEstimate {
  double t_hat = 0.0;
  PolicyKind policy_kind = PolicyKind::Ewm;
  double objective_value = 0.0;
  /// EWM only: the maximizing segment [lo, hi) of the welfare step function,
  /// intersected with the parameter space.
  std::optional<std::pair<double, double>> maximizing_interval;
  /// SWM only.
  std::optional<double> bandwidth;
  std::optional<double> lambda;
  std::optional<BandwidthRule> rule;
  std::size_t n = 0;
  std::vector<std::string> warnings;
  /// The plug-in bandwidth was unusable and the fallback bandwidth was used.
  bool bandwidth_fallback = false;
};

}  // namespace threshold_regret
