#pragma once

#include "threshold_regret/estimate.hpp"
#include "threshold_regret/sample.hpp"

namespace threshold_regret {

/// Empirical Welfare Maximizer: exact argmax of empirical_welfare over t.
///
/// The objective is a step function that can only change at observed x, so
/// every cut (below min x, between adjacent distinct order statistics, above
/// max x) is scored in one sorted pass using compensated prefix sums of the
/// control terms and suffix sums of the treated terms. Adjacent maximizing
/// cuts are merged into one segment; among disjoint maximizing segments the
/// lowest is kept. t_hat is the midpoint of that segment after intersecting
/// it with `space`. O(n log n) (the sort is cached in Sample).
ThresholdEstimate fit_ewm(const Sample& sample, const ParamSpace& space);

}  // namespace threshold_regret
