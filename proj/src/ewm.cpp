#include "threshold_regret/ewm.hpp"

#include <algorithm>
#include <limits>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

namespace {

struct Cut {
  double lo;  // segment [lo, hi) of thresholds sharing this objective value
  double hi;
  double value;
};

}  // namespace

ThresholdEstimate fit_ewm(const Sample& sample, const ParamSpace& space) {
  const std::size_t n = sample.size();
  const auto& order = sample.order();
  const auto x = sample.x();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Group boundaries: positions k where sorted x changes, plus 0 and n.
  std::vector<std::size_t> bounds{0};
  for (std::size_t k = 1; k < n; ++k)
    if (x[order[k]] != x[order[k - 1]]) bounds.push_back(k);
  bounds.push_back(n);

  // prefix[k] = sum of control terms of the first k sorted units.
  std::vector<double> prefix(n + 1), suffix(n + 1);
  {
    CompensatedSum s;
    prefix[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s += control_term(sample, order[k]);
      prefix[k + 1] = s.value();
    }
    CompensatedSum r;
    suffix[n] = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      r += treated_term(sample, order[k]);
      suffix[k] = r.value();
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<Cut> cuts;
  cuts.reserve(bounds.size());
  for (std::size_t b = 0; b < bounds.size(); ++b) {
    const std::size_t k = bounds[b];  // first k sorted units untreated
    const double seg_lo = k == 0 ? -inf : x[order[k - 1]];
    const double seg_hi = k == n ? inf : x[order[k]];
    cuts.push_back({seg_lo, seg_hi, (prefix[k] + suffix[k]) * inv_n});
  }

  // Restrict to segments meeting the parameter space.
  double best = -inf;
  std::vector<char> admissible(cuts.size(), 0);
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const double lo = std::max(cuts[c].lo, space.lo);
    const double hi = std::min(cuts[c].hi, space.hi);
    if (lo < hi || (lo == hi && cuts[c].lo == lo)) {
      admissible[c] = 1;
      best = std::max(best, cuts[c].value);
    }
  }
  if (best == -inf) throw NumericError("fit_ewm: no cut intersects the parameter space");

  // First run of consecutive maximizing cuts.
  std::size_t first = 0;
  while (!(admissible[first] && cuts[first].value == best)) ++first;
  std::size_t last = first;
  while (last + 1 < cuts.size() && admissible[last + 1] && cuts[last + 1].value == best) ++last;

  const double lo = std::max(cuts[first].lo, space.lo);
  const double hi = std::min(cuts[last].hi, space.hi);

  ThresholdEstimate est;
  est.policy_kind = PolicyKind::Ewm;
  est.n = n;
  est.maximizing_interval = std::make_pair(lo, hi);
  est.t_hat = space.clamp(0.5 * (lo + hi));
  est.objective_value = best;
  if (bounds.size() == 2) est.warnings.emplace_back("all x values are identical");
  if (sample.has_duplicate_x()) est.warnings.emplace_back("duplicate x values present");
  return est;
}

}  // namespace threshold_regret
