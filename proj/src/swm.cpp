#include "threshold_regret/swm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/ewm.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

SmoothedObjective::SmoothedObjective(const Sample& sample, const Kernel& kernel, double sigma)
    : kernel_(&kernel), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ValidationError("smoothed objective: sigma must be positive and finite");
  const std::size_t n = sample.size();
  xs_.resize(n);
  gs_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = sample.order()[k];
    xs_[k] = sample.x()[i];
    gs_[k] = treated_term(sample, i) - control_term(sample, i);
    max_abs_g_ = std::max(max_abs_g_, std::abs(gs_[k]));
  }
  suffix_.assign(n + 1, 0.0);
  CompensatedSum s;
  for (std::size_t k = n; k-- > 0;) {
    s += gs_[k];
    suffix_[k] = s.value();
  }
}

std::pair<std::size_t, std::size_t> SmoothedObjective::window(double t) const {
  const double reach = kernel_->saturation * sigma_;
  if (!std::isfinite(reach)) return {0, xs_.size()};
  const auto lo = std::lower_bound(xs_.begin(), xs_.end(), t - reach);
  const auto hi = std::upper_bound(lo, xs_.end(), t + reach);
  return {static_cast<std::size_t>(lo - xs_.begin()), static_cast<std::size_t>(hi - xs_.begin())};
}

double SmoothedObjective::value(double t) const {
  const auto [lo, hi] = window(t);
  CompensatedSum s;
  for (std::size_t k = lo; k < hi; ++k) s += gs_[k] * kernel_->k((xs_[k] - t) / sigma_);
  s += suffix_[hi];
  return s.value() / static_cast<double>(xs_.size());
}

double SmoothedObjective::derivative(double t) const {
  const auto [lo, hi] = window(t);
  CompensatedSum s;
  for (std::size_t k = lo; k < hi; ++k) s += gs_[k] * kernel_->k1((xs_[k] - t) / sigma_);
  return -s.value() / (static_cast<double>(xs_.size()) * sigma_);
}

double SmoothedObjective::second_derivative(double t) const {
  const auto [lo, hi] = window(t);
  CompensatedSum s;
  for (std::size_t k = lo; k < hi; ++k) s += gs_[k] * kernel_->k2((xs_[k] - t) / sigma_);
  return s.value() / (static_cast<double>(xs_.size()) * sigma_ * sigma_);
}

double smoothed_objective(const Sample& sample, const Kernel& kernel, double sigma, double t) {
  return SmoothedObjective(sample, kernel, sigma).value(t);
}

double smoothed_objective_derivative(const Sample& sample, const Kernel& kernel, double sigma,
                                     double t) {
  return SmoothedObjective(sample, kernel, sigma).derivative(t);
}

NuisanceProvider ewm_plug_in_nuisance(const ParamSpace& space, const Kernel& kernel,
                                      const NuisanceOptions& options) {
  return [space, kernel, options](const Sample& sample) {
    const ThresholdEstimate ewm = fit_ewm(sample, space);
    return estimate_khA(sample, ewm.t_hat, kernel, options);
  };
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double plug_in_lambda(const Sample& sample, const Kernel& kernel, const NuisanceProvider& nuisance,
                      ResolvedBandwidth& out) {
  const int h = kernel.order;
  const double fallback_lambda = std::pow(standard_deviation(sample.x()), 2.0 * h + 1.0);
  auto fall_back = [&](const std::string& why) {
    out.fallback = true;
    out.warnings.push_back("plug-in bandwidth unusable (" + why +
                           "); using sd(x) * n^(-1/(2h+1))");
    return fallback_lambda;
  };
  NuisanceEstimates est;
  try {
    est = nuisance ? nuisance(sample) : ewm_plug_in_nuisance(ParamSpace::around(sample), kernel)(sample);
  } catch (const NumericError& e) {
    return fall_back(e.what());
  }
  if (!(std::abs(est.a_hat) >= 1e-8)) return fall_back("|A_hat| < 1e-8");
  if (!(est.k_hat > 0.0)) return fall_back("K_hat <= 0");
  const OptimalBandwidth opt = optimal_bandwidth(est, kernel, sample.size());
  if (opt.degenerate || !std::isfinite(opt.lambda_star) || !(opt.lambda_star > 0.0))
    return fall_back("lambda* not positive and finite");
  return opt.lambda_star;
}

}  // namespace

ResolvedBandwidth resolve_bandwidth(const Sample& sample, const Kernel& kernel,
                                    const BandwidthRule& rule, const NuisanceProvider& nuisance) {
  validate_rule(rule);
  const std::size_t n = sample.size();
  const int h = kernel.order;
  ResolvedBandwidth out;
  std::visit(overloaded{
                 [&](const FixedBandwidth& r) { out.sigma = r.sigma; },
                 [&](const LambdaRate& r) { out.sigma = sigma_from_lambda(r.lambda, n, r.order); },
                 [&](const PlugInOptimal&) {
                   out.sigma = sigma_from_lambda(plug_in_lambda(sample, kernel, nuisance, out), n, h);
                 },
                 [&](const Undersmoothed& r) {
                   const double base =
                       r.lambda ? *r.lambda : plug_in_lambda(sample, kernel, nuisance, out);
                   out.sigma = sigma_from_lambda(base, n, h) *
                               std::pow(static_cast<double>(n), -r.exponent_shrink);
                 },
             },
             rule);
  if (!(out.sigma > 0.0) || !std::isfinite(out.sigma))
    throw NumericError("resolved bandwidth is not positive and finite");
  out.lambda = static_cast<double>(n) * std::pow(out.sigma, 2.0 * h + 1.0);
  return out;
}

double maximize_smoothed(const SmoothedObjective& objective, const ParamSpace& space) {
  constexpr std::size_t kMaxGrid = 200001;
  const double range = space.range();
  const double per_sigma = std::ceil(range / objective.sigma()) * 4.0;
  const std::size_t points =
      static_cast<std::size_t>(std::clamp(per_sigma, 201.0, static_cast<double>(kMaxGrid)));
  const double step = range / static_cast<double>(points - 1);

  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < points; ++j) {
    const double v = objective.value(space.lo + step * static_cast<double>(j));
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }

  double a = best == 0 ? space.lo : space.lo + step * static_cast<double>(best - 1);
  double b = best + 1 >= points ? space.hi : space.lo + step * static_cast<double>(best + 1);
  const double tol = 1e-8 * range;
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective.value(c);
  double fd = objective.value(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective.value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective.value(d);
    }
  }
  double t = 0.5 * (a + b);
  double ft = objective.value(t);
  const double grid_t = space.lo + step * static_cast<double>(best);
  if (best_value > ft) {
    t = grid_t;
    ft = best_value;
  }

  // Newton polish on the first-order condition, kept inside the bracket and
  // only accepted while it does not lower the objective.
  const double bracket_lo = best == 0 ? space.lo : grid_t - step;
  const double bracket_hi = best + 1 >= points ? space.hi : grid_t + step;
  for (int iter = 0; iter < 8; ++iter) {
    const double g1 = objective.derivative(t);
    const double g2 = objective.second_derivative(t);
    if (!(g2 < 0.0)) break;
    const double next = t - g1 / g2;
    if (!(next >= bracket_lo && next <= bracket_hi)) break;
    const double fn = objective.value(next);
    if (fn < ft) break;
    const bool converged = std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t));
    t = next;
    ft = fn;
    if (converged) break;
  }
  return t;
}

ThresholdEstimate fit_swm(const Sample& sample, const Kernel& kernel, const BandwidthRule& rule,
                          const ParamSpace& space, const NuisanceProvider& nuisance) {
  const ResolvedBandwidth bw = resolve_bandwidth(sample, kernel, rule, nuisance);
  const SmoothedObjective objective(sample, kernel, bw.sigma);

  ThresholdEstimate est;
  est.policy_kind = PolicyKind::Swm;
  est.n = sample.size();
  est.t_hat = maximize_smoothed(objective, space);
  est.objective_value = objective.value(est.t_hat);
  est.bandwidth = bw.sigma;
  est.lambda = bw.lambda;
  est.rule = rule;
  est.bandwidth_fallback = bw.fallback;
  est.warnings = bw.warnings;
  if (sample.has_duplicate_x()) est.warnings.emplace_back("duplicate x values present");
  return est;
}

}  // namespace threshold_regret
