#include "threshold_regret/chernoff.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/parallel.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

ChernoffTable::ChernoffTable(std::vector<double> draws, const ChernoffConfig& config)
    : config_(config), samples_(std::move(draws)) {
  if (samples_.empty()) throw ValidationError("Chernoff table needs at least one draw");
  sorted_ = samples_;
  std::sort(sorted_.begin(), sorted_.end());
  sorted_sq_.resize(samples_.size());
  std::transform(samples_.begin(), samples_.end(), sorted_sq_.begin(), [](double z) { return z * z; });
  std::sort(sorted_sq_.begin(), sorted_sq_.end());
  mean_ = threshold_regret::mean(samples_);
  second_moment_ = threshold_regret::mean(sorted_sq_);
}

double ChernoffTable::standard_deviation() const { return threshold_regret::standard_deviation(samples_); }

double ChernoffTable::quantile(double q) const { return quantile_sorted(sorted_, q); }

double ChernoffTable::square_quantile(double q) const { return quantile_sorted(sorted_sq_, q); }

namespace {

struct WingBest {
  double value;
  std::size_t index;  // grid steps from 0
};

// Walks one wing outward; strict improvement keeps the point nearest 0 on ties.
WingBest walk_wing(Engine& engine, boost::random::normal_distribution<double>& normal,
                   std::size_t steps, double step, double sd) {
  WingBest best{0.0, 0};
  double b = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    b += sd * normal(engine);
    const double r = static_cast<double>(i) * step;
    const double v = b - r * r;
    if (v > best.value) best = {v, i};
  }
  return best;
}

struct WingPair {
  WingBest fine;
  WingBest coarse;
};

WingPair walk_wing_pair(Engine& engine, boost::random::normal_distribution<double>& normal,
                        std::size_t steps, double step, double sd, std::size_t factor) {
  WingPair best{{0.0, 0}, {0.0, 0}};
  double b = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    b += sd * normal(engine);
    const double r = static_cast<double>(i) * step;
    const double v = b - r * r;
    if (v > best.fine.value) best.fine = {v, i};
    if (i % factor == 0 && v > best.coarse.value) best.coarse = {v, i};
  }
  return best;
}

double pick_side(const WingBest& right, const WingBest& left, double step) {
  if (right.value > left.value) return static_cast<double>(right.index) * step;
  if (left.value > right.value) return -static_cast<double>(left.index) * step;
  // equal values: nearer to 0 wins, then the negative side
  return right.index < left.index ? static_cast<double>(right.index) * step
                                  : -static_cast<double>(left.index) * step;
}

}  // namespace

ChernoffTable simulate_chernoff_unchecked(const ChernoffConfig& config) {
  if (config.n_paths == 0 || !(config.grid_step > 0.0) || !(config.domain_halfwidth > 0.0))
    throw ValidationError("Chernoff simulation needs positive paths, step and halfwidth");
  const auto steps = static_cast<std::size_t>(std::llround(config.domain_halfwidth / config.grid_step));
  const double sd = std::sqrt(config.grid_step);
  std::vector<double> draws(config.n_paths);
  parallel_for(config.n_paths, config.jobs, [&](std::size_t path) {
    Engine engine = make_engine(derive_seed(config.seed, {path}));
    boost::random::normal_distribution<double> normal;
    const WingBest right = walk_wing(engine, normal, steps, config.grid_step, sd);
    const WingBest left = walk_wing(engine, normal, steps, config.grid_step, sd);
    draws[path] = pick_side(right, left, config.grid_step);
  });
  return ChernoffTable(std::move(draws), config);
}

ChernoffRefinement simulate_chernoff_refinement(const ChernoffConfig& config, std::size_t factor) {
  if (factor < 2) throw ValidationError("Chernoff refinement factor must be >= 2");
  if (config.n_paths == 0 || !(config.grid_step > 0.0) || !(config.domain_halfwidth > 0.0))
    throw ValidationError("Chernoff simulation needs positive paths, step and halfwidth");
  auto steps = static_cast<std::size_t>(std::llround(config.domain_halfwidth / config.grid_step));
  steps -= steps % factor;
  const double sd = std::sqrt(config.grid_step);
  std::vector<double> fine(config.n_paths), coarse(config.n_paths);
  parallel_for(config.n_paths, config.jobs, [&](std::size_t path) {
    Engine engine = make_engine(derive_seed(config.seed, {path}));
    boost::random::normal_distribution<double> normal;
    const WingPair right = walk_wing_pair(engine, normal, steps, config.grid_step, sd, factor);
    const WingPair left = walk_wing_pair(engine, normal, steps, config.grid_step, sd, factor);
    fine[path] = pick_side(right.fine, left.fine, config.grid_step);
    coarse[path] = pick_side(right.coarse, left.coarse, config.grid_step);
  });
  ChernoffConfig coarse_config = config;
  coarse_config.grid_step = config.grid_step * static_cast<double>(factor);
  return {ChernoffTable(std::move(fine), config), ChernoffTable(std::move(coarse), coarse_config)};
}

ChernoffTable simulate_chernoff(const ChernoffConfig& config) {
  if (config.domain_halfwidth < 2.0) throw ValidationError("Chernoff domain_halfwidth must be >= 2");
  if (config.grid_step > 1e-3) throw ValidationError("Chernoff grid_step must be <= 1e-3");
  if (config.n_paths < 10000) throw ValidationError("Chernoff n_paths must be >= 10000");
  return simulate_chernoff_unchecked(config);
}

double chernoff_quantile(const ChernoffTable& table, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("chernoff_quantile: q must lie in (0,1)");
  return table.quantile(q);
}

}  // namespace threshold_regret
