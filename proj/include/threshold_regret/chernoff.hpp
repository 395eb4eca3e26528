#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace threshold_regret {

struct ChernoffConfig {
  std::size_t n_paths = 200000;
  double domain_halfwidth = 2.5;
  double grid_step = 5e-4;
  std::uint64_t seed = 20240101;
  /// Worker threads, 0 = all cores. Results do not depend on this.
  unsigned jobs = 0;
};

/// Monte Carlo law of Z = argmax_r (B(r) - r^2) for a two-sided standard
/// Brownian motion B with B(0) = 0.
class ChernoffTable {
 public:
  ChernoffTable(std::vector<double> draws, const ChernoffConfig& config);

  /// Draws in path order (path i always lands at index i).
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& sorted() const { return sorted_; }
  /// Z^2 draws, sorted.
  const std::vector<double>& sorted_squares() const { return sorted_sq_; }

  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  double standard_deviation() const;
  /// Empirical quantile of Z.
  double quantile(double q) const;
  /// Empirical quantile of Z^2.
  double square_quantile(double q) const;

  double grid_step() const { return config_.grid_step; }
  double domain_halfwidth() const { return config_.domain_halfwidth; }
  std::size_t n_paths() const { return samples_.size(); }
  std::uint64_t seed() const { return config_.seed; }
  const ChernoffConfig& config() const { return config_; }

 private:
  ChernoffConfig config_;
  std::vector<double> samples_;
  std::vector<double> sorted_;
  std::vector<double> sorted_sq_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

/// Simulates n_paths independent paths on the grid {-m, ..., m} * grid_step
/// (m = round(halfwidth / step)). Each wing is a cumulative sum of
/// N(0, grid_step) increments from B(0) = 0; Z is the grid point maximizing
/// B(r) - r^2, ties going to the point nearest 0 and then to the smaller r.
/// Path i draws from its own stream derive_seed(seed, {i}).
/// Requires halfwidth >= 2, step <= 1e-3, n_paths >= 1e4.
ChernoffTable simulate_chernoff(const ChernoffConfig& config);

/// Same simulation without the parameter floor; for tests and quick previews.
ChernoffTable simulate_chernoff_unchecked(const ChernoffConfig& config);

struct ChernoffRefinement {
  ChernoffTable fine;
  /// Same paths read only at every factor-th grid point.
  ChernoffTable coarse;
};

/// Runs the paths of `config` once and takes the argmax both on the full grid
/// and on the grid coarsened by `factor` (common random numbers, so the
/// difference isolates discretization error).
ChernoffRefinement simulate_chernoff_refinement(const ChernoffConfig& config, std::size_t factor = 2);

/// q-quantile of Z for q in (0,1); the two-sided critical value at level
/// 1 - alpha is chernoff_quantile(table, 1 - alpha / 2).
double chernoff_quantile(const ChernoffTable& table, double q);

}  // namespace threshold_regret
