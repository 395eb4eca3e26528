#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "threshold_regret/sample.hpp"

namespace test_support {

using threshold_regret::Sample;

// Small random sample; x drawn from a handful of values when `ties` is set.
inline Sample random_sample(std::size_t n, std::uint64_t seed, bool ties = false,
                            bool per_unit_p = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.2, 0.8);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> level(0, 3);
  std::vector<double> y(n), x(n), p(n);
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ties ? static_cast<double>(level(rng)) : normal(rng);
    y[i] = normal(rng) + 0.5 * x[i];
    d[i] = coin(rng);
    p[i] = per_unit_p ? unif(rng) : 0.5;
  }
  if (per_unit_p) return Sample(y, d, x, p);
  return Sample(y, d, x, 0.5);
}

// Direct O(n) welfare of the rule "treat iff x > t", no shared code with
// the library.
inline double brute_welfare(const Sample& s, double t) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s.y()[i], p = s.propensity()[i];
    if (s.x()[i] > t)
      acc += s.d()[i] == 1 ? y / p : 0.0;
    else
      acc += s.d()[i] == 0 ? y / (1.0 - p) : 0.0;
  }
  return static_cast<double>(acc / static_cast<long double>(s.size()));
}

// Candidate cuts: below the minimum, midpoints of distinct adjacent order
// statistics, and above the maximum.
inline std::vector<double> candidate_cuts(const Sample& s) {
  std::vector<double> xs(s.x().begin(), s.x().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> cuts{xs.front() - 1.0};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) cuts.push_back(0.5 * (xs[i] + xs[i + 1]));
  cuts.push_back(xs.back() + 1.0);
  return cuts;
}

inline double brute_max_welfare(const Sample& s) {
  double best = -std::numeric_limits<double>::infinity();
  for (double c : candidate_cuts(s)) best = std::max(best, brute_welfare(s, c));
  return best;
}

}  // namespace test_support
