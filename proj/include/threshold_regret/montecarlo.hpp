#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/kernel.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/sample.hpp"

namespace threshold_regret {

struct AsymptoticConstants {
  double k = 0.0;
  double h = 0.0;
  double a = 0.0;
};

/// Simulation design
///   X ~ N(0,1), Y1 = X^3 + beta2 X^2 + beta1 X + e1, Y0 ~ N(0, sd0^2),
///   e1 ~ N(0, sd1^2), D ~ Bernoulli(p), Y = D Y1 + (1 - D) Y0,
/// whose welfare-optimal threshold is 0 when x^2 + beta2 x + beta1 > 0.
struct Dgp {
  std::string name;
  double beta1 = 1.0;
  double beta2 = -0.5;
  double p = 0.5;
  double noise_sd_treated = 1.0;
  double noise_sd_control = 1.0;
  double t_star = 0.0;

  /// Both noise terms with standard deviation gamma.
  static Dgp with_gamma(std::string name, double gamma, double beta1, double beta2, double p);
  /// gamma = 1, beta1 = 1, beta2 = -0.5, p = 0.5.
  static Dgp model1();
  /// gamma = 3, beta1 = 0.5, beta2 = -1, p = 0.5.
  static Dgp model2();
  /// Model 2 with the treated noise variance equal to gamma (not gamma^2),
  /// the only reading under which K = 24 phi(0) ~ 9.575 as tabulated.
  static Dgp model2_tabulated();
  static Dgp model(int id);

  /// E[(Y1 - Y0) 1{X > t}] in closed form (E[Y0] = 0).
  double welfare(double t) const;
  double cate(double x) const { return x * x * x + beta2 * x * x + beta1 * x; }
  /// True K, H, A at t* = 0 for the Gaussian CDF kernel (alpha1 = 1, h = 2).
  AsymptoticConstants constants() const;
};

double closed_form_welfare(const Dgp& dgp, double t);

/// n units from the design; identical output for identical (dgp, n, seed).
Sample draw_sample(const Dgp& dgp, std::size_t n, std::uint64_t seed);

enum class Variant { Ewm, SwmInfeasible, SwmFeasible };
const char* to_string(Variant v);

struct ExperimentConfig {
  int model_id = 1;
  Dgp dgp = Dgp::model1();
  std::vector<std::size_t> n_list{500, 1000, 2000, 3000};
  std::size_t replications = 5000;
  std::uint64_t seed = 42;
  std::vector<Variant> variants{Variant::Ewm, Variant::SwmInfeasible, Variant::SwmFeasible};
  unsigned jobs = 0;
  /// Keep per-replication regrets and thresholds in the result.
  bool retain_samples = false;
  NuisanceOptions nuisance;
};

/// Replication b at size n uses derive_seed(seed, {model_id, n, b}).
std::uint64_t replication_seed(const ExperimentConfig& config, std::size_t n, std::size_t rep);

struct CellResult {
  std::size_t n = 0;
  Variant variant = Variant::Ewm;
  std::size_t completed = 0;
  std::size_t failures = 0;
  /// SWM-feasible replications that used the fallback bandwidth.
  std::size_t fallbacks = 0;
  double mean_regret = 0.0;
  double median_regret = 0.0;
  double standard_error = 0.0;
  /// Replication order; NaN marks a failed replication. Empty unless retained.
  std::vector<double> regrets;
  std::vector<double> thresholds;
  std::vector<double> bandwidths;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;

  const CellResult* find(std::size_t n, Variant v) const;
  /// EWM mean regret / feasible SWM mean regret at n; nullopt if missing.
  std::optional<double> ratio(std::size_t n) const;
  std::optional<double> median_ratio(std::size_t n) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

enum class TableFormat { Text, Csv };

/// Asymptotic mean regrets (x 1e4) of both policies with K, H, A.
std::string asymptotic_table(int model_id, const AsymptoticConstants& constants,
                             const std::vector<std::size_t>& n_list, const ChernoffTable& chernoff,
                             const Kernel& kernel, TableFormat format);

/// Finite-sample vs asymptotic mean (statistic = "mean") or median
/// (statistic = "median") regrets, x 1e4, with the EWM / feasible-SWM ratio.
std::string regret_table(const ExperimentResult& result, const ChernoffTable& chernoff,
                         const Kernel& kernel, const std::string& statistic, TableFormat format);

}  // namespace threshold_regret
