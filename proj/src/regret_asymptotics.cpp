#include "threshold_regret/regret_asymptotics.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(name) + " must be positive and finite");
}

}  // namespace

double RegretDistribution::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("regret quantile: q must lie in (0,1)");
  return scale_ * quantile_sorted(*base_sorted_, q);
}

double ewm_regret_constant(const ChernoffTable& table) {
  return std::cbrt(2.0) * table.second_moment();
}

double swm_regret_constant(const Kernel& kernel) {
  const double h = kernel.order;
  return 0.5 * (2.0 * h + 1.0) * std::pow(kernel.alpha2 / (2.0 * h), 2.0 * h / (2.0 * h + 1.0));
}

RegretDistribution ewm_regret_dist(double k, double h, std::size_t n, const ChernoffTable& table) {
  require_positive(k, "K");
  require_positive(h, "H");
  if (n == 0) throw ValidationError("n must be positive");
  RegretDistribution out;
  out.law_ = RegretLaw::EwmChernoffSquared;
  out.k_ = k;
  out.h_ = h;
  out.n_ = n;
  out.scale_ = std::pow(static_cast<double>(n), -2.0 / 3.0) * std::cbrt(2.0 * k * k / h);
  out.mean_ = out.scale_ * table.second_moment();
  out.base_sorted_ = std::make_shared<const std::vector<double>>(table.sorted_squares());
  return out;
}

RegretDistribution swm_regret_dist(double k, double h, double a, double lambda,
                                   const Kernel& kernel, std::size_t n,
                                   std::optional<double> sigma_n, std::uint64_t seed,
                                   std::size_t draws) {
  require_positive(k, "K");
  require_positive(h, "H");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be nonnegative and finite");
  if (n == 0) throw ValidationError("n must be positive");
  if (draws < 1000) throw ValidationError("need at least 1000 noncentral chi-square draws");
  const double sigma = sigma_n ? *sigma_n : sigma_from_lambda(lambda, n, kernel.order);
  if (!(sigma > 0.0))
    throw ValidationError("sigma_n must be positive; pass it explicitly when lambda = 0");

  RegretDistribution out;
  out.law_ = RegretLaw::SwmNoncentralChiSquared;
  out.k_ = k;
  out.h_ = h;
  out.a_ = a;
  out.lambda_ = lambda;
  out.sigma_n_ = sigma;
  out.n_ = n;
  out.scale_ = kernel.alpha2 * k / (2.0 * h * static_cast<double>(n) * sigma);
  out.noncentrality_ = lambda * a * a / (kernel.alpha2 * k);
  out.mean_ = out.scale_ * (1.0 + out.noncentrality_);

  Engine engine = make_engine(derive_seed(seed, {0x6e63636869ULL}));
  boost::random::normal_distribution<double> normal(std::sqrt(out.noncentrality_), 1.0);
  auto base = std::make_shared<std::vector<double>>(draws);
  for (double& v : *base) {
    const double z = normal(engine);
    v = z * z;
  }
  std::sort(base->begin(), base->end());
  out.base_sorted_ = std::move(base);
  return out;
}

double optimal_lambda(double k, double a, const Kernel& kernel) {
  if (a == 0.0) throw ValidationError("optimal lambda undefined for A = 0");
  return kernel.alpha2 * k / (2.0 * kernel.order * a * a);
}

double optimal_lambda_mean(double k, double h, double a, const Kernel& kernel, std::size_t n) {
  require_positive(k, "K");
  require_positive(h, "H");
  if (a == 0.0) throw ValidationError("optimal_lambda_mean requires A != 0");
  const double order = kernel.order;
  const double denom = 2.0 * order + 1.0;
  return std::pow(static_cast<double>(n), -2.0 * order / denom) * std::pow(std::abs(a), 2.0 / denom) *
         std::pow(k, 2.0 * order / denom) / h * swm_regret_constant(kernel);
}

ComparisonReport compare_policies(double k, double h, double a, const Kernel& kernel,
                                  std::size_t n, const ChernoffTable& table) {
  ComparisonReport out;
  out.n = n;
  out.ewm_mean = ewm_regret_dist(k, h, n, table).mean();
  out.lambda_star = optimal_lambda(k, a, kernel);
  out.swm_mean = optimal_lambda_mean(k, h, a, kernel, n);
  out.ratio = out.ewm_mean / out.swm_mean;
  const double order = kernel.order;
  const double rate = 2.0 * order / (2.0 * order + 1.0);
  out.closed_form_ratio = std::pow(h, 2.0 / 3.0) /
                          (std::pow(std::abs(a), 2.0 / (2.0 * order + 1.0)) *
                           std::pow(k, rate - 2.0 / 3.0)) *
                          (ewm_regret_constant(table) / swm_regret_constant(kernel)) *
                          std::pow(static_cast<double>(n), rate - 2.0 / 3.0);
  return out;
}

}  // namespace threshold_regret
