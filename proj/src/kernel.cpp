#include "threshold_regret/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

Kernel gaussian_cdf_kernel() {
  Kernel kernel;
  kernel.name = "gaussian_cdf";
  kernel.k = [](double z) { return normal_cdf(z); };
  kernel.k1 = [](double z) { return normal_pdf(z); };
  kernel.k2 = [](double z) { return -z * normal_pdf(z); };
  kernel.order = 2;
  kernel.alpha1 = 1.0;
  kernel.alpha2 = 0.5 * std::numbers::inv_sqrtpi;
  // Phi(-9) ~ 1e-19, well below double resolution around 1.
  kernel.saturation = 9.0;
  return kernel;
}

double factorial(int h) {
  double f = 1.0;
  for (int i = 2; i <= h; ++i) f *= i;
  return f;
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

void validate_rule(const BandwidthRule& rule) {
  std::visit(overloaded{
                 [](const FixedBandwidth& r) {
                   if (!(r.sigma > 0.0 && std::isfinite(r.sigma)))
                     throw ValidationError("fixed bandwidth must be positive");
                 },
                 [](const LambdaRate& r) {
                   if (!(r.lambda > 0.0 && std::isfinite(r.lambda)))
                     throw ValidationError("lambda must be positive");
                   if (r.order < 2) throw ValidationError("kernel order must be >= 2");
                 },
                 [](const PlugInOptimal&) {},
                 [](const Undersmoothed& r) {
                   if (!(r.exponent_shrink > 0.0))
                     throw ValidationError("undersmoothing shrink must be positive");
                   if (r.lambda && !(*r.lambda > 0.0))
                     throw ValidationError("undersmoothing base lambda must be positive");
                 },
             },
             rule);
}

std::string describe(const BandwidthRule& rule) {
  std::ostringstream out;
  out.precision(17);
  std::visit(overloaded{
                 [&](const FixedBandwidth& r) { out << "fixed:" << r.sigma; },
                 [&](const LambdaRate& r) { out << "lambda:" << r.lambda; },
                 [&](const PlugInOptimal&) { out << "auto"; },
                 [&](const Undersmoothed& r) {
                   out << "undersmooth:" << r.exponent_shrink;
                   if (r.lambda) out << ",lambda:" << *r.lambda;
                 },
             },
             rule);
  return out.str();
}

double sigma_from_lambda(double lambda, std::size_t n, int order) {
  return std::pow(lambda / static_cast<double>(n), 1.0 / (2.0 * order + 1.0));
}

}  // namespace threshold_regret
