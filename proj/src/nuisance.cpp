#include "threshold_regret/nuisance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

namespace {
// Gaussian weights beyond this many bandwidths underflow relative to the bulk.
constexpr double kWeightCutoff = 12.0;
}  // namespace

double kde(std::span<const double> x, double point, double bandwidth, int derivative) {
  if (x.size() < 5) throw ValidationError("kde needs at least 5 observations");
  if (!(bandwidth > 0.0)) throw ValidationError("kde bandwidth must be positive");
  if (derivative != 0 && derivative != 1) throw ValidationError("kde derivative must be 0 or 1");
  CompensatedSum s;
  for (double xi : x) {
    const double u = (point - xi) / bandwidth;
    s += derivative == 0 ? normal_pdf(u) : -u * normal_pdf(u);
  }
  const double n = static_cast<double>(x.size());
  return derivative == 0 ? s.value() / (n * bandwidth) : s.value() / (n * bandwidth * bandwidth);
}

double local_poly(std::span<const double> x, std::span<const double> y, double point,
                  double bandwidth, int degree, int derivative) {
  if (x.size() != y.size()) throw ValidationError("local_poly: x and y differ in length");
  if (!(bandwidth > 0.0)) throw ValidationError("local_poly: bandwidth must be positive");
  if (degree < 0 || derivative < 0 || derivative > degree)
    throw ValidationError("local_poly: need 0 <= derivative <= degree");

  const int p = degree + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd basis(p);
  std::size_t near = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = (x[i] - point) / bandwidth;
    if (std::abs(u) > kWeightCutoff) continue;
    if (std::abs(u) <= 4.0) ++near;
    const double w = normal_pdf(u);
    basis(0) = 1.0;
    for (int k = 1; k < p; ++k) basis(k) = basis(k - 1) * u;
    gram.noalias() += w * basis * basis.transpose();
    rhs.noalias() += (w * y[i]) * basis;
  }
  if (near < static_cast<std::size_t>(degree) + 2) {
    std::ostringstream msg;
    msg << "local_poly: only " << near << " observations near " << point << " for degree "
        << degree;
    throw InsufficientLocalData(msg.str());
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) {
    std::ostringstream msg;
    msg << "local_poly: rank-deficient design at " << point << " (rank " << qr.rank() << " < "
        << p << ")";
    throw InsufficientLocalData(msg.str());
  }
  const Eigen::VectorXd coef = qr.solve(rhs);
  return factorial(derivative) * coef(derivative) / std::pow(bandwidth, derivative);
}

double silverman_bandwidth(std::span<const double> x) {
  return 1.06 * standard_deviation(x) * std::pow(static_cast<double>(x.size()), -0.2);
}

namespace {

struct Arm {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y2;
};

double kish_effective_size(std::span<const double> x, double point, double bandwidth) {
  double sw = 0.0, sw2 = 0.0;
  for (double xi : x) {
    const double w = normal_pdf((xi - point) / bandwidth);
    sw += w;
    sw2 += w * w;
  }
  return sw2 > 0.0 ? sw * sw / sw2 : 0.0;
}

}  // namespace

NuisanceEstimates estimate_khA(const Sample& sample, double t_eval, const Kernel& kernel,
                               const NuisanceOptions& options) {
  if (kernel.order != 2)
    throw ValidationError("plug-in A estimation is implemented for order-2 kernels only");
  const auto x = sample.x();
  const double n = static_cast<double>(sample.size());
  if (sample.size() < 5) throw ValidationError("estimate_khA needs at least 5 observations");

  Arm arms[2];
  for (std::size_t i = 0; i < sample.size(); ++i) {
    Arm& a = arms[sample.d()[i]];
    a.x.push_back(x[i]);
    a.y.push_back(sample.y()[i]);
    a.y2.push_back(sample.y()[i] * sample.y()[i]);
  }

  const double sd = standard_deviation(x);
  if (!(sd > 0.0)) throw NumericError("estimate_khA: x has no spread");
  NuisanceEstimates out;
  out.eval_point = t_eval;
  out.kde_bandwidth = options.kde_scale * sd * std::pow(n, -0.2);
  const double kde_deriv_bandwidth = options.kde_scale * sd * std::pow(n, -1.0 / 7.0);
  const double f = kde(x, t_eval, out.kde_bandwidth, 0);
  const double f1 = kde(x, t_eval, kde_deriv_bandwidth, 1);

  double reg_bw[2];
  for (int j = 0; j < 2; ++j) {
    const char* arm_name = j == 1 ? "treated" : "control";
    if (arms[j].x.size() < 5)
      throw InsufficientLocalData(std::string("estimate_khA: ") + arm_name +
                                  " arm has fewer than 5 observations");
    const double sd_j = standard_deviation(arms[j].x);
    reg_bw[j] = options.reg_scale * options.kde_scale * sd_j *
                std::pow(static_cast<double>(arms[j].x.size()), -0.2);
    const double eff = kish_effective_size(arms[j].x, t_eval, reg_bw[j]);
    if (!(eff >= options.min_effective_obs)) {
      std::ostringstream msg;
      msg << "estimate_khA: " << arm_name << " arm has " << eff
          << " effective local observations at t=" << t_eval << " (need "
          << options.min_effective_obs << ") for the K/H/A regressions";
      throw InsufficientLocalData(msg.str());
    }
  }
  out.reg_bandwidth = reg_bw[1];
  out.reg_bandwidth_control = reg_bw[0];

  // Local propensity level; exact for a constant propensity.
  const double p_t = sample.has_constant_propensity()
                         ? sample.propensity()[0]
                         : local_poly(x, sample.propensity(), t_eval, out.kde_bandwidth, 1, 0);
  if (!(p_t > 0.0 && p_t < 1.0))
    throw NumericError("estimate_khA: local propensity estimate outside (0,1)");

  double kappa[2], nu1[2], nu2[2];
  for (int j = 0; j < 2; ++j) {
    kappa[j] = local_poly(arms[j].x, arms[j].y2, t_eval, reg_bw[j], options.second_moment_degree, 0);
    const double nj = static_cast<double>(arms[j].x.size());
    const double bw1 = options.derivative_rates ? reg_bw[j] * std::pow(nj, 0.2 - 1.0 / 7.0) : reg_bw[j];
    const double bw2 = options.derivative_rates ? reg_bw[j] * std::pow(nj, 0.2 - 1.0 / 9.0) : reg_bw[j];
    nu1[j] = local_poly(arms[j].x, arms[j].y, t_eval, bw1, options.mean_degree, 1);
    nu2[j] = local_poly(arms[j].x, arms[j].y, t_eval, bw2, options.mean_degree, 2);
  }

  out.k_hat = f * (kappa[1] / p_t + kappa[0] / (1.0 - p_t));
  out.h_hat = f * (nu1[1] - nu1[0]);
  out.a_hat = -(kernel.alpha1 / factorial(kernel.order)) *
              (2.0 * f1 * (nu1[1] - nu1[0]) + f * (nu2[1] - nu2[0]));
  if (!std::isfinite(out.k_hat) || !std::isfinite(out.h_hat) || !std::isfinite(out.a_hat))
    throw NumericError("estimate_khA: non-finite plug-in estimate");
  return out;
}

OptimalBandwidth optimal_bandwidth(const NuisanceEstimates& nuisance, const Kernel& kernel,
                                   std::size_t n) {
  OptimalBandwidth out;
  if (nuisance.k_hat == 0.0) {
    out.degenerate = true;
    return out;
  }
  if (nuisance.a_hat == 0.0) throw NumericError("optimal_bandwidth: A_hat is zero");
  const int h = kernel.order;
  out.lambda_star = kernel.alpha2 * nuisance.k_hat / (2.0 * h * nuisance.a_hat * nuisance.a_hat);
  out.sigma_star = sigma_from_lambda(out.lambda_star, n, h);
  if (!std::isfinite(out.lambda_star) || !std::isfinite(out.sigma_star))
    throw NumericError("optimal_bandwidth: non-finite lambda* or sigma*");
  if (out.lambda_star <= 0.0) out.degenerate = true;
  return out;
}

}  // namespace threshold_regret
