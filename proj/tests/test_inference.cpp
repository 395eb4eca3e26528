#include <doctest.h>

#include <cmath>

#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/errors.hpp"
#include "threshold_regret/ewm.hpp"
#include "threshold_regret/inference.hpp"
#include "threshold_regret/montecarlo.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/stats.hpp"
#include "threshold_regret/swm.hpp"

using namespace threshold_regret;

namespace {

const ChernoffTable& table() {
  static const ChernoffTable t = [] {
    ChernoffConfig c;
    c.n_paths = 20000;
    c.grid_step = 1e-3;
    c.seed = 8;
    return simulate_chernoff_unchecked(c);
  }();
  return t;
}

NuisanceEstimates fixed_nuisance(double k, double h, double a) {
  NuisanceEstimates e;
  e.k_hat = k;
  e.h_hat = h;
  e.a_hat = a;
  return e;
}

const Kernel kern = gaussian_cdf_kernel();

}  // namespace

TEST_CASE("EWM plug-in interval") {
  const Sample s = draw_sample(Dgp::model1(), 1000, 3);
  const auto est = fit_ewm(s, ParamSpace::around(s));
  const auto ci = ewm_ci(s, est, fixed_nuisance(1.596, 0.399, 0.199), table(), 0.95);
  const double c = table().quantile(0.975);
  CHECK(ci.half_width == doctest::Approx(std::pow(1000.0, -1.0 / 3.0) *
                                         std::pow(2 * std::sqrt(1.596) / 0.399, 2.0 / 3.0) * c)
                             .epsilon(1e-13));
  CHECK(ci.center == est.t_hat);
  CHECK(ci.hi - ci.lo == doctest::Approx(2 * ci.half_width));
  CHECK(ci.method == IntervalMethod::EwmPlugIn);
  CHECK(ci.bias_correction == 0.0);
  // Linear in the critical value.
  CHECK(ewm_ci_half_width(1000, 1.596, 0.399, 2 * c) == doctest::Approx(2 * ci.half_width).epsilon(1e-14));
  CHECK(ewm_ci_half_width(8000, 1.596, 0.399, c) == doctest::Approx(0.5 * ci.half_width).epsilon(1e-13));
  try {
    ewm_ci(s, est, fixed_nuisance(1.596, -0.1, 0.199), table(), 0.95);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("H_hat") != std::string::npos);
  }
  CHECK_THROWS_AS(ewm_ci(s, est, fixed_nuisance(1.596, 0.399, 0.199), table(), 1.0), ValidationError);
  const auto swm = fit_swm(s, kern, FixedBandwidth{0.3}, ParamSpace::around(s));
  CHECK_THROWS_AS(ewm_ci(s, swm, fixed_nuisance(1.596, 0.399, 0.199), table(), 0.95), ValidationError);
}

TEST_CASE("SWM intervals") {
  const Sample s = draw_sample(Dgp::model1(), 1000, 4);
  const double lambda = 2.8421;
  const auto est = fit_swm(s, kern, LambdaRate{lambda, 2}, ParamSpace::around(s));
  const double ns = 1000 * *est.bandwidth;
  const auto nu = fixed_nuisance(1.596, 0.399, 0.199);
  const auto bc = swm_ci(s, est, nu, kern, lambda, 0.95, SwmIntervalMode::BiasCorrected);
  const double z = 1.959963984540054;
  CHECK(bc.half_width == doctest::Approx(std::sqrt(kern.alpha2 * 1.596) / (std::sqrt(ns) * 0.399) * z).epsilon(1e-12));
  CHECK(bc.bias_correction == doctest::Approx(std::sqrt(lambda) * 0.199 / (std::sqrt(ns) * 0.399)).epsilon(1e-12));
  CHECK(bc.lo <= bc.center - bc.bias_correction);
  CHECK(bc.center - bc.bias_correction <= bc.hi);
  CHECK(bc.lo == doctest::Approx(est.t_hat - bc.bias_correction - bc.half_width));

  const auto no_bias = swm_ci(s, est, fixed_nuisance(1.596, 0.399, 0.0), kern, lambda, 0.95,
                              SwmIntervalMode::BiasCorrected);
  CHECK(no_bias.bias_correction == 0.0);
  CHECK(no_bias.lo == doctest::Approx(est.t_hat - bc.half_width));

  CHECK_THROWS_AS(swm_ci(s, est, nu, kern, lambda, 0.95, SwmIntervalMode::Undersmoothed), ValidationError);
  const auto under = fit_swm(s, kern, Undersmoothed{0.05, lambda}, ParamSpace::around(s));
  CHECK_THROWS_AS(swm_ci(s, under, nu, kern, lambda, 0.95, SwmIntervalMode::BiasCorrected), ValidationError);
  const auto uci = swm_ci(s, under, nu, kern, lambda, 0.95, SwmIntervalMode::Undersmoothed);
  CHECK(uci.bias_correction == 0.0);
  CHECK(uci.method == IntervalMethod::SwmUndersmoothed);
  CHECK(uci.half_width > bc.half_width);
  CHECK_THROWS_AS(swm_ci(s, est, fixed_nuisance(1.596, 0.0, 0.1), kern, lambda, 0.95,
                         SwmIntervalMode::BiasCorrected),
                  NumericError);
  const auto ewm = fit_ewm(s, ParamSpace::around(s));
  CHECK_THROWS_AS(swm_ci(s, ewm, nu, kern, lambda, 0.95, SwmIntervalMode::BiasCorrected), ValidationError);
}

TEST_CASE("bootstrap reproducibility and guards") {
  const Sample s = draw_sample(Dgp::model1(), 800, 5);
  const auto est = fit_ewm(s, ParamSpace::around(s));
  const auto a = ewm_bootstrap(s, est, 0.4, 300, 17, 1);
  const auto b = ewm_bootstrap(s, est, 0.4, 300, 17, 4);
  const auto c = ewm_bootstrap(s, est, 0.4, 300, 18, 1);
  CHECK(a.draws == b.draws);
  CHECK(a.draws != c.draws);
  CHECK_THROWS_AS(ewm_bootstrap(s, est, 0.4, 199, 17), ValidationError);
  CHECK_THROWS_AS(ewm_bootstrap(s, est, 0.0, 300, 17), NumericError);

  // An enormous curvature pins every replicate at t_hat.
  const auto pinned = ewm_bootstrap(s, est, 1e15, 200, 3);
  for (double d : pinned.draws) CHECK(d == 0.0);
  const auto ci = pinned.percentile_interval(0.95);
  CHECK(ci.lo == est.t_hat);
  CHECK(ci.hi == est.t_hat);

  const Sample flat({1, 2, 3}, {1, 0, 1}, {2.0, 2.0, 2.0}, 0.5);
  const auto fe = fit_ewm(flat, ParamSpace(0.0, 4.0));
  CHECK_THROWS_AS(ewm_bootstrap(flat, fe, 0.4, 200, 1), NumericError);

  const auto pi = a.percentile_interval(0.9);
  CHECK(pi.method == IntervalMethod::EwmBootstrap);
  CHECK(pi.lo <= pi.hi);
}

TEST_CASE("bootstrap law is symmetric for a mirror-image design") {
  // Units come in pairs (x, -x) with equal scores, so the reshaped process
  // around t = 0 has the same law on both sides.
  std::vector<double> y, x;
  std::vector<int> d;
  const Sample base = draw_sample(Dgp::model1(), 1000, 21);
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (double sign : {1.0, -1.0}) {
      y.push_back(base.y()[i]);
      d.push_back(base.d()[i]);
      x.push_back(sign * std::abs(base.x()[i]));
    }
  }
  const Sample s(y, d, x, 0.5);
  ThresholdEstimate est;
  est.t_hat = 0.0;
  const auto boot = ewm_bootstrap(s, est, 0.4, 4000, 2);
  CHECK(ks_symmetry(boot.draws) < 0.05);
}

TEST_CASE("bootstrap law over repeated samples") {
  // A single sample's bootstrap law inherits that sample's local asymmetry;
  // pooled over samples it is centered and symmetric.
  const Dgp dgp = Dgp::model1();
  std::vector<double> pooled;
  for (std::uint64_t r = 0; r < 8; ++r) {
    const Sample s = draw_sample(dgp, 2000, derive_seed(31 + r, {2000}));
    const auto est = fit_ewm(s, ParamSpace::around(s));
    const auto nu = estimate_khA(s, est.t_hat);
    const auto boot = ewm_bootstrap(s, est, nu.h_hat, 500, 2);
    pooled.insert(pooled.end(), boot.draws.begin(), boot.draws.end());
    if (r == 0) {
      const auto pci = boot.percentile_interval(0.95);
      const auto wci = ewm_ci(s, est, nu, table(), 0.95);
      CHECK(pci.half_width == doctest::Approx(wci.half_width).epsilon(0.2));
    }
  }
  CHECK(ks_symmetry(pooled) < 0.05);
  CHECK(std::abs(mean(pooled)) < 3 * standard_deviation(pooled) / std::sqrt(8.0));
}

TEST_CASE("interval widths shrink at the stated rates") {
  const Dgp dgp = Dgp::model1();
  const auto truth = dgp.constants();
  const double lambda = kern.alpha2 * truth.k / (4 * truth.a * truth.a);
  std::vector<double> logn, log_ewm, log_swm;
  for (std::size_t n : {500u, 1000u, 2000u, 3000u, 6000u}) {
    std::vector<double> we, ws;
    for (std::uint64_t r = 0; r < 40; ++r) {
      const Sample s = draw_sample(dgp, n, derive_seed(55, {n, r}));
      const auto e = fit_ewm(s, ParamSpace::around(s));
      we.push_back(ewm_ci(s, e, estimate_khA(s, e.t_hat), table(), 0.95).half_width);
      const auto w = fit_swm(s, kern, LambdaRate{lambda, 2}, ParamSpace::around(s));
      ws.push_back(swm_ci(s, w, estimate_khA(s, w.t_hat), kern, lambda, 0.95, SwmIntervalMode::BiasCorrected)
                       .half_width);
    }
    logn.push_back(std::log(double(n)));
    log_ewm.push_back(std::log(median(we)));
    log_swm.push_back(std::log(median(ws)));
  }
  CHECK(std::abs(ols_slope(logn, log_ewm) + 1.0 / 3.0) < 0.05);
  CHECK(std::abs(ols_slope(logn, log_swm) + 0.4) < 0.05);
}
