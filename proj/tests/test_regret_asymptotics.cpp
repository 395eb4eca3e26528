#include <doctest.h>

#include <cmath>

#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/errors.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/regret_asymptotics.hpp"

using namespace threshold_regret;

namespace {

const ChernoffTable& table() {
  static const ChernoffTable t = [] {
    ChernoffConfig c;
    c.n_paths = 20000;
    c.grid_step = 1e-3;
    c.seed = 5;
    return simulate_chernoff_unchecked(c);
  }();
  return t;
}

const Kernel kern = gaussian_cdf_kernel();

}  // namespace

TEST_CASE("EWM law scaling") {
  const auto d500 = ewm_regret_dist(1.596, 0.399, 500, table());
  const auto d4000 = ewm_regret_dist(1.596, 0.399, 4000, table());
  CHECK(d4000.mean() / d500.mean() == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(d4000.median() / d500.median() == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(d500.scale() == doctest::Approx(std::pow(500.0, -2.0 / 3.0) * std::cbrt(2 * 1.596 * 1.596 / 0.399)));
  CHECK(d500.mean() == doctest::Approx(std::pow(500.0, -2.0 / 3.0) * std::pow(1.596, 2.0 / 3.0) *
                                       std::pow(0.399, -1.0 / 3.0) * ewm_regret_constant(table()))
                           .epsilon(1e-13));
  CHECK(d500.noncentrality() == 0.0);
  CHECK(d500.law() == RegretLaw::EwmChernoffSquared);
  double prev = 0.0;
  for (int i = 1; i < 50; ++i) {
    const double q = d500.quantile(i / 50.0);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK_THROWS_AS(ewm_regret_dist(0.0, 0.4, 500, table()), ValidationError);
  CHECK_THROWS_AS(ewm_regret_dist(1.0, -0.4, 500, table()), ValidationError);
  CHECK_THROWS_AS(d500.quantile(1.0), ValidationError);
}

TEST_CASE("SWM law: central case and closed-form mean") {
  const auto central = swm_regret_dist(1.596, 0.399, 0.0, 3.0, kern, 500);
  const double sigma = std::pow(3.0 / 500, 0.2);
  CHECK(central.noncentrality() == 0.0);
  CHECK(central.mean() == doctest::Approx(kern.alpha2 * 1.596 / (2 * 0.399 * 500 * sigma)).epsilon(1e-14));
  // Median of chi2(1) is 0.45494.
  CHECK(central.median() / central.scale() == doctest::Approx(0.454936).epsilon(0.01));

  const auto d = swm_regret_dist(1.596, 0.399, 0.199, 3.0, kern, 500);
  const double ns = 500 * sigma;
  CHECK(d.mean() == doctest::Approx((0.5 * kern.alpha2 * 1.596 / 0.399 + 1.5 * 0.199 * 0.199 / 0.399) / ns)
                        .epsilon(1e-13));
  CHECK(d.noncentrality() == doctest::Approx(3.0 * 0.199 * 0.199 / (kern.alpha2 * 1.596)).epsilon(1e-14));

  const auto under = swm_regret_dist(1.0, 0.5, 0.2, 0.0, kern, 1000, 0.1);
  CHECK(under.mean() == doctest::Approx(kern.alpha2 / (2 * 0.5 * 100.0)).epsilon(1e-14));
  CHECK_THROWS_AS(swm_regret_dist(1.0, 0.5, 0.2, 0.0, kern, 1000), ValidationError);
  CHECK_THROWS_AS(swm_regret_dist(1.0, 0.5, 0.2, -1.0, kern, 1000), ValidationError);
  CHECK_THROWS_AS(swm_regret_dist(-1.0, 0.5, 0.2, 1.0, kern, 1000), ValidationError);
  CHECK_THROWS_AS(swm_regret_dist(1.0, 0.0, 0.2, 1.0, kern, 1000), ValidationError);
}

TEST_CASE("simulated noncentral chi-square quantiles") {
  // Mean of the sorted base draws is 1 + nc; quantiles are monotone and
  // reproducible from the seed.
  const auto a = swm_regret_dist(1.0, 0.5, 0.3, 2.0, kern, 800, std::nullopt, 3, 200000);
  const auto b = swm_regret_dist(1.0, 0.5, 0.3, 2.0, kern, 800, std::nullopt, 3, 200000);
  const auto c = swm_regret_dist(1.0, 0.5, 0.3, 2.0, kern, 800, std::nullopt, 4, 200000);
  CHECK(a.quantile(0.9) == b.quantile(0.9));
  CHECK(a.quantile(0.9) != c.quantile(0.9));
  // nc = 2 * 0.09 / alpha2 ~ 0.638; chi2(1, nc) P(V <= 1 + nc) by direct normal cdf.
  const double nc = a.noncentrality();
  const double m = 1.0 + nc;
  const double p = 0.5 * std::erfc(-(std::sqrt(m) - std::sqrt(nc)) / std::sqrt(2.0)) -
                   0.5 * std::erfc(-(-std::sqrt(m) - std::sqrt(nc)) / std::sqrt(2.0));
  CHECK(a.quantile(p) / a.scale() == doctest::Approx(m).epsilon(0.01));
}

TEST_CASE("optimal lambda") {
  CHECK(swm_regret_constant(kern) == doctest::Approx(0.2996).epsilon(2e-4));
  const double lstar = optimal_lambda(1.596, 0.199, kern);
  CHECK(lstar == doctest::Approx(kern.alpha2 * 1.596 / (4 * 0.199 * 0.199)).epsilon(1e-14));
  for (std::size_t n : {500u, 1000u, 2000u, 3000u}) {
    const double direct = optimal_lambda_mean(1.596, 0.399, 0.199, kern, n);
    CHECK(swm_regret_dist(1.596, 0.399, 0.199, lstar, kern, n).mean() == doctest::Approx(direct).epsilon(1e-10));
    // Two-step path through the bandwidth selector.
    NuisanceEstimates nu;
    nu.k_hat = 1.596;
    nu.h_hat = 0.399;
    nu.a_hat = 0.199;
    const auto opt = optimal_bandwidth(nu, kern, n);
    CHECK(swm_regret_dist(1.596, 0.399, 0.199, opt.lambda_star, kern, n, opt.sigma_star).mean() ==
          doctest::Approx(direct).epsilon(1e-10));
    CHECK(direct * std::pow(double(n), 0.8) ==
          doctest::Approx(optimal_lambda_mean(1.596, 0.399, 0.199, kern, 500) * std::pow(500.0, 0.8))
              .epsilon(1e-12));
  }
  CHECK(optimal_lambda_mean(1.596, 0.399, -0.199, kern, 500) ==
        optimal_lambda_mean(1.596, 0.399, 0.199, kern, 500));
  CHECK_THROWS_AS(optimal_lambda_mean(1.596, 0.399, 0.0, kern, 500), ValidationError);
  CHECK_THROWS_AS(optimal_lambda(1.596, 0.0, kern), ValidationError);
}

TEST_CASE("tabulated SWM means") {
  const double m1[] = {39.714, 22.809, 13.101, 9.471};
  const double m2[] = {439.442, 252.393, 144.962, 104.805};
  const std::size_t ns[] = {500, 1000, 2000, 3000};
  for (int i = 0; i < 4; ++i) {
    CHECK(1e4 * optimal_lambda_mean(1.596, 0.399, 0.199, kern, ns[i]) == doctest::Approx(m1[i]).epsilon(0.005));
    CHECK(1e4 * optimal_lambda_mean(9.575, 0.199, 0.399, kern, ns[i]) == doctest::Approx(m2[i]).epsilon(0.005));
  }
}

TEST_CASE("tabulated SWM medians") {
  const double med1[] = {18.459, 10.602, 6.089, 4.402};
  const double med2[] = {204.255, 117.314, 67.379, 48.714};
  const std::size_t ns[] = {500, 1000, 2000, 3000};
  for (int i = 0; i < 4; ++i) {
    const auto d1 = swm_regret_dist(1.596, 0.399, 0.199, optimal_lambda(1.596, 0.199, kern), kern, ns[i]);
    const auto d2 = swm_regret_dist(9.575, 0.199, 0.399, optimal_lambda(9.575, 0.399, kern), kern, ns[i]);
    CHECK(1e4 * d1.median() == doctest::Approx(med1[i]).epsilon(0.02));
    CHECK(1e4 * d2.median() == doctest::Approx(med2[i]).epsilon(0.02));
  }
}

TEST_CASE("policy comparison") {
  for (std::size_t n : {500u, 1000u, 3000u}) {
    const auto r = compare_policies(1.596, 0.399, 0.199, kern, n, table());
    CHECK(r.ratio == doctest::Approx(r.closed_form_ratio).epsilon(1e-8));
    CHECK(r.ewm_mean > r.swm_mean);
    CHECK(r.lambda_star == doctest::Approx(optimal_lambda(1.596, 0.199, kern)));
  }
  const auto r500 = compare_policies(9.575, 0.199, 0.399, kern, 500, table());
  const auto r3000 = compare_policies(9.575, 0.199, 0.399, kern, 3000, table());
  CHECK(r500.ratio == doctest::Approx(r500.closed_form_ratio).epsilon(1e-8));
  CHECK(r500.swm_mean > r500.ewm_mean);
  CHECK(r3000.swm_mean < r3000.ewm_mean);
  // Ratio grows as n^(2/15).
  CHECK(r3000.ratio / r500.ratio == doctest::Approx(std::pow(6.0, 2.0 / 15.0)).epsilon(1e-12));
}

TEST_CASE("homogeneity in K") {
  const double c = 2.7;
  const auto e1 = ewm_regret_dist(1.0, 0.4, 700, table());
  const auto e2 = ewm_regret_dist(c, 0.4, 700, table());
  CHECK(e2.mean() / e1.mean() == doctest::Approx(std::pow(c, 2.0 / 3.0)).epsilon(1e-13));
  CHECK(e2.quantile(0.8) / e1.quantile(0.8) == doctest::Approx(std::pow(c, 2.0 / 3.0)).epsilon(1e-13));
  // SWM central part (A = 0) at fixed lambda is linear in K.
  const auto s1 = swm_regret_dist(1.0, 0.4, 0.0, 2.0, kern, 700);
  const auto s2 = swm_regret_dist(c, 0.4, 0.0, 2.0, kern, 700);
  CHECK(s2.mean() / s1.mean() == doctest::Approx(c).epsilon(1e-13));
  CHECK(s2.median() / s1.median() == doctest::Approx(c).epsilon(1e-13));
  // EWM mean x n^(2/3) is n-invariant.
  CHECK(ewm_regret_dist(1.0, 0.4, 500, table()).mean() * std::pow(500.0, 2.0 / 3.0) ==
        doctest::Approx(ewm_regret_dist(1.0, 0.4, 3000, table()).mean() * std::pow(3000.0, 2.0 / 3.0))
            .epsilon(1e-12));
}
