#include <doctest.h>

#include <cmath>
#include <random>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/ewm.hpp"
#include "threshold_regret/montecarlo.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/stats.hpp"

using namespace threshold_regret;

namespace {

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

}  // namespace

TEST_CASE("kde level, symmetry, translation and mass") {
  const auto x = normal_draws(10000, 1);
  CHECK(std::abs(kde(x, 0.0, silverman_bandwidth(x), 0) - 0.3989) < 0.02);

  std::vector<double> sym;
  for (double v : normal_draws(500, 2)) {
    sym.push_back(1.5 + v);
    sym.push_back(1.5 - v);
  }
  CHECK(std::abs(kde(sym, 1.5, 0.3, 1)) < 1e-12);

  std::vector<double> shifted;
  for (double v : x) shifted.push_back(v + 7.25);
  CHECK(kde(shifted, 0.4 + 7.25, 0.2, 0) == doctest::Approx(kde(x, 0.4, 0.2, 0)).epsilon(1e-10));

  const auto small = normal_draws(300, 3);
  const double bw = silverman_bandwidth(small);
  const double lo = *std::min_element(small.begin(), small.end()) - 5 * bw;
  const double hi = *std::max_element(small.begin(), small.end()) + 5 * bw;
  const double step = bw / 20.0;
  double mass = 0.0;
  for (double t = lo; t <= hi; t += step) mass += kde(small, t, bw, 0) * step;
  CHECK(std::abs(mass - 1.0) < 1e-3);

  CHECK_THROWS_AS(kde(std::vector<double>{1, 2, 3, 4}, 0.0, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(kde(x, 0.0, 0.0, 0), ValidationError);
  CHECK_THROWS_AS(kde(x, 0.0, 1.0, 2), ValidationError);
}

TEST_CASE("local polynomial reproduction") {
  const auto x = normal_draws(200, 4);
  std::vector<double> lin, quad, cubic;
  for (double v : x) {
    lin.push_back(2 * v + 1);
    quad.push_back(v * v);
    cubic.push_back(v * v * v - 0.5 * v * v + v + 3);
  }
  CHECK(std::abs(local_poly(x, lin, 0.3, 0.5, 1, 1) - 2.0) < 1e-10);
  CHECK(std::abs(local_poly(x, quad, 0.0, 0.5, 2, 2) - 2.0) < 1e-8);
  for (double bw : {0.2, 0.5, 1.0, 3.0}) {
    const double t = 0.2;
    CHECK(std::abs(local_poly(x, cubic, t, bw, 3, 0) - (t * t * t - 0.5 * t * t + t + 3)) < 1e-8);
    CHECK(std::abs(local_poly(x, cubic, t, bw, 3, 1) - (3 * t * t - t + 1)) < 1e-8);
    CHECK(std::abs(local_poly(x, cubic, t, bw, 3, 2) - (6 * t - 1)) < 1e-8);
    CHECK(std::abs(local_poly(x, quad, t, bw, 2, 1) - 2 * t) < 1e-8);
  }
}

TEST_CASE("local polynomial rejects thin designs") {
  const std::vector<double> same{1, 1, 1, 1, 1, 1}, y{1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(local_poly(same, y, 1.0, 0.5, 1, 1), InsufficientLocalData);
  const std::vector<double> far{10, 11, 12, 13, 14, 15};
  CHECK_THROWS_AS(local_poly(far, y, 0.0, 0.1, 1, 0), InsufficientLocalData);
  CHECK_THROWS_AS(local_poly(far, y, 12.0, 1.0, 1, 2), ValidationError);
}

TEST_CASE("treated-arm slope on the first design") {
  // The treated mean is cubic, so a local cubic slope at 0 is unbiased for 1;
  // one draw has sd near 0.2 at this size, hence the average over samples.
  std::vector<double> cubic, linear;
  for (std::uint64_t r = 0; r < 60; ++r) {
    const Sample s = draw_sample(Dgp::model1(), 5000, derive_seed(12, {r}));
    std::vector<double> x1, y1;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s.d()[i] == 1) {
        x1.push_back(s.x()[i]);
        y1.push_back(s.y()[i]);
      }
    const double bw = 1.5 * silverman_bandwidth(x1);
    cubic.push_back(local_poly(x1, y1, 0.0, bw, 3, 1));
    linear.push_back(local_poly(x1, y1, 0.0, bw, 1, 1));
  }
  CHECK(std::abs(mean(cubic) - 1.0) < 3.0 * standard_deviation(cubic) / std::sqrt(60.0));
  // Local linear picks up the cubic term: bias ~ h^2 * 3 > 0.
  CHECK(mean(linear) > 1.0);
}

TEST_CASE("plug-in constants on the first design") {
  const Dgp dgp = Dgp::model1();
  const auto truth = dgp.constants();
  const Sample s = draw_sample(dgp, 5000, derive_seed(2024, {5000}));
  const auto est = fit_ewm(s, ParamSpace::around(s));
  const auto nu = estimate_khA(s, est.t_hat);
  CHECK(nu.eval_point == est.t_hat);
  CHECK(std::abs(nu.k_hat / truth.k - 1.0) < 0.25);
  CHECK(std::abs(nu.h_hat / truth.h - 1.0) < 0.25);
  CHECK(std::abs(nu.a_hat / truth.a - 1.0) < 0.25);
  CHECK(nu.kde_bandwidth > 0.0);
  CHECK(nu.reg_bandwidth > 0.0);
}

TEST_CASE("zero outcomes and homogeneity") {
  const Sample s = draw_sample(Dgp::model1(), 2000, 6);
  std::vector<double> zero(s.size(), 0.0), twice;
  for (double v : s.y()) twice.push_back(2.0 * v);
  const std::vector<int> d(s.d().begin(), s.d().end());
  const std::vector<double> x(s.x().begin(), s.x().end());
  const auto z = estimate_khA(Sample(zero, d, x, 0.5), 0.1);
  CHECK(z.k_hat == 0.0);
  CHECK(z.h_hat == 0.0);
  CHECK(z.a_hat == 0.0);
  const auto base = estimate_khA(s, 0.1);
  const auto dbl = estimate_khA(Sample(twice, d, x, 0.5), 0.1);
  CHECK(dbl.k_hat == doctest::Approx(4 * base.k_hat).epsilon(1e-10));
  CHECK(dbl.h_hat == doctest::Approx(2 * base.h_hat).epsilon(1e-10));
  CHECK(dbl.a_hat == doctest::Approx(2 * base.a_hat).epsilon(1e-10));
}

TEST_CASE("sparse arm is reported by name") {
  // 3 control units far from the evaluation point.
  std::vector<double> y, x;
  std::vector<int> d;
  const auto draws = normal_draws(400, 7);
  for (std::size_t i = 0; i < draws.size(); ++i) {
    x.push_back(draws[i]);
    y.push_back(draws[i]);
    d.push_back(i < 3 ? 0 : 1);
  }
  x[0] = 30.0;
  x[1] = 31.0;
  x[2] = 32.0;
  try {
    estimate_khA(Sample(y, d, x, 0.5), 0.0);
    FAIL("expected InsufficientLocalData");
  } catch (const InsufficientLocalData& e) {
    CHECK(std::string(e.what()).find("control") != std::string::npos);
  }
}

TEST_CASE("non-constant propensity uses a local fit") {
  const Sample s = draw_sample(Dgp::model1(), 3000, 13);
  std::vector<double> p(s.size(), 0.5);
  p[0] = 0.5000001;
  const Sample s2(std::vector<double>(s.y().begin(), s.y().end()), std::vector<int>(s.d().begin(), s.d().end()),
                  std::vector<double>(s.x().begin(), s.x().end()), p);
  const auto a = estimate_khA(s, 0.0), b = estimate_khA(s2, 0.0);
  CHECK(b.k_hat == doctest::Approx(a.k_hat).epsilon(1e-5));
}

TEST_CASE("optimal bandwidth algebra") {
  const Kernel k = gaussian_cdf_kernel();
  NuisanceEstimates truth;
  truth.k_hat = 1.596;
  truth.h_hat = 0.399;
  truth.a_hat = 0.199;
  const auto opt = optimal_bandwidth(truth, k, 500);
  CHECK(opt.lambda_star == doctest::Approx(0.28209 * 1.596 / (4 * 0.199 * 0.199)).epsilon(1e-4));
  CHECK(opt.lambda_star == doctest::Approx(2.842).epsilon(1e-3));
  CHECK(opt.sigma_star == doctest::Approx(std::pow(opt.lambda_star / 500, 0.2)).epsilon(1e-14));
  const auto opt4 = optimal_bandwidth(truth, k, 2000);
  CHECK(opt4.sigma_star / opt.sigma_star == doctest::Approx(std::pow(4.0, -0.2)).epsilon(1e-13));
  NuisanceEstimates zero_k = truth;
  zero_k.k_hat = 0.0;
  const auto deg = optimal_bandwidth(zero_k, k, 500);
  CHECK(deg.degenerate);
  CHECK(deg.lambda_star == 0.0);
  CHECK(deg.sigma_star == 0.0);
  NuisanceEstimates zero_a = truth;
  zero_a.a_hat = 0.0;
  CHECK_THROWS_AS(optimal_bandwidth(zero_a, k, 500), NumericError);
}

TEST_CASE("plug-in errors shrink with n") {
  const Dgp dgp = Dgp::model1();
  const auto truth = dgp.constants();
  std::vector<double> med_k, med_h, med_a;
  for (std::size_t n : {1000u, 5000u, 20000u}) {
    std::vector<double> ek, eh, ea;
    for (std::uint64_t r = 0; r < 100; ++r) {
      const Sample s = draw_sample(dgp, n, derive_seed(99, {n, r}));
      const auto nu = estimate_khA(s, fit_ewm(s, ParamSpace::around(s)).t_hat);
      ek.push_back(std::abs(nu.k_hat - truth.k));
      eh.push_back(std::abs(nu.h_hat - truth.h));
      ea.push_back(std::abs(nu.a_hat - truth.a));
    }
    med_k.push_back(median(ek));
    med_h.push_back(median(eh));
    med_a.push_back(median(ea));
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(med_k[i + 1] <= med_k[i]);
    CHECK(med_h[i + 1] <= med_h[i]);
    CHECK(med_a[i + 1] <= med_a[i]);
  }
}
