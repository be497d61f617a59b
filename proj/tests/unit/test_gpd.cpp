#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "evsurprise/error.hpp"
#include "evsurprise/gpd.hpp"
#include "evsurprise/rng.hpp"
#include "oracles.hpp"

using namespace evsurprise;

namespace {
const GpdParams kBase{0.2, 8.0, 20.0};

// hand-written density, kept separate from the library
double direct_log_density(double y, double xi, double sigma, double u) {
  const double z = (y - u) / sigma;
  if (std::fabs(xi) < 1e-12) return -std::log(sigma) - z;
  return -std::log(sigma) - (1.0 / xi + 1.0) * std::log1p(xi * z);
}
}  // namespace

TEST_CASE("cdf hand values") {
  CHECK(gpd_cdf(20.0, kBase) == 0.0);
  CHECK(gpd_cdf(28.0, kBase) == doctest::Approx(1.0 - std::pow(1.2, -5.0)).epsilon(1e-12));
  CHECK(gpd_cdf(28.0, kBase) == doctest::Approx(0.598122).epsilon(1e-6));
  CHECK(gpd_cdf(28.0, GpdParams{0.0, 8.0, 20.0}) == doctest::Approx(0.632121).epsilon(1e-6));
  CHECK(gpd_cdf(10.0, kBase) == 0.0);
  CHECK(gpd_cdf(130.0, GpdParams{-0.1, 10.0, 20.0}) == 1.0);
}

TEST_CASE("log density hand values and support") {
  CHECK(gpd_log_density(20.0, kBase) == doctest::Approx(-std::log(8.0)).epsilon(1e-12));
  CHECK(gpd_log_density(20.0, kBase) == doctest::Approx(-2.07944).epsilon(1e-5));
  const GpdParams bounded{-0.1, 10.0, 20.0};
  CHECK(std::isfinite(gpd_log_density(30.0, bounded)));
  CHECK(gpd_log_density(121.0, bounded) == -std::numeric_limits<double>::infinity());
  CHECK(gpd_upper_endpoint(bounded) == doctest::Approx(120.0));
  CHECK(gpd_log_density(19.0, kBase) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("density integrates to one") {
  for (double xi : {-0.3, -0.1, 0.0, 0.2, 0.8}) {
    CAPTURE(xi);
    const GpdParams p{xi, 8.0, 20.0};
    auto f = [&](double y) { return std::exp(gpd_log_density(y, p)); };
    double total = 0.0;
    if (xi < 0.0) {
      total = oracle::simpson(f, 20.0, gpd_upper_endpoint(p), 1e-12);
    } else {
      total = oracle::simpson_half_line(f, 20.0, 8.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("quantile inverts cdf") {
  CHECK(gpd_quantile(0.0, kBase) == 20.0);
  CHECK(gpd_quantile(1.0 - std::pow(1.2, -5.0), kBase) == doctest::Approx(28.0).epsilon(1e-12));
  CHECK(gpd_quantile(0.598122, kBase) == doctest::Approx(28.0).epsilon(1e-5));
  for (double xi : {-0.4, -0.1, 0.0, 1e-9, 0.2, 0.8}) {
    const GpdParams p{xi, 3.0, 1.0};
    for (double q = 0.001; q < 1.0; q += 0.0371) {
      CAPTURE(xi);
      CAPTURE(q);
      CHECK(std::fabs(gpd_cdf(gpd_quantile(q, p), p) - q) < 1e-10);
    }
  }
}

TEST_CASE("xi to zero continuity") {
  const GpdParams exp_case{0.0, 8.0, 20.0};
  for (double y : {20.5, 25.0, 40.0, 90.0}) {
    for (double eps : {1e-9, -1e-9, 1e-10}) {
      const GpdParams near{eps, 8.0, 20.0};
      CHECK(std::fabs(gpd_cdf(y, near) - gpd_cdf(y, exp_case)) < 1e-8);
      CHECK(std::fabs(gpd_log_density(y, near) - gpd_log_density(y, exp_case)) < 1e-8);
    }
  }
  CHECK(std::fabs(gpd_quantile(0.9, GpdParams{1e-9, 8.0, 20.0}) -
                  gpd_quantile(0.9, exp_case)) < 1e-6);
}

TEST_CASE("sampler matches cdf") {
  Rng rng(2024);
  CHECK(gpd_sample(0, kBase, rng).empty());
  const auto draws = gpd_sample(100000, kBase, rng);
  const double d = oracle::ks_distance(draws, [](double y) { return gpd_cdf(y, kBase); });
  CHECK(d < oracle::ks_critical_1pct(draws.size()));

  const GpdParams bounded{-0.1, 10.0, 20.0};
  for (double y : gpd_sample(20000, bounded, rng)) REQUIRE(y < 120.0);
}

TEST_CASE("sampler is deterministic given seed") {
  Rng a(7);
  Rng b(7);
  CHECK(gpd_sample(50, kBase, a) == gpd_sample(50, kBase, b));
}

TEST_CASE("jeffreys prior") {
  CHECK(jeffreys_log_prior(GpdParams{0.0, 1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(jeffreys_log_prior(GpdParams{-0.6, 1.0, 0.0}) == -std::numeric_limits<double>::infinity());
  CHECK(jeffreys_log_prior(GpdParams{0.5, 2.0, 0.0}) ==
        doctest::Approx(-std::log(2.0) - std::log(1.5) - 0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(jeffreys_log_prior(GpdParams{0.5, 2.0, 0.0}) == doctest::Approx(-1.44519).epsilon(1e-5));
  CHECK(jeffreys_log_prior(GpdParams{0.1, -1.0, 0.0}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log posterior against direct evaluation") {
  const std::vector<double> y{21.0, 23.5, 27.25, 35.0, 60.125};
  const ExceedanceSet data(y, 20.0);
  for (const GpdParams p : {GpdParams{0.2, 8.0, 20.0}, GpdParams{-0.2, 15.0, 20.0},
                            GpdParams{0.0, 5.0, 20.0}}) {
    double expect = -std::log(p.sigma) - std::log1p(p.xi) - 0.5 * std::log1p(2.0 * p.xi);
    for (double v : y) expect += direct_log_density(v, p.xi, p.sigma, p.u);
    CHECK(std::fabs(gpd_log_posterior(p, data) - expect) < 1e-12);
  }
  // two points: additivity
  const std::vector<double> two{22.0, 31.0};
  const ExceedanceSet pair(two, 20.0);
  CHECK(gpd_log_posterior(kBase, pair) ==
        doctest::Approx(gpd_log_density(22.0, kBase) + gpd_log_density(31.0, kBase) +
                        jeffreys_log_prior(kBase)));
  // beyond the upper endpoint
  CHECK(gpd_log_posterior(GpdParams{-0.4, 10.0, 20.0}, data) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("exceedance set keeps strict exceedances sorted") {
  const std::vector<double> y{5.0, 30.0, 20.0, 25.0, 21.0};
  const ExceedanceSet s(y, 20.0);
  CHECK(s.size() == 3);
  CHECK(s.values() == std::vector<double>{21.0, 25.0, 30.0});
  CHECK(s.max() == 30.0);
}

TEST_CASE("mle recovers generating values") {
  Rng rng(99);
  const auto y = gpd_sample(100000, kBase, rng);
  const auto fit = gpd_mle(ExceedanceSet(y, 20.0));
  CHECK(std::fabs(fit.xi - 0.2) < 0.02);
  CHECK(std::fabs(fit.sigma - 8.0) < 0.2);
  CHECK(fit.u == 20.0);
}

TEST_CASE("mle on exact quantiles") {
  const GpdParams truth{0.15, 4.0, 0.0};
  std::vector<double> y;
  const std::size_t n = 2000;
  for (std::size_t i = 1; i <= n; ++i)
    y.push_back(gpd_quantile((static_cast<double>(i) - 0.5) / static_cast<double>(n), truth));
  const auto fit = gpd_mle(ExceedanceSet(y, 0.0));
  CHECK(std::fabs(fit.xi - truth.xi) < 0.01);
  CHECK(std::fabs(fit.sigma - truth.sigma) < 0.05);
}

TEST_CASE("mle on constant data fails") {
  const std::vector<double> y(50, 25.0);
  CHECK_THROWS_AS(gpd_mle(ExceedanceSet(y, 20.0)), FitError);
}
