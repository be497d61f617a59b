#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "evsurprise/error.hpp"
#include "evsurprise/gpd.hpp"
#include "evsurprise/rng.hpp"
#include "evsurprise/surprise.hpp"
#include "oracles.hpp"

using namespace evsurprise;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

PosteriorDraws make_draws(const std::vector<std::vector<double>>& rows) {
  PosteriorDraws d;
  d.dim = rows.front().size();
  for (const auto& r : rows) d.values.insert(d.values.end(), r.begin(), r.end());
  d.n_keep = rows.size();
  return d;
}

// hand-coded pieces for the brute-force oracles
double hand_quantile(double q, double xi, double sigma, double u) {
  if (std::fabs(xi) < 1e-8) return u - sigma * std::log1p(-q);
  return u + sigma / xi * (std::pow(1.0 - q, -xi) - 1.0);
}

double hand_neg_loglik(const std::vector<double>& y, double xi, double sigma, double u) {
  double s = 0.0;
  for (double v : y) {
    const double z = (v - u) / sigma;
    if (z < 0.0 || 1.0 + xi * z <= 0.0) return kInf;
    s += std::log(sigma) + (1.0 / xi + 1.0) * std::log1p(xi * z);
  }
  return s;
}

// wraps the GPD so that the comparison value becomes 1/f instead of -log f
class ReciprocalGpd final : public PredictiveModel {
 public:
  explicit ReciprocalGpd(double u) : base_(u) {}
  std::size_t data_dim() const override { return 1; }
  double log_likelihood(std::span<const double> theta, const PointSet& y) const override {
    return base_.log_likelihood(theta, y);
  }
  double comparison_log_likelihood(std::span<const double> theta, const PointSet& y) const override {
    // library uses t = -value, so t = 1/f
    return -std::exp(-base_.log_likelihood(theta, y));
  }
  PointSet simulate(std::span<const double> theta, std::size_t n, Rng& rng) const override {
    return base_.simulate(theta, n, rng);
  }
  std::string name() const override { return "reciprocal-gpd"; }

 private:
  GpdModel base_;
};

// angular model with the density scaled by a constant c
class ScaledAngular final : public PredictiveModel {
 public:
  ScaledAngular(double log_c) : base_(SpectralFamily::logistic, 2), log_c_(log_c) {}
  std::size_t data_dim() const override { return 2; }
  double log_likelihood(std::span<const double> theta, const PointSet& y) const override {
    return base_.log_likelihood(theta, y);
  }
  double comparison_log_likelihood(std::span<const double> theta, const PointSet& y) const override {
    return base_.comparison_log_likelihood(theta, y) + log_c_ * static_cast<double>(y.rows());
  }
  PointSet simulate(std::span<const double> theta, std::size_t n, Rng& rng) const override {
    return base_.simulate(theta, n, rng);
  }
  std::string name() const override { return "scaled"; }

 private:
  AngularModel base_;
  double log_c_;
};
}  // namespace

TEST_CASE("statistic specs") {
  const TestStatisticSpec max_with_index{StatisticKind::maximum, 3};
  CHECK_THROWS_AS(max_with_index.validate(10), UsageError);
  CHECK_THROWS_AS(TestStatisticSpec::empirical_quantile(11).validate(10), UsageError);
  CHECK_THROWS_AS(TestStatisticSpec::empirical_quantile(0).validate(10), UsageError);
  CHECK(TestStatisticSpec::maximum().order_index(7) == 7);
  CHECK(TestStatisticSpec::empirical_quantile(3).order_index(7) == 3);
  const PointSet y(1, {4.0, 1.0, 3.0, 2.0});
  CHECK(statistic_value(y, TestStatisticSpec::maximum()) == 4.0);
  CHECK(statistic_value(y, TestStatisticSpec::empirical_quantile(2)) == 2.0);
}

TEST_CASE("p-value estimate mc_se") {
  const auto e = make_estimate(30, 100, 12);
  CHECK(e.p == doctest::Approx(0.3));
  CHECK(e.mc_se == doctest::Approx(std::sqrt(0.3 * 0.7 / 100.0)));
  CHECK(e.ties_counted);
}

TEST_CASE("discrepancy") {
  const GpdModel model(20.0);
  const std::vector<double> theta{0.2, 8.0};
  const PointSet close(1, {21.0, 22.0});
  const PointSet far(1, {80.0, 95.0});
  CHECK(discrepancy(close, theta, model) < discrepancy(far, theta, model));
  const std::vector<double> bounded{-0.1, 10.0};
  CHECK(discrepancy(PointSet(1, {130.0}), bounded, model) == kInf);

  const std::vector<double> y{21.5, 24.0, 33.0, 50.0};
  const ExceedanceSet ex(y, 20.0);
  const GpdParams p{0.2, 8.0, 20.0};
  CHECK(discrepancy(PointSet(1, y), theta, model) ==
        doctest::Approx(-gpd_log_posterior(p, ex) + jeffreys_log_prior(p)).epsilon(1e-12));
}

TEST_CASE("posterior predictive tiny oracle") {
  const std::vector<double> y_obs{21.0, 26.5, 40.0};
  const auto draws = make_draws({{0.2, 8.0}, {-0.05, 11.0}});
  const GpdModel model(20.0);
  for (std::uint64_t seed : {1u, 2u, 3u, 77u, 1234u}) {
    const Rng rng(seed);
    for (const auto& stat : {TestStatisticSpec::neg_log_likelihood(), TestStatisticSpec::maximum(),
                             TestStatisticSpec::empirical_quantile(2)}) {
      const auto est = posterior_predictive_pvalue(draws, PointSet(1, y_obs), stat, model, rng);
      // oracle: one replicate per draw, stream split by draw index
      std::size_t count = 0;
      for (std::size_t i = 0; i < 2; ++i) {
        const double xi = draws.draw(i)[0];
        const double sigma = draws.draw(i)[1];
        Rng s = rng.split(i);
        std::vector<double> rep;
        for (int k = 0; k < 3; ++k) rep.push_back(hand_quantile(s.uniform(), xi, sigma, 20.0));
        double t_rep = 0.0, t_obs = 0.0;
        if (stat.kind == StatisticKind::neg_log_likelihood) {
          t_rep = hand_neg_loglik(rep, xi, sigma, 20.0);
          t_obs = hand_neg_loglik(y_obs, xi, sigma, 20.0);
        } else {
          auto a = rep;
          auto b = y_obs;
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          const std::size_t j = stat.kind == StatisticKind::maximum ? 3 : 2;
          t_rep = a[j - 1];
          t_obs = b[j - 1];
        }
        if (t_rep >= t_obs) ++count;
      }
      CAPTURE(seed);
      CHECK(est.p == static_cast<double>(count) / 2.0);
      CHECK(est.n_rep == 2);
      CHECK(est.n_obs == 3);
    }
  }
}

TEST_CASE("partial posterior tiny oracle") {
  const std::vector<double> y{21.0, 26.5, 40.0};
  const ExceedanceSet ex(y, 20.0);
  const auto draws = make_draws({{0.3, 6.0}, {0.1, 12.0}});
  for (std::uint64_t seed : {1u, 5u, 9u, 31u}) {
    const Rng rng(seed);
    for (const auto& stat : {TestStatisticSpec::maximum(), TestStatisticSpec::empirical_quantile(1)}) {
      const auto est = partial_posterior_pvalue(draws, ex, stat, rng);
      std::size_t count = 0;
      const std::size_t j = stat.kind == StatisticKind::maximum ? 3 : 1;
      for (std::size_t i = 0; i < 2; ++i) {
        Rng s = rng.split(i);
        std::vector<double> rep;
        for (int k = 0; k < 3; ++k)
          rep.push_back(hand_quantile(s.uniform(), draws.draw(i)[0], draws.draw(i)[1], 20.0));
        std::sort(rep.begin(), rep.end());
        if (rep[j - 1] >= y[j - 1]) ++count;
      }
      CAPTURE(seed);
      CHECK(est.p == static_cast<double>(count) / 2.0);
    }
  }
}

TEST_CASE("p-value invariant to a monotone transform of the discrepancy") {
  Rng data_rng(4);
  const auto y = gpd_sample(40, GpdParams{0.2, 8.0, 20.0}, data_rng);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 300; ++i) rows.push_back({0.1 + 0.001 * i, 7.0 + 0.01 * i});
  const auto draws = make_draws(rows);
  const Rng rng(12);
  const auto a = posterior_predictive_pvalue(draws, PointSet(1, y), TestStatisticSpec{}, GpdModel(20.0), rng);
  const auto b = posterior_predictive_pvalue(draws, PointSet(1, y), TestStatisticSpec{}, ReciprocalGpd(20.0), rng);
  CHECK(a.p == b.p);
}

TEST_CASE("angular p-value unchanged by rescaling the density") {
  Rng data_rng(6);
  const auto w = angular_sample(60, SpectralModelSpec::logistic(0.4), data_rng);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) rows.push_back({0.3 + 0.001 * i});
  const auto draws = make_draws(rows);
  const Rng rng(3);
  const auto base = posterior_predictive_pvalue(draws, w, TestStatisticSpec{}, AngularModel(SpectralFamily::logistic, 2), rng);
  for (double log_c : {-3.0, 0.7, 12.0}) {
    const auto scaled = posterior_predictive_pvalue(draws, w, TestStatisticSpec{}, ScaledAngular(log_c), rng);
    CHECK(scaled.p == base.p);
  }
}

TEST_CASE("maximum beyond the upper endpoint gives p = 0") {
  const std::vector<double> y{22.0, 30.0, 500.0};
  const auto draws = make_draws({{-0.2, 10.0}, {-0.3, 12.0}, {-0.25, 9.0}});
  const auto est = posterior_predictive_pvalue(draws, PointSet(1, y), TestStatisticSpec::maximum(),
                                               GpdModel(20.0), Rng(1));
  CHECK(est.p == 0.0);
}

TEST_CASE("usage errors") {
  const auto draws = make_draws({{0.4}});
  const PointSet w(2, {0.3, 0.7, 0.6, 0.4});
  CHECK_THROWS_AS(posterior_predictive_pvalue(draws, w, TestStatisticSpec::empirical_quantile(1),
                                              AngularModel(SpectralFamily::logistic, 2), Rng(1)),
                  UsageError);
  CHECK_THROWS_AS(posterior_predictive_pvalue(PosteriorDraws{}, PointSet(1, {21.0}),
                                              TestStatisticSpec{}, GpdModel(20.0), Rng(1)),
                  UsageError);
  const std::vector<double> y{21.0, 22.0};
  CHECK_THROWS_AS(partial_posterior_log_target(GpdParams{0.1, 1.0, 20.0}, ExceedanceSet(y, 20.0),
                                               TestStatisticSpec{}),
                  UnsupportedError);
  CHECK_THROWS_AS(partial_posterior_pvalue(make_draws({{0.1, 1.0}}), ExceedanceSet(y, 20.0),
                                           TestStatisticSpec{}, Rng(1)),
                  UnsupportedError);
}

TEST_CASE("order statistic density") {
  const GpdParams p{0.2, 8.0, 20.0};
  for (double t : {20.5, 27.0, 60.0})
    CHECK(order_statistic_log_density(t, 1, 1, p) == doctest::Approx(gpd_log_density(t, p)).epsilon(1e-13));
  for (double t : {22.0, 35.0, 80.0}) {
    const std::size_t n = 12;
    const double expect = std::log(12.0) + gpd_log_density(t, p) + 11.0 * std::log(gpd_cdf(t, p));
    CHECK(order_statistic_log_density(t, n, n, p) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(order_statistic_log_density(19.0, 2, 5, p) == -kInf);
  CHECK_THROWS_AS(order_statistic_log_density(25.0, 0, 5, p), UsageError);

  for (auto [j, n] : {std::pair<std::size_t, std::size_t>{5, 10}, {450, 500}}) {
    CAPTURE(j);
    auto f = [&, j = j, n = n](double t) { return std::exp(order_statistic_log_density(t, j, n, p)); };
    const double mass = oracle::simpson_half_line(f, 20.0, 8.0, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }

  // mode near the matching quantile for a central index
  const std::size_t n = 101, j = 51;
  const double q = gpd_quantile(0.5, p);
  CHECK(order_statistic_log_density(q, j, n, p) > order_statistic_log_density(q - 1.0, j, n, p));
  CHECK(order_statistic_log_density(q, j, n, p) > order_statistic_log_density(q + 1.0, j, n, p));
}

TEST_CASE("partial posterior target") {
  const std::vector<double> one{27.0};
  const ExceedanceSet single(one, 20.0);
  for (const GpdParams p : {GpdParams{0.2, 8.0, 20.0}, GpdParams{-0.1, 15.0, 20.0}})
    CHECK(partial_posterior_log_target(p, single, TestStatisticSpec::maximum()) ==
          doctest::Approx(jeffreys_log_prior(p)).epsilon(1e-12));
  const std::vector<double> y{21.0, 26.0, 90.0};
  const ExceedanceSet ex(y, 20.0);
  CHECK(std::isfinite(partial_posterior_log_target(GpdParams{0.2, 8.0, 20.0}, ex, TestStatisticSpec::maximum())));
  CHECK(partial_posterior_log_target(GpdParams{-0.2, 8.0, 20.0}, ex, TestStatisticSpec::maximum()) == -kInf);
}

TEST_CASE("prior predictive") {
  const std::vector<double> theta_star{0.2, 8.0};
  const PriorSampler point{[&](Rng&) { return theta_star; }, true};
  const auto draws = make_draws(std::vector<std::vector<double>>(150, theta_star));
  Rng data_rng(2);
  const PointSet y(1, gpd_sample(25, GpdParams{0.2, 8.0, 20.0}, data_rng));
  for (const auto& stat : {TestStatisticSpec{}, TestStatisticSpec::maximum()}) {
    const auto prior = prior_predictive_pvalue(point, 150, y, stat, GpdModel(20.0), Rng(8));
    const auto post = posterior_predictive_pvalue(draws, y, stat, GpdModel(20.0), Rng(8));
    CHECK(prior.p == post.p);
  }

  // proper uniform box prior
  const PriorSampler box{[](Rng& r) {
                           return std::vector<double>{-0.2 + 0.6 * r.uniform(), 2.0 + 10.0 * r.uniform()};
                         },
                         true};
  const auto est = prior_predictive_pvalue(box, 200, y, TestStatisticSpec::maximum(), GpdModel(20.0), Rng(3));
  CHECK(est.p >= 0.0);
  CHECK(est.p <= 1.0);

  CHECK_THROWS_AS(prior_predictive_pvalue(jeffreys_prior_sampler(), 10, y, TestStatisticSpec{},
                                          GpdModel(20.0), Rng(1)),
                  UnsupportedError);
}

TEST_CASE("self-calibration with replicates from the same model") {
  // data drawn from theta*, draws all at theta*: p averages to 0.5
  const std::vector<double> theta_star{0.2, 8.0};
  const auto draws = make_draws(std::vector<std::vector<double>>(200, theta_star));
  Rng data_rng(31);
  std::vector<double> ps;
  for (int rep = 0; rep < 200; ++rep) {
    const PointSet y(1, gpd_sample(30, GpdParams{0.2, 8.0, 20.0}, data_rng));
    ps.push_back(posterior_predictive_pvalue(draws, y, TestStatisticSpec::maximum(), GpdModel(20.0),
                                             Rng(1000 + rep))
                     .p);
  }
  const double m = oracle::mean(ps);
  const double se = std::sqrt(oracle::variance(ps) / static_cast<double>(ps.size()));
  CHECK(std::fabs(m - 0.5) < 3.0 * se);
}

TEST_CASE("parallel and serial agree") {
  Rng data_rng(9);
  const auto y = gpd_sample(60, GpdParams{0.1, 5.0, 20.0}, data_rng);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 400; ++i) rows.push_back({0.05 + 0.0002 * i, 4.5 + 0.002 * i});
  const auto draws = make_draws(rows);
  for (const auto& stat : {TestStatisticSpec{}, TestStatisticSpec::maximum()}) {
    const auto a = posterior_predictive_pvalue(draws, PointSet(1, y), stat, GpdModel(20.0), Rng(5), 1);
    const auto b = posterior_predictive_pvalue(draws, PointSet(1, y), stat, GpdModel(20.0), Rng(5), 4);
    CHECK(a.p == b.p);
  }
  const ExceedanceSet ex(y, 20.0);
  CHECK(partial_posterior_pvalue(draws, ex, TestStatisticSpec::maximum(), Rng(5), 1).p ==
        partial_posterior_pvalue(draws, ex, TestStatisticSpec::maximum(), Rng(5), 3).p);
}
