#include "evsurprise/surprise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evsurprise/error.hpp"
#include "parallel.hpp"

namespace evsurprise {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double jth_smallest(std::vector<double> v, std::size_t j) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(j - 1), v.end());
  return v[j - 1];
}

void check_univariate(const PointSet& y, const TestStatisticSpec& stat) {
  if (stat.kind != StatisticKind::neg_log_likelihood && y.dim != 1)
    throw UsageError("statistic '" + stat.name() + "' is only defined for univariate data");
}

// Shared replicate loop for prior and posterior predictive p-values.
template <class ThetaOf>
PValueEstimate predictive_pvalue(std::size_t n_draws, ThetaOf&& theta_of, const PointSet& y_obs,
                                 const TestStatisticSpec& stat, const PredictiveModel& model,
                                 const Rng& rng, std::size_t workers) {
  if (n_draws == 0) throw UsageError("predictive p-value needs at least one parameter draw");
  if (y_obs.empty()) throw UsageError("predictive p-value needs observed data");
  if (model.data_dim() != y_obs.dim)
    throw UsageError("model '" + model.name() + "' does not match the data dimension");
  check_univariate(y_obs, stat);
  const std::size_t n = y_obs.rows();
  stat.validate(n);

  const bool discrepancy_stat = stat.depends_on_parameters();
  const double fixed_obs = discrepancy_stat ? 0.0 : statistic_value(y_obs, stat);

  std::vector<unsigned char> exceed(n_draws, 0);
  detail::parallel_for(n_draws, workers, [&](std::size_t i) {
    const std::vector<double> theta = theta_of(i);
    Rng stream = rng.split(i);
    const PointSet rep = model.simulate(theta, n, stream);
    double t_obs = fixed_obs;
    double t_rep = 0.0;
    if (discrepancy_stat) {
      const double ll_obs = model.comparison_log_likelihood(theta, y_obs);
      const double ll_rep = model.comparison_log_likelihood(theta, rep);
      t_obs = std::isfinite(ll_obs) ? -ll_obs : kInf;
      t_rep = std::isfinite(ll_rep) ? -ll_rep : kInf;
    } else {
      t_rep = statistic_value(rep, stat);
    }
    exceed[i] = t_rep >= t_obs ? 1 : 0;
  });
  std::size_t count = 0;
  for (auto e : exceed) count += e;
  return make_estimate(count, n_draws, n);
}

}  // namespace

void TestStatisticSpec::validate(std::size_t n) const {
  const bool needs_index = kind == StatisticKind::empirical_quantile;
  if (needs_index != quantile_index.has_value())
    throw UsageError("quantile index must be given exactly for the empirical-quantile statistic");
  if (needs_index && (*quantile_index < 1 || *quantile_index > n))
    throw UsageError("quantile index " + std::to_string(*quantile_index) + " outside [1, " +
                     std::to_string(n) + "]");
}

std::size_t TestStatisticSpec::order_index(std::size_t n) const {
  switch (kind) {
    case StatisticKind::maximum:
      return n;
    case StatisticKind::empirical_quantile:
      validate(n);
      return *quantile_index;
    case StatisticKind::neg_log_likelihood:
      break;
  }
  throw UsageError("the negative log-likelihood is not an order statistic");
}

std::string TestStatisticSpec::name() const {
  switch (kind) {
    case StatisticKind::neg_log_likelihood:
      return "negloglik";
    case StatisticKind::maximum:
      return "max";
    case StatisticKind::empirical_quantile:
      return "quantile:" + std::to_string(quantile_index.value_or(0));
  }
  return "unknown";
}

PValueEstimate make_estimate(std::size_t exceed, std::size_t n_rep, std::size_t n_obs) {
  PValueEstimate out;
  out.n_rep = n_rep;
  out.n_obs = n_obs;
  out.p = static_cast<double>(exceed) / static_cast<double>(n_rep);
  out.mc_se = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(n_rep));
  return out;
}

GpdParams GpdModel::params(std::span<const double> theta) const {
  if (theta.size() != 2) throw UsageError("GPD parameter vector is (xi, sigma)");
  return {theta[0], theta[1], u_};
}

double GpdModel::log_likelihood(std::span<const double> theta, const PointSet& y) const {
  if (y.dim != 1) throw UsageError("GPD model needs univariate data");
  return gpd_log_likelihood(y.values, params(theta));
}

PointSet GpdModel::simulate(std::span<const double> theta, std::size_t n, Rng& rng) const {
  return PointSet(1, gpd_sample(n, params(theta), rng));
}

SpectralModelSpec AngularModel::spec(std::span<const double> theta) const {
  return SpectralModelSpec::from_vector(family_, theta, dim_);
}

double AngularModel::log_likelihood(std::span<const double> theta, const PointSet& y) const {
  return angular_log_likelihood(spec(theta), y);
}

double AngularModel::comparison_log_likelihood(std::span<const double> theta,
                                               const PointSet& y) const {
  const auto s = spec(theta);
  if (y.dim != dim_) throw UsageError("data and model differ in dimension");
  double total = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) total += angular_log_density(y.row(i), s);
  return total;
}

PointSet AngularModel::simulate(std::span<const double> theta, std::size_t n, Rng& rng) const {
  return angular_sample(n, spec(theta), rng);
}

double discrepancy(const PointSet& y, std::span<const double> theta, const PredictiveModel& model) {
  const double ll = model.log_likelihood(theta, y);
  return std::isfinite(ll) ? -ll : kInf;
}

double statistic_value(const PointSet& y, const TestStatisticSpec& stat) {
  check_univariate(y, stat);
  if (y.empty()) throw UsageError("statistic of an empty dataset");
  return jth_smallest(y.values, stat.order_index(y.rows()));
}

PValueEstimate posterior_predictive_pvalue(const PosteriorDraws& draws, const PointSet& y_obs,
                                           const TestStatisticSpec& stat,
                                           const PredictiveModel& model, const Rng& rng,
                                           std::size_t workers) {
  return predictive_pvalue(
      draws.size(),
      [&](std::size_t i) {
        auto d = draws.draw(i);
        return std::vector<double>(d.begin(), d.end());
      },
      y_obs, stat, model, rng, workers);
}

double order_statistic_log_density(double t, std::size_t j, std::size_t n, const GpdParams& p) {
  if (j < 1 || j > n) throw UsageError("order statistic index outside [1, n]");
  const double log_f = gpd_log_density(t, p);
  if (!std::isfinite(log_f)) return -kInf;
  const double log_s = gpd_log_survival(t, p);
  const auto jd = static_cast<double>(j);
  const auto nd = static_cast<double>(n);
  double out = std::lgamma(nd + 1.0) - std::lgamma(jd) - std::lgamma(nd - jd + 1.0) + log_f;
  if (j > 1) {
    const double log_cdf = std::log(-std::expm1(log_s));
    out += (jd - 1.0) * log_cdf;
  }
  if (j < n) out += (nd - jd) * log_s;
  return std::isnan(out) ? -kInf : out;
}

double partial_posterior_log_target(const GpdParams& theta, const ExceedanceSet& y_obs,
                                    const TestStatisticSpec& stat) {
  if (stat.kind == StatisticKind::neg_log_likelihood)
    throw UnsupportedError(
        "the partial posterior needs a statistic with a known density (max or quantile)");
  const std::size_t n = y_obs.size();
  if (n == 0) throw UsageError("partial posterior needs observed exceedances");
  const std::size_t j = stat.order_index(n);
  const double log_post = gpd_log_posterior(theta, y_obs);
  if (!std::isfinite(log_post)) return -kInf;
  const double t_obs = y_obs.values()[j - 1];
  const double log_t = order_statistic_log_density(t_obs, j, n, theta);
  if (!std::isfinite(log_t)) return -kInf;
  return log_post - log_t;
}

PValueEstimate partial_posterior_pvalue(const PosteriorDraws& partial_draws,
                                        const ExceedanceSet& y_obs, const TestStatisticSpec& stat,
                                        const Rng& rng, std::size_t workers) {
  if (stat.kind == StatisticKind::neg_log_likelihood)
    throw UnsupportedError("partial posterior p-values need the max or quantile statistic");
  if (partial_draws.size() == 0 || partial_draws.dim != 2)
    throw UsageError("partial posterior p-value needs (xi, sigma) draws");
  const std::size_t n = y_obs.size();
  if (n == 0) throw UsageError("partial posterior p-value needs observed exceedances");
  const std::size_t j = stat.order_index(n);
  const double t_obs = y_obs.values()[j - 1];
  const double u = y_obs.threshold();

  std::vector<unsigned char> exceed(partial_draws.size(), 0);
  detail::parallel_for(partial_draws.size(), workers, [&](std::size_t i) {
    const auto d = partial_draws.draw(i);
    Rng stream = rng.split(i);
    auto rep = gpd_sample(n, GpdParams{d[0], d[1], u}, stream);
    exceed[i] = jth_smallest(std::move(rep), j) >= t_obs ? 1 : 0;
  });
  std::size_t count = 0;
  for (auto e : exceed) count += e;
  return make_estimate(count, partial_draws.size(), n);
}

PriorSampler jeffreys_prior_sampler() {
  return PriorSampler{[](Rng&) -> std::vector<double> {
                        throw UnsupportedError("the Jeffreys prior is improper and cannot be sampled");
                      },
                      false};
}

PValueEstimate prior_predictive_pvalue(const PriorSampler& prior, std::size_t n_draws,
                                       const PointSet& y_obs, const TestStatisticSpec& stat,
                                       const PredictiveModel& model, const Rng& rng) {
  if (!prior.proper || !prior.draw)
    throw UnsupportedError("prior predictive p-values need a proper prior");
  const Rng prior_stream = rng.split(kPriorStreamKey);
  return predictive_pvalue(
      n_draws,
      [&](std::size_t i) {
        Rng s = prior_stream.split(i);
        return prior.draw(s);
      },
      y_obs, stat, model, rng, 1);
}

}  // namespace evsurprise
