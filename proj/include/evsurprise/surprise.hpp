#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evsurprise/gpd.hpp"
#include "evsurprise/mcmc.hpp"
#include "evsurprise/point_set.hpp"
#include "evsurprise/rng.hpp"
#include "evsurprise/spectral.hpp"

namespace evsurprise {

enum class StatisticKind { neg_log_likelihood, maximum, empirical_quantile };

/// Test statistic T(y). Large values count as surprising.
struct TestStatisticSpec {
  StatisticKind kind = StatisticKind::neg_log_likelihood;
  // j-th order statistic (1-based); set iff kind == empirical_quantile.
  std::optional<std::size_t> quantile_index;

  static TestStatisticSpec neg_log_likelihood() { return {}; }
  static TestStatisticSpec maximum() { return {StatisticKind::maximum, std::nullopt}; }
  static TestStatisticSpec empirical_quantile(std::size_t j) {
    return {StatisticKind::empirical_quantile, j};
  }

  // Throws UsageError for an inconsistent spec or j outside [1, n].
  void validate(std::size_t n) const;
  // 1-based order index used for a sample of size n (n for the maximum).
  [[nodiscard]] std::size_t order_index(std::size_t n) const;
  [[nodiscard]] bool depends_on_parameters() const {
    return kind == StatisticKind::neg_log_likelihood;
  }
  [[nodiscard]] std::string name() const;
};

struct PValueEstimate {
  double p = 0.0;
  double mc_se = 0.0;
  std::size_t n_rep = 0;
  std::size_t n_obs = 0;
  // Ties T(y_rep) == T(y_obs) were counted toward p.
  bool ties_counted = true;
};

PValueEstimate make_estimate(std::size_t exceed, std::size_t n_rep, std::size_t n_obs);

/// A parametric model that can score and simulate datasets.
class PredictiveModel {
 public:
  virtual ~PredictiveModel() = default;
  [[nodiscard]] virtual std::size_t data_dim() const = 0;
  // log f(y | theta), -inf when a point is off-support.
  [[nodiscard]] virtual double log_likelihood(std::span<const double> theta, const PointSet& y) const = 0;
  // Same as log_likelihood up to a term that depends only on (theta, n).
  // Comparisons at a common theta and sample size may use it instead.
  [[nodiscard]] virtual double comparison_log_likelihood(std::span<const double> theta,
                                                         const PointSet& y) const {
    return log_likelihood(theta, y);
  }
  [[nodiscard]] virtual PointSet simulate(std::span<const double> theta, std::size_t n, Rng& rng) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

// Univariate GPD with fixed threshold; theta = (xi, sigma).
class GpdModel final : public PredictiveModel {
 public:
  explicit GpdModel(double threshold) : u_(threshold) {}
  [[nodiscard]] std::size_t data_dim() const override { return 1; }
  [[nodiscard]] double log_likelihood(std::span<const double> theta, const PointSet& y) const override;
  [[nodiscard]] PointSet simulate(std::span<const double> theta, std::size_t n, Rng& rng) const override;
  [[nodiscard]] std::string name() const override { return "gpd"; }
  [[nodiscard]] double threshold() const { return u_; }
  [[nodiscard]] GpdParams params(std::span<const double> theta) const;

 private:
  double u_;
};

// Normalized angular density; theta is the family's natural parameter vector.
class AngularModel final : public PredictiveModel {
 public:
  AngularModel(SpectralFamily family, std::size_t dim) : family_(family), dim_(dim) {}
  [[nodiscard]] std::size_t data_dim() const override { return dim_; }
  [[nodiscard]] double log_likelihood(std::span<const double> theta, const PointSet& y) const override;
  [[nodiscard]] double comparison_log_likelihood(std::span<const double> theta,
                                                 const PointSet& y) const override;
  [[nodiscard]] PointSet simulate(std::span<const double> theta, std::size_t n, Rng& rng) const override;
  [[nodiscard]] std::string name() const override { return to_string(family_); }
  [[nodiscard]] SpectralModelSpec spec(std::span<const double> theta) const;

 private:
  SpectralFamily family_;
  std::size_t dim_;
};

// Discrepancy -log f(y | theta); +inf when y is off-support under theta.
double discrepancy(const PointSet& y, std::span<const double> theta, const PredictiveModel& model);

// Value of a parameter-free statistic (maximum / empirical quantile) for
// univariate data. Throws UsageError otherwise.
double statistic_value(const PointSet& y, const TestStatisticSpec& stat);

/// Posterior predictive p-value.
///
/// One replicate of size n_obs per draw; replicate i uses the stream
/// rng.split(i), so the estimate does not depend on `workers`.
PValueEstimate posterior_predictive_pvalue(const PosteriorDraws& draws, const PointSet& y_obs,
                                           const TestStatisticSpec& stat,
                                           const PredictiveModel& model, const Rng& rng,
                                           std::size_t workers = 1);

// log density of the j-th of n order statistics under the GPD.
double order_statistic_log_density(double t, std::size_t j, std::size_t n, const GpdParams& p);

// Full posterior minus the log density of the observed test statistic.
double partial_posterior_log_target(const GpdParams& theta, const ExceedanceSet& y_obs,
                                    const TestStatisticSpec& stat);

/// Partial posterior predictive p-value: for each draw, the j-th order
/// statistic of a fresh size-n GPD sample (stream rng.split(i)) is compared
/// with the observed one. Draws are (xi, sigma) at threshold y_obs.threshold().
PValueEstimate partial_posterior_pvalue(const PosteriorDraws& partial_draws,
                                        const ExceedanceSet& y_obs, const TestStatisticSpec& stat,
                                        const Rng& rng, std::size_t workers = 1);

struct PriorSampler {
  std::function<std::vector<double>(Rng&)> draw;
  bool proper = true;
};

// The Jeffreys prior is improper; prior predictive checks reject it.
PriorSampler jeffreys_prior_sampler();

/// Prior predictive p-value with `n_draws` prior draws. Parameter draw i uses
/// rng.split(kPriorStreamKey).split(i) and its replicate uses rng.split(i),
/// matching the posterior version's replicate streams.
inline constexpr std::uint64_t kPriorStreamKey = 0x7072696f72ULL;
PValueEstimate prior_predictive_pvalue(const PriorSampler& prior, std::size_t n_draws,
                                       const PointSet& y_obs, const TestStatisticSpec& stat,
                                       const PredictiveModel& model, const Rng& rng);

}  // namespace evsurprise
