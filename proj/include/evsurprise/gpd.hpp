#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evsurprise/rng.hpp"

namespace evsurprise {

// Below this |xi| the exponential limit is used in cdf/density/quantile.
inline constexpr double kXiTolerance = 1e-8;

/// Generalized Pareto tail model above threshold `u`.
struct GpdParams {
  double xi = 0.0;
  double sigma = 1.0;
  double u = 0.0;

  friend bool operator==(const GpdParams&, const GpdParams&) = default;
};

/// Observations strictly above a threshold, sorted ascending.
class ExceedanceSet {
 public:
  ExceedanceSet() = default;
  ExceedanceSet(std::span<const double> observations, double threshold);

  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double threshold() const { return threshold_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool empty() const { return values_.empty(); }
  [[nodiscard]] double max() const { return values_.back(); }

 private:
  std::vector<double> values_;
  double threshold_ = 0.0;
};

// Upper end of the support: u - sigma/xi for xi < 0, +inf otherwise.
double gpd_upper_endpoint(const GpdParams& p);

double gpd_cdf(double y, const GpdParams& p);
// log(1 - F(y)); 0 below u and -inf at or beyond a finite upper endpoint.
double gpd_log_survival(double y, const GpdParams& p);
double gpd_log_density(double y, const GpdParams& p);
double gpd_quantile(double q, const GpdParams& p);
std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, Rng& rng);

// Sum of log densities; -inf as soon as one point is off-support.
double gpd_log_likelihood(std::span<const double> y, const GpdParams& p);

// Jeffreys prior, up to an additive constant:
//   -log sigma - log(1 + xi) - 0.5 log(1 + 2 xi)   for xi > -0.5, sigma > 0.
double jeffreys_log_prior(const GpdParams& p);

// Throws UsageError if p.u differs from data.threshold().
double gpd_log_posterior(const GpdParams& p, const ExceedanceSet& data);

// Probability-weighted-moment estimate, used as a chain start and as an
// optimizer start. Falls back to xi = 0.1, sigma = sd(data) when the moment
// equations give an invalid point.
GpdParams gpd_pwm(const ExceedanceSet& data);

struct MleOptions {
  int restarts = 5;
  std::uint64_t seed = 0x6d6c65u;
};

/// Maximum-likelihood fit with u fixed at data.threshold().
///
/// Nelder-Mead on (xi, log sigma) from the PWM estimate plus `restarts`
/// random starts with xi in (-0.45, 2) and sigma in (0.1 sd, 10 sd). The best
/// converged optimum wins; xi is kept above -0.5. Throws FitError with
/// diagnostics when no start converges, or when the data have no spread.
GpdParams gpd_mle(const ExceedanceSet& data, const MleOptions& options = {});

}  // namespace evsurprise
