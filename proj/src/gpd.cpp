#include "evsurprise/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "evsurprise/error.hpp"
#include "nelder_mead.hpp"

namespace evsurprise {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_scale(const GpdParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.xi))
    throw DomainError("generalized Pareto scale must be positive and finite");
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ExceedanceSet::ExceedanceSet(std::span<const double> observations, double threshold)
    : threshold_(threshold) {
  for (double y : observations)
    if (y > threshold) values_.push_back(y);
  std::sort(values_.begin(), values_.end());
}

double gpd_upper_endpoint(const GpdParams& p) {
  return p.xi < -kXiTolerance ? p.u - p.sigma / p.xi : kInf;
}

double gpd_log_survival(double y, const GpdParams& p) {
  check_scale(p);
  if (y <= p.u) return 0.0;
  const double z = (y - p.u) / p.sigma;
  if (std::abs(p.xi) < kXiTolerance) return -z;
  const double t = p.xi * z;
  if (t <= -1.0) return -kInf;
  return -std::log1p(t) / p.xi;
}

double gpd_cdf(double y, const GpdParams& p) {
  const double log_s = gpd_log_survival(y, p);
  return -std::expm1(log_s);
}

double gpd_log_density(double y, const GpdParams& p) {
  check_scale(p);
  if (y < p.u) return -kInf;
  const double z = (y - p.u) / p.sigma;
  if (std::abs(p.xi) < kXiTolerance) return -std::log(p.sigma) - z;
  const double t = p.xi * z;
  if (t <= -1.0) return -kInf;
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * std::log1p(t);
}

double gpd_quantile(double q, const GpdParams& p) {
  check_scale(p);
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("quantile level must lie in [0, 1)");
  const double log_s = std::log1p(-q);
  if (std::abs(p.xi) < kXiTolerance) return p.u - p.sigma * log_s;
  return p.u + p.sigma / p.xi * std::expm1(-p.xi * log_s);
}

std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, Rng& rng) {
  check_scale(p);
  std::vector<double> out(n);
  for (auto& y : out) y = gpd_quantile(rng.uniform(), p);
  return out;
}

double gpd_log_likelihood(std::span<const double> y, const GpdParams& p) {
  check_scale(p);
  const double log_sigma = std::log(p.sigma);
  const bool exponential = std::abs(p.xi) < kXiTolerance;
  const double power = 1.0 + 1.0 / p.xi;
  double total = 0.0;
  for (double v : y) {
    if (v < p.u) return -kInf;
    const double z = (v - p.u) / p.sigma;
    if (exponential) {
      total -= log_sigma + z;
      continue;
    }
    const double t = p.xi * z;
    if (t <= -1.0) return -kInf;
    total -= log_sigma + power * std::log1p(t);
  }
  return total;
}

double jeffreys_log_prior(const GpdParams& p) {
  if (!(p.sigma > 0.0) || !(p.xi > -0.5)) return -kInf;
  return -std::log(p.sigma) - std::log1p(p.xi) - 0.5 * std::log1p(2.0 * p.xi);
}

double gpd_log_posterior(const GpdParams& p, const ExceedanceSet& data) {
  if (p.u != data.threshold())
    throw UsageError("posterior parameters and exceedances use different thresholds");
  const double prior = jeffreys_log_prior(p);
  if (!std::isfinite(prior)) return -kInf;
  return gpd_log_likelihood(data.values(), p) + prior;
}

GpdParams gpd_pwm(const ExceedanceSet& data) {
  const auto& y = data.values();
  const double u = data.threshold();
  const auto n = static_cast<double>(y.size());
  GpdParams fallback{0.1, std::max(sample_sd(y), 1e-8), u};
  if (y.size() < 2) return fallback;

  double a0 = 0.0, a1 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = y[i] - u;
    const double pp = (static_cast<double>(i) + 1.0 - 0.35) / n;
    a0 += x;
    a1 += (1.0 - pp) * x;
  }
  a0 /= n;
  a1 /= n;
  const double denom = a0 - 2.0 * a1;
  if (!(denom > 0.0)) return fallback;
  GpdParams p{2.0 - a0 / denom, 2.0 * a0 * a1 / denom, u};
  if (!std::isfinite(p.xi) || !(p.sigma > 0.0)) return fallback;
  p.xi = std::clamp(p.xi, -0.45, 2.0);
  if (p.xi < 0.0) {
    // keep the largest observation strictly inside the support
    const double needed = -p.xi * (data.max() - u) * 1.05;
    p.sigma = std::max(p.sigma, needed);
  }
  return p;
}

GpdParams gpd_mle(const ExceedanceSet& data, const MleOptions& options) {
  if (data.size() < 5) throw UsageError("maximum-likelihood fit needs at least 5 exceedances");
  const double sd = sample_sd(data.values());
  if (!(sd > 0.0)) throw FitError("maximum-likelihood fit failed: exceedances have no spread");

  const double u = data.threshold();
  // xi <= -0.5 is the non-regular region (and outside the prior's support);
  // U(0, s) would otherwise be fitted exactly at xi = -1
  auto objective = [&](const std::array<double, 2>& v) {
    if (!(v[0] > -0.5) || v[0] > 20.0 || std::abs(v[1]) > 700.0) return kInf;
    const double ll = gpd_log_likelihood(data.values(), GpdParams{v[0], std::exp(v[1]), u});
    return std::isfinite(ll) ? -ll : kInf;
  };

  std::vector<std::array<double, 2>> starts;
  const GpdParams pwm = gpd_pwm(data);
  starts.push_back({pwm.xi, std::log(pwm.sigma)});
  Rng rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    const double xi = -0.45 + 2.45 * rng.uniform();
    const double log_sigma = std::log(0.1 * sd) + std::log(100.0) * rng.uniform();
    starts.push_back({xi, log_sigma});
  }

  detail::SimplexResult<std::array<double, 2>> best;
  int converged = 0;
  int feasible_starts = 0;
  for (auto start : starts) {
    if (!std::isfinite(objective(start))) {
      // widen sigma until the start is on the support
      for (int k = 0; k < 60 && !std::isfinite(objective(start)); ++k) start[1] += 0.25;
      if (!std::isfinite(objective(start))) continue;
    }
    ++feasible_starts;
    auto res = detail::nelder_mead<std::array<double, 2>>(objective, start, {0.1, 0.2});
    if (res.converged) res = detail::nelder_mead<std::array<double, 2>>(objective, res.x, {0.02, 0.05});
    if (!res.converged) continue;
    ++converged;
    if (res.value < best.value) best = res;
  }
  if (converged == 0 || !std::isfinite(best.value)) {
    std::ostringstream msg;
    msg << "maximum-likelihood fit failed: " << feasible_starts << " feasible starts of "
        << starts.size() << ", none converged (n=" << data.size() << ", sd=" << sd << ")";
    throw FitError(msg.str());
  }
  return GpdParams{best.x[0], std::exp(best.x[1]), u};
}

}  // namespace evsurprise
