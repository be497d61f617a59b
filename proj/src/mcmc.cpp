#include "evsurprise/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evsurprise/error.hpp"
#include "evsurprise/rng.hpp"

namespace evsurprise {

void McmcConfig::validate(std::size_t dim) const {
  if (n_keep < 100) throw UsageError("MCMC needs n_keep >= 100");
  if (initial_scale.size() != dim)
    throw UsageError("MCMC needs one initial proposal scale per coordinate");
  for (double s : initial_scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("MCMC proposal scales must be positive");
  const double target = target_for(dim);
  if (!(target > 0.0 && target < 1.0)) throw UsageError("target acceptance must lie in (0, 1)");
}

std::vector<double> PosteriorDraws::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i * dim + k];
  return out;
}

std::vector<double> PosteriorDraws::mean() const {
  std::vector<double> m(dim, 0.0);
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) m[k] += values[i * dim + k];
  for (auto& v : m) v /= static_cast<double>(std::max<std::size_t>(n, 1));
  return m;
}

std::vector<double> PosteriorDraws::sd() const {
  const auto m = mean();
  std::vector<double> s(dim, 0.0);
  const std::size_t n = size();
  if (n < 2) return s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = values[i * dim + k] - m[k];
      s[k] += d * d;
    }
  for (auto& v : s) v = std::sqrt(v / static_cast<double>(n - 1));
  return s;
}

PosteriorDraws run_chain(const LogTarget& log_target, std::vector<double> init,
                         const McmcConfig& cfg) {
  const std::size_t dim = init.size();
  if (dim == 0) throw UsageError("MCMC needs at least one coordinate");
  cfg.validate(dim);

  double current = log_target(init);
  if (!std::isfinite(current) || std::isnan(current))
    throw InitializationError("log target is not finite at the initial point");

  Rng rng(cfg.seed);
  std::vector<double> scale = cfg.initial_scale;
  double log_multiplier = 0.0;
  const double target = cfg.target_for(dim);
  const std::size_t reset_at = cfg.n_burn / 2;
  const std::size_t window_start = cfg.n_burn / 4;
  const bool can_reset = cfg.adapt && cfg.n_burn >= 40;

  std::vector<double> window_sum(dim, 0.0), window_sq(dim, 0.0);
  std::size_t window_count = 0;

  PosteriorDraws out;
  out.dim = dim;
  out.seed = cfg.seed;
  out.n_burn = cfg.n_burn;
  out.n_keep = cfg.n_keep;
  out.values.reserve(cfg.n_keep * dim);

  std::vector<double> proposal(dim);
  std::size_t accepted_kept = 0;
  const std::size_t total = cfg.n_burn + cfg.n_keep;
  for (std::size_t t = 0; t < total; ++t) {
    const bool burning = t < cfg.n_burn;
    if (t == cfg.n_burn) out.scale_at_burn_end = scale;
    const double mult = std::exp(log_multiplier);
    for (std::size_t k = 0; k < dim; ++k) proposal[k] = init[k] + mult * scale[k] * rng.normal();
    const double cand = log_target(proposal);
    double log_alpha = -std::numeric_limits<double>::infinity();
    if (std::isfinite(cand)) log_alpha = cand - current;
    const double u = rng.uniform();
    const bool accept = std::log(u) < log_alpha;
    if (accept) {
      init.swap(proposal);
      current = cand;
    }

    if (burning) {
      if (cfg.adapt) {
        const double a = std::isfinite(log_alpha) ? std::min(1.0, std::exp(log_alpha)) : 0.0;
        log_multiplier += (a - target) / std::pow(static_cast<double>(t) + 1.0, 0.6);
        log_multiplier = std::clamp(log_multiplier, -30.0, 30.0);
      }
      if (can_reset && t >= window_start && t < reset_at) {
        for (std::size_t k = 0; k < dim; ++k) {
          window_sum[k] += init[k];
          window_sq[k] += init[k] * init[k];
        }
        ++window_count;
      }
      if (can_reset && t + 1 == reset_at && window_count > 1) {
        const double n = static_cast<double>(window_count);
        for (std::size_t k = 0; k < dim; ++k) {
          const double m = window_sum[k] / n;
          const double var = (window_sq[k] - n * m * m) / (n - 1.0);
          if (var > 0.0 && std::isfinite(var))
            scale[k] = std::sqrt(var) * 2.38 / std::sqrt(static_cast<double>(dim));
          else
            scale[k] *= std::exp(log_multiplier);
        }
        log_multiplier = 0.0;
      }
    } else {
      if (accept) ++accepted_kept;
      out.values.insert(out.values.end(), init.begin(), init.end());
    }
  }
  if (cfg.n_burn == 0) out.scale_at_burn_end = scale;
  const double mult = std::exp(log_multiplier);
  out.scale_at_end = scale;
  for (auto& s : out.scale_at_end) s *= mult;
  for (auto& s : out.scale_at_burn_end) s *= mult;

  out.acceptance_rate = static_cast<double>(accepted_kept) / static_cast<double>(cfg.n_keep);
  out.low_acceptance = out.acceptance_rate < 0.01;
  out.ess.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) out.ess[k] = effective_sample_size(out.column(k)).ess;
  return out;
}

PosteriorDraws map_draws(const PosteriorDraws& draws, std::size_t out_dim,
                         const std::function<void(std::span<const double>, std::span<double>)>& fn) {
  PosteriorDraws out = draws;
  out.dim = out_dim;
  out.values.assign(draws.size() * out_dim, 0.0);
  for (std::size_t i = 0; i < draws.size(); ++i)
    fn(draws.draw(i), std::span<double>(out.values.data() + i * out_dim, out_dim));
  if (out_dim != draws.dim) {
    out.ess.assign(out_dim, 0.0);
    for (std::size_t k = 0; k < out_dim; ++k) out.ess[k] = effective_sample_size(out.column(k)).ess;
  }
  return out;
}

EssResult effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 100) throw UsageError("effective sample size needs a chain of length >= 100");
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(chain.begin(), chain.end());
  for (auto& v : c) v -= mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) return {0.0, true};

  // Sum of positive, monotonically non-increasing pair sums.
  double sum_pairs = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = autocov(2 * m) + autocov(2 * m + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum_pairs += pair;
  }
  const double tau = (-gamma0 + 2.0 * sum_pairs) / gamma0;
  const auto nn = static_cast<double>(n);
  if (!(tau > 0.0)) return {nn, false};
  return {std::min(nn, nn / tau), false};
}

}  // namespace evsurprise
