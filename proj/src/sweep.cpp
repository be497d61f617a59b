#include "evsurprise/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "evsurprise/error.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"

namespace evsurprise {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

McmcConfig with_defaults(McmcConfig cfg, std::size_t dim, double scale) {
  if (cfg.initial_scale.empty()) cfg.initial_scale.assign(dim, scale);
  return cfg;
}

std::vector<double> gpd_start(const ExceedanceSet& data, const std::function<double(std::span<const double>)>& target) {
  const GpdParams pwm = gpd_pwm(data);
  std::vector<double> init{pwm.xi, std::log(pwm.sigma)};
  if (std::isfinite(target(init))) return init;
  double sd = 0.0;
  {
    const auto& v = data.values();
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double x : v) sd += (x - m) * (x - m);
    sd = std::sqrt(sd / static_cast<double>(std::max<std::size_t>(v.size() - 1, 1)));
  }
  init = {0.1, std::log(std::max(sd, 1e-6))};
  for (int k = 0; k < 80 && !std::isfinite(target(init)); ++k) init[1] += 0.25;
  return init;
}

PosteriorDraws to_natural_gpd(const PosteriorDraws& raw) {
  return map_draws(raw, 2, [](std::span<const double> in, std::span<double> out) {
    out[0] = in[0];
    out[1] = std::exp(in[1]);
  });
}

ChainSummary summarize(const PosteriorDraws& draws) {
  return {draws.acceptance_rate, draws.ess, draws.mean(), draws.sd()};
}

std::string too_few(std::size_t n, std::size_t min_exc) {
  std::ostringstream s;
  s << n << " exceedances, fewer than the minimum of " << min_exc;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TestStatisticSpec resolve_stat(const SweepConfig& cfg, std::size_t n) {
  if (cfg.quantile_fraction) {
    const auto j = static_cast<std::size_t>(std::ceil(*cfg.quantile_fraction * static_cast<double>(n) - 1e-9));
    return TestStatisticSpec::empirical_quantile(std::clamp<std::size_t>(j, 1, n));
  }
  cfg.stat.validate(n);
  return cfg.stat;
}


// Two candidate starts on the unconstrained scale, each polished by
// Nelder-Mead on the log target: the prior mean (log-shapes nudged apart per
// component) and a moment fit to quantile groups of the first coordinate.
// Random-walk chains from the prior mean alone often settle in a poor local
// mode of the mixture posterior within a short burn-in.
std::vector<double> dirichlet_start(const PointSet& w, std::size_t comps, const LogTarget& target) {
  const std::size_t d = w.dim;
  const std::size_t free_weights = comps - 1;
  const std::size_t raw_dim = free_weights + comps * d;
  const double lo = std::log(0.11), hi = std::log(99.0);

  std::vector<double> prior_start(raw_dim, 0.0);
  const double centre = 0.5 * (std::log(0.1) + std::log(100.0));
  for (std::size_t i = 0; i < comps; ++i)
    for (std::size_t k = 0; k < d; ++k)
      prior_start[free_weights + i * d + k] = centre + (comps > 1 ? (k == i % d ? 0.5 : -0.5) : 0.0);

  std::vector<double> moment_start(raw_dim, 0.0);
  std::vector<std::size_t> order(w.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w.at(a, 0) < w.at(b, 0); });
  for (std::size_t i = 0; i < comps; ++i) {
    const std::size_t a = order.size() * i / comps, b = order.size() * (i + 1) / comps;
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = a; r < b; ++r)
      for (std::size_t k = 0; k < d; ++k) mean[k] += w.at(order[r], k);
    const double count = static_cast<double>(std::max<std::size_t>(b - a, 1));
    for (auto& m : mean) m /= count;
    double var = 0.0;
    for (std::size_t r = a; r < b; ++r) var += std::pow(w.at(order[r], 0) - mean[0], 2);
    var /= count;
    const double s = std::clamp(var > 0.0 ? mean[0] * (1.0 - mean[0]) / var - 1.0 : 10.0, 0.5, 300.0);
    for (std::size_t k = 0; k < d; ++k)
      moment_start[free_weights + i * d + k] = std::clamp(std::log(std::max(mean[k], 1e-6) * s), lo, hi);
  }

  const std::function<double(const std::vector<double>&)> objective = [&](const std::vector<double>& v) {
    const double t = target(v);
    return std::isfinite(t) ? -t : kInf;
  };
  std::vector<double> best;
  double best_value = kInf;
  for (const auto& start : {prior_start, moment_start}) {
    if (!std::isfinite(objective(start))) continue;
    auto res = detail::nelder_mead<std::vector<double>>(objective, start, std::vector<double>(raw_dim, 0.5),
                                                        1e-9, 3000);
    res = detail::nelder_mead<std::vector<double>>(objective, res.x, std::vector<double>(raw_dim, 0.1), 1e-9,
                                                   3000);
    if (res.value < best_value) {
      best_value = res.value;
      best = res.x;
    }
  }
  return best.empty() ? prior_start : best;
}

}  // namespace

void SweepConfig::validate() const {
  if (thresholds.empty()) throw UsageError("sweep needs at least one candidate threshold");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i - 1]))
      throw UsageError("candidate thresholds must be strictly descending");
  if (min_exceedances < 2) throw UsageError("min_exceedances must be at least 2");
  if (quantile_fraction) {
    if (stat.kind != StatisticKind::empirical_quantile)
      throw UsageError("quantile_fraction needs the empirical-quantile statistic");
    if (!(*quantile_fraction > 0.0 && *quantile_fraction <= 1.0))
      throw UsageError("quantile_fraction must lie in (0, 1]");
  } else if (stat.kind == StatisticKind::empirical_quantile && !stat.quantile_index) {
    throw UsageError("empirical-quantile statistic needs an index");
  }
  if (pvalue_kind == PValueKind::partial && stat.kind == StatisticKind::neg_log_likelihood)
    throw UnsupportedError("partial posterior p-values need the max or quantile statistic");
}

std::vector<double> equally_spaced_thresholds(double lo, double hi, std::size_t count) {
  if (count == 0 || !(hi >= lo)) throw UsageError("invalid threshold range");
  if (count == 1) return {hi};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

std::vector<double> stepped_thresholds(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("invalid threshold range");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[count - 1 - i] = lo + step * static_cast<double>(i);
  return out;
}

ThresholdSeeds threshold_seeds(std::uint64_t seed, std::size_t index) {
  const std::uint64_t base = derive_seed(seed, index);
  return {derive_seed(base, 1), derive_seed(base, 2)};
}

Rng line_stream(std::uint64_t pvalue_seed, std::size_t eval_index) {
  return Rng(derive_seed(pvalue_seed, eval_index));
}

std::string to_string(EntryStatus status) {
  switch (status) {
    case EntryStatus::ok:
      return "ok";
    case EntryStatus::too_few_exceedances:
      return "too_few_exceedances";
    case EntryStatus::chain_failure:
      return "chain_failure";
  }
  return "unknown";
}

std::vector<CurveEntry> SurpriseCurve::line(double fit_threshold) const {
  std::vector<CurveEntry> out;
  for (const auto& e : entries)
    if (e.fit_threshold == fit_threshold) out.push_back(e);
  return out;
}

std::vector<double> SurpriseCurve::anchors() const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (out.empty() || out.back() != e.fit_threshold) out.push_back(e.fit_threshold);
  return out;
}

PosteriorDraws fit_gpd_posterior(const ExceedanceSet& data, const McmcConfig& cfg) {
  if (data.size() < 2) throw UsageError("GPD posterior needs at least two exceedances");
  const double u = data.threshold();
  LogTarget target = [&data, u](std::span<const double> v) {
    const double lp = gpd_log_posterior(GpdParams{v[0], std::exp(v[1]), u}, data);
    return std::isfinite(lp) ? lp + v[1] : -kInf;
  };
  auto init = gpd_start(data, target);
  return to_natural_gpd(run_chain(target, std::move(init), with_defaults(cfg, 2, 0.1)));
}

PosteriorDraws fit_gpd_partial_posterior(const ExceedanceSet& data, const TestStatisticSpec& stat,
                                         const McmcConfig& cfg) {
  if (data.size() < 2) throw UsageError("GPD partial posterior needs at least two exceedances");
  const double u = data.threshold();
  LogTarget target = [&data, &stat, u](std::span<const double> v) {
    const double lp = partial_posterior_log_target(GpdParams{v[0], std::exp(v[1]), u}, data, stat);
    return std::isfinite(lp) ? lp + v[1] : -kInf;
  };
  auto init = gpd_start(data, target);
  return to_natural_gpd(run_chain(target, std::move(init), with_defaults(cfg, 2, 0.1)));
}

PosteriorDraws fit_angular_posterior(const PointSet& w, const SpectralModelChoice& model,
                                     const McmcConfig& cfg) {
  if (w.rows() < 2) throw UsageError("angular posterior needs at least two points");
  switch (model.family) {
    case SpectralFamily::logistic:
    case SpectralFamily::bilogistic: {
      if (w.dim != 2) throw UsageError("logistic and bilogistic models are bivariate only");
      const std::size_t dim = model.family == SpectralFamily::logistic ? 1 : 2;
      const auto family = model.family;
      LogTarget target = [&w, family, dim](std::span<const double> v) {
        std::vector<double> theta(dim);
        double log_jac = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          theta[k] = logistic(v[k]);
          log_jac += std::log(theta[k]) + std::log1p(-theta[k]);
        }
        const double lp = spectral_log_posterior(theta, w, family);
        return std::isfinite(lp) ? lp + log_jac : -kInf;
      };
      auto raw = run_chain(target, std::vector<double>(dim, 0.0), with_defaults(cfg, dim, 0.5));
      return map_draws(raw, dim, [](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = logistic(in[k]);
      });
    }
    case SpectralFamily::dirichlet_mixture: {
      const std::size_t comps = model.components;
      const std::size_t d = w.dim;
      if (comps < 1) throw UsageError("Dirichlet mixture needs at least one component");
      if (d < 2) throw UsageError("Dirichlet mixture needs dimension >= 2");
      const std::size_t free_weights = comps - 1;
      const std::size_t raw_dim = free_weights + comps * d;
      const std::size_t nat_dim = comps + comps * d;
      // unconstrained -> natural, returns the log Jacobian
      auto to_natural = [=](std::span<const double> v, std::span<double> theta) {
        double peak = 0.0;
        for (std::size_t i = 0; i < free_weights; ++i) peak = std::max(peak, v[i]);
        double total = 0.0;
        for (std::size_t i = 0; i < comps; ++i) {
          theta[i] = std::exp((i < free_weights ? v[i] : 0.0) - peak);
          total += theta[i];
        }
        double log_jac = 0.0;
        for (std::size_t i = 0; i < comps; ++i) {
          theta[i] /= total;
          log_jac += std::log(theta[i]);
        }
        if (comps == 1) log_jac = 0.0;
        for (std::size_t k = 0; k < comps * d; ++k) {
          theta[comps + k] = std::exp(v[free_weights + k]);
          log_jac += v[free_weights + k];
        }
        return log_jac;
      };
      LogTarget target = [&w, to_natural, nat_dim](std::span<const double> v) {
        std::vector<double> theta(nat_dim);
        const double log_jac = to_natural(v, theta);
        const double lp = spectral_log_posterior(theta, w, SpectralFamily::dirichlet_mixture);
        return std::isfinite(lp) ? lp + log_jac : -kInf;
      };
      std::vector<double> init = dirichlet_start(w, comps, target);
      auto raw = run_chain(target, std::move(init), with_defaults(cfg, raw_dim, 0.3));
      return map_draws(raw, nat_dim, [to_natural](std::span<const double> in, std::span<double> out) {
        to_natural(in, out);
      });
    }
  }
  throw UsageError("unknown spectral family");
}

SurpriseCurve univariate_sweep(std::span<const double> y_all, const SweepConfig& cfg) {
  cfg.validate();
  if (!std::holds_alternative<GpdModelChoice>(cfg.model))
    throw UsageError("univariate sweeps use the GPD model");

  const std::size_t m = cfg.thresholds.size();
  std::vector<CurveEntry> entries(m);
  detail::parallel_for(m, cfg.workers, [&](std::size_t i) {
    const double v = cfg.thresholds[i];
    CurveEntry& e = entries[i];
    e.fit_threshold = v;
    e.eval_threshold = v;
    const ExceedanceSet data(y_all, v);
    e.n_exceed = data.size();
    if (data.size() < cfg.min_exceedances) {
      e.status = EntryStatus::too_few_exceedances;
      e.reason = too_few(data.size(), cfg.min_exceedances);
      return;
    }
    const auto seeds = threshold_seeds(cfg.seed, i);
    McmcConfig mc = cfg.mcmc;
    mc.seed = seeds.mcmc;
    const TestStatisticSpec stat = resolve_stat(cfg, data.size());
    try {
      const Rng rng(seeds.pvalue);
      if (cfg.pvalue_kind == PValueKind::partial) {
        const auto draws = fit_gpd_partial_posterior(data, stat, mc);
        e.chain = summarize(draws);
        e.pvalue = partial_posterior_pvalue(draws, data, stat, rng);
      } else {
        const auto draws = fit_gpd_posterior(data, mc);
        e.chain = summarize(draws);
        e.pvalue = posterior_predictive_pvalue(draws, PointSet(1, data.values()), stat, GpdModel(v), rng);
      }
      if (e.chain.acceptance_rate < 0.01) e.reason = "low acceptance rate";
    } catch (const NumericalError& err) {
      e.status = EntryStatus::chain_failure;
      e.reason = err.what();
    }
  });

  SurpriseCurve curve{CurveKind::univariate, std::move(entries)};
  if (std::none_of(curve.entries.begin(), curve.entries.end(), [](const auto& e) { return e.ok(); }))
    throw EmptyResultError("every candidate threshold was skipped");
  return curve;
}

SurpriseCurve multivariate_sweep(const PolarDataset& polar, const SweepConfig& cfg) {
  cfg.validate();
  const auto* choice = std::get_if<SpectralModelChoice>(&cfg.model);
  if (choice == nullptr) throw UsageError("multivariate sweeps need a spectral model");
  if (cfg.stat.kind != StatisticKind::neg_log_likelihood)
    throw UsageError("multivariate sweeps use the negative log-likelihood discrepancy");
  if (cfg.pvalue_kind != PValueKind::posterior)
    throw UnsupportedError("multivariate sweeps support posterior predictive p-values only");
  polar.validate();

  const std::size_t m = cfg.thresholds.size();
  const AngularModel model(choice->family, polar.dim());
  std::vector<std::vector<CurveEntry>> lines(m);
  detail::parallel_for(m, cfg.workers, [&](std::size_t i) {
    const double anchor = cfg.thresholds[i];
    auto& line = lines[i];
    const PointSet fit_data = polar.angles_above(anchor);
    CurveEntry head;
    head.fit_threshold = anchor;
    head.eval_threshold = anchor;
    head.n_exceed = fit_data.rows();
    if (fit_data.rows() < cfg.min_exceedances) {
      head.status = EntryStatus::too_few_exceedances;
      head.reason = too_few(fit_data.rows(), cfg.min_exceedances);
      line.push_back(head);
      return;
    }
    const auto seeds = threshold_seeds(cfg.seed, i);
    McmcConfig mc = cfg.mcmc;
    mc.seed = seeds.mcmc;
    PosteriorDraws draws;
    try {
      draws = fit_angular_posterior(fit_data, *choice, mc);
    } catch (const NumericalError& err) {
      head.status = EntryStatus::chain_failure;
      head.reason = err.what();
      line.push_back(head);
      return;
    }
    const ChainSummary summary = summarize(draws);
    // Evaluate at the anchor itself, then every higher candidate.
    for (std::size_t j = i + 1; j-- > 0;) {
      CurveEntry e;
      e.fit_threshold = anchor;
      e.eval_threshold = cfg.thresholds[j];
      e.chain = summary;
      const PointSet obs = j == i ? fit_data : polar.angles_above(cfg.thresholds[j]);
      e.n_exceed = obs.rows();
      if (obs.rows() < cfg.min_exceedances) {
        e.status = EntryStatus::too_few_exceedances;
        e.reason = too_few(obs.rows(), cfg.min_exceedances);
        line.push_back(std::move(e));
        continue;
      }
      try {
        e.pvalue = posterior_predictive_pvalue(draws, obs, cfg.stat, model, line_stream(seeds.pvalue, j));
      } catch (const NumericalError& err) {
        e.status = EntryStatus::chain_failure;
        e.reason = err.what();
      }
      line.push_back(std::move(e));
    }
  });

  SurpriseCurve curve{CurveKind::multivariate, {}};
  for (auto& line : lines)
    for (auto& e : line) curve.entries.push_back(std::move(e));
  if (std::none_of(curve.entries.begin(), curve.entries.end(), [](const auto& e) { return e.ok(); }))
    throw EmptyResultError("every candidate threshold was skipped");
  return curve;
}

ThresholdRecommendation recommend_threshold(const SurpriseCurve& curve, double delta,
                                            std::size_t window) {
  if (!(delta > 0.0 && delta < 0.5) || window == 0)
    throw UsageError("recommendation needs 0 < delta < 0.5 and window >= 1");
  auto pinned = [delta](double level) { return level < delta || level > 1.0 - delta; };

  if (curve.kind == CurveKind::univariate) {
    if (curve.entries.size() < window + 2)
      throw UsageError("univariate recommendation needs at least window + 2 entries");
    std::vector<const CurveEntry*> ok;
    for (const auto& e : curve.entries) {
      if (e.fit_threshold != e.eval_threshold) throw UsageError("malformed univariate curve");
      if (e.ok()) ok.push_back(&e);
    }
    std::sort(ok.begin(), ok.end(),
              [](const auto* a, const auto* b) { return a->fit_threshold > b->fit_threshold; });
    if (ok.size() < window + 2) return {std::nullopt, "too few usable thresholds"};
    std::vector<double> top;
    for (std::size_t k = 0; k < window; ++k) top.push_back(ok[k]->pvalue.p);
    const double ref = median(top);
    if (pinned(ref)) {
      std::ostringstream s;
      s << "p-values level off at " << ref << ", near 0 or 1: the model looks unsuitable";
      return {std::nullopt, s.str()};
    }
    std::optional<double> best;
    for (const auto* e : ok) {
      if (std::abs(e->pvalue.p - ref) > delta) break;
      best = e->fit_threshold;
    }
    if (!best) return {std::nullopt, "no stable run of p-values from the highest threshold"};
    std::ostringstream s;
    s << "lowest threshold with p within " << delta << " of the upper-tail level " << ref;
    return {best, s.str()};
  }

  struct LineStats {
    double anchor;
    double level;
    double range;
  };
  std::vector<LineStats> stats;
  for (double anchor : curve.anchors()) {
    std::vector<double> ps;
    for (const auto& e : curve.line(anchor))
      if (e.ok()) ps.push_back(e.pvalue.p);
    if (ps.empty()) continue;
    const auto [lo, hi] = std::minmax_element(ps.begin(), ps.end());
    stats.push_back({anchor, median(ps), *hi - *lo});
  }
  if (curve.anchors().size() < 2) throw UsageError("multivariate recommendation needs two lines");
  std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.anchor > b.anchor; });
  if (stats.size() < 2) return {std::nullopt, "too few usable lines"};
  const double ref = stats.front().level;
  if (pinned(ref)) {
    std::ostringstream s;
    s << "p-value lines level off at " << ref << ", near 0 or 1: the model looks unsuitable";
    return {std::nullopt, s.str()};
  }
  std::optional<double> best;
  for (const auto& l : stats) {
    if (!(l.range < 2.0 * delta) || std::abs(l.level - ref) > delta) break;
    best = l.anchor;
  }
  if (!best) return {std::nullopt, "no anchor has a flat line at the upper-tail level"};
  std::ostringstream s;
  s << "lowest anchor whose line stays flat near the upper-tail level " << ref;
  if (std::abs(ref - 0.5) > delta) s << " (level away from 0.5 suggests a mis-specified model)";
  return {best, s.str()};
}

}  // namespace evsurprise
