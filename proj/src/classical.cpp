#include "evsurprise/classical.hpp"

#include <algorithm>
#include <cmath>

#include "evsurprise/error.hpp"
#include "parallel.hpp"

namespace evsurprise {
namespace {

constexpr double kClip = 1e-12;

}  // namespace

MrlTable mean_residual_life(std::span<const double> y, std::span<const double> thresholds) {
  MrlTable out;
  for (double u : thresholds) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : y)
      if (v > u) {
        sum += v - u;
        ++n;
      }
    if (n < 2) {
      out.skipped.push_back(u);
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : y)
      if (v > u) ss += (v - u - mean) * (v - u - mean);
    const double half = 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    out.points.push_back({u, mean, mean - half, mean + half, n});
  }
  return out;
}

GofStatistics gof_statistics(const ExceedanceSet& y, const GpdParams& p) {
  const std::size_t n = y.size();
  if (n == 0) throw UsageError("goodness-of-fit statistics need data");
  GofStatistics out;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = gpd_cdf(y.values()[i], p);
    if (v < kClip || v > 1.0 - kClip) {
      out.clipped = true;
      v = std::clamp(v, kClip, 1.0 - kClip);
    }
    z[i] = v;
  }
  const auto nd = static_cast<double>(n);
  double w2 = 1.0 / (12.0 * nd);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = 2.0 * static_cast<double>(i + 1) - 1.0;
    const double d = z[i] - k / (2.0 * nd);
    w2 += d * d;
    s += k * (std::log(z[i]) + std::log1p(-z[n - 1 - i]));
  }
  out.w2 = w2;
  out.a2 = -nd - s / nd;
  return out;
}

BootstrapGof bootstrap_gof_pvalue(const ExceedanceSet& y, std::size_t n_boot, std::uint64_t seed,
                                  std::size_t workers) {
  if (n_boot == 0) throw UsageError("bootstrap needs n_boot > 0");
  BootstrapGof out;
  out.n_boot = n_boot;
  out.fit = gpd_mle(y, MleOptions{5, derive_seed(seed, 0x6669740aULL)});
  out.observed = gof_statistics(y, out.fit);

  // 0 = failed refit, 1 = counted, bits 2/4 = statistic at least as large.
  std::vector<unsigned char> flags(n_boot, 0);
  detail::parallel_for(n_boot, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto sample = gpd_sample(y.size(), out.fit, rng);
    const ExceedanceSet rep(sample, y.threshold());
    GpdParams refit;
    try {
      // Bootstrap samples come from a GPD, so the moment start usually
      // suffices; random restarts only on failure.
      try {
        refit = gpd_mle(rep, MleOptions{0, derive_seed(rng.seed(), 1)});
      } catch (const FitError&) {
        refit = gpd_mle(rep, MleOptions{5, derive_seed(rng.seed(), 2)});
      }
    } catch (const NumericalError&) {
      return;
    }
    const GofStatistics g = gof_statistics(rep, refit);
    unsigned char f = 1;
    if (g.w2 >= out.observed.w2) f |= 2;
    if (g.a2 >= out.observed.a2) f |= 4;
    flags[i] = f;
  });

  std::size_t used = 0, ge_w2 = 0, ge_a2 = 0;
  for (auto f : flags) {
    if (!(f & 1)) continue;
    ++used;
    ge_w2 += (f & 2) ? 1 : 0;
    ge_a2 += (f & 4) ? 1 : 0;
  }
  out.n_failed = n_boot - used;
  if (out.n_failed * 10 > n_boot)
    throw FitError(std::to_string(out.n_failed) + " of " + std::to_string(n_boot) +
                   " bootstrap refits failed");
  out.p_w2 = static_cast<double>(ge_w2) / static_cast<double>(used);
  out.p_a2 = static_cast<double>(ge_a2) / static_cast<double>(used);
  return out;
}

ClassicalSelection classical_threshold_select(std::span<const double> y_all,
                                              std::span<const double> thresholds,
                                              std::uint64_t seed, std::size_t n_boot,
                                              std::size_t min_exceedances, std::size_t workers) {
  if (thresholds.empty()) throw UsageError("classical selection needs candidate thresholds");
  if (min_exceedances < 5) throw UsageError("min_exceedances must be at least 5 for the MLE");
  ClassicalSelection out;
  out.rows.resize(thresholds.size());
  // Parallel over thresholds; each bootstrap runs serially inside.
  detail::parallel_for(thresholds.size(), workers, [&](std::size_t i) {
    ClassicalRow& row = out.rows[i];
    row.u = thresholds[i];
    const ExceedanceSet data(y_all, row.u);
    row.n_exc = data.size();
    if (data.size() < min_exceedances) {
      row.reason = "too few exceedances";
      return;
    }
    try {
      row.gof = bootstrap_gof_pvalue(data, n_boot, derive_seed(seed, i), 1);
      row.ok = true;
    } catch (const NumericalError& e) {
      row.reason = e.what();
    }
  });

  auto pick = [&](auto pvalue) -> std::optional<double> {
    std::optional<double> best;
    for (const auto& row : out.rows)
      if (row.ok && pvalue(row) >= kClassicalLevel && (!best || row.u < *best)) best = row.u;
    return best;
  };
  out.u_w2 = pick([](const ClassicalRow& r) { return r.gof.p_w2; });
  out.u_a2 = pick([](const ClassicalRow& r) { return r.gof.p_a2; });
  if (!out.u_w2 && !out.u_a2)
    out.note = "every usable threshold is rejected at the 5% level";
  else if (!out.u_w2 || !out.u_a2)
    out.note = std::string("every usable threshold is rejected by ") + (out.u_w2 ? "A2" : "W2");
  else
    out.note = "lowest threshold not rejected at the 5% level";
  return out;
}

}  // namespace evsurprise
