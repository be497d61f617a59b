#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evsurprise/gpd.hpp"
#include "evsurprise/mcmc.hpp"
#include "evsurprise/spectral.hpp"
#include "evsurprise/surprise.hpp"

namespace evsurprise {

enum class PValueKind { posterior, partial };

struct GpdModelChoice {};

struct SpectralModelChoice {
  SpectralFamily family = SpectralFamily::logistic;
  // Mixture size, only used by the Dirichlet mixture.
  std::size_t components = 2;
};

using SweepModel = std::variant<GpdModelChoice, SpectralModelChoice>;

struct SweepConfig {
  // Candidate thresholds, strictly descending.
  std::vector<double> thresholds;
  TestStatisticSpec stat;
  // With an empirical-quantile statistic, use order index ceil(q * n) at each
  // threshold instead of a fixed index.
  std::optional<double> quantile_fraction;
  PValueKind pvalue_kind = PValueKind::posterior;
  McmcConfig mcmc;
  SweepModel model = GpdModelChoice{};
  std::size_t min_exceedances = 30;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

// `count` equally spaced values from hi down to lo, both included.
std::vector<double> equally_spaced_thresholds(double lo, double hi, std::size_t count);
// lo:hi:step, returned descending.
std::vector<double> stepped_thresholds(double lo, double hi, double step);

struct ThresholdSeeds {
  std::uint64_t mcmc;
  std::uint64_t pvalue;
};
// Seeds used for the threshold at position `index` of the schedule.
ThresholdSeeds threshold_seeds(std::uint64_t seed, std::size_t index);
// p-value stream for evaluation threshold `eval_index` of a multivariate line.
Rng line_stream(std::uint64_t pvalue_seed, std::size_t eval_index);

enum class EntryStatus { ok, too_few_exceedances, chain_failure };
std::string to_string(EntryStatus status);

struct ChainSummary {
  double acceptance_rate = 0.0;
  std::vector<double> ess;
  std::vector<double> mean;
  std::vector<double> sd;
};

struct CurveEntry {
  double fit_threshold = 0.0;
  double eval_threshold = 0.0;
  EntryStatus status = EntryStatus::ok;
  std::string reason;
  PValueEstimate pvalue;
  std::size_t n_exceed = 0;
  ChainSummary chain;

  [[nodiscard]] bool ok() const { return status == EntryStatus::ok; }
};

enum class CurveKind { univariate, multivariate };

struct SurpriseCurve {
  CurveKind kind = CurveKind::univariate;
  std::vector<CurveEntry> entries;

  // Entries fitted at `fit_threshold`, in evaluation order.
  [[nodiscard]] std::vector<CurveEntry> line(double fit_threshold) const;
  // Distinct fit thresholds in schedule order.
  [[nodiscard]] std::vector<double> anchors() const;
};

// Posterior of (xi, sigma) sampled on (xi, log sigma). Empty initial scales in
// `cfg` default to (0.1, 0.1).
PosteriorDraws fit_gpd_posterior(const ExceedanceSet& data, const McmcConfig& cfg);
PosteriorDraws fit_gpd_partial_posterior(const ExceedanceSet& data, const TestStatisticSpec& stat,
                                         const McmcConfig& cfg);
// Angular posterior on logit / additive-log-ratio / log scales, returned as
// natural parameter vectors.
PosteriorDraws fit_angular_posterior(const PointSet& w, const SpectralModelChoice& model,
                                     const McmcConfig& cfg);

/// Fits the GPD at every candidate threshold (largest first) and computes the
/// configured p-value there. Thresholds that cannot be processed stay in the
/// curve with a non-ok status. Throws EmptyResultError if all are skipped.
SurpriseCurve univariate_sweep(std::span<const double> y_all, const SweepConfig& cfg);

/// For each candidate v_i, fits the angular posterior on w | r > v_i and
/// evaluates the posterior predictive p-value at v_i and every higher
/// candidate, giving one line of p-values per anchor.
SurpriseCurve multivariate_sweep(const PolarDataset& polar, const SweepConfig& cfg);

struct ThresholdRecommendation {
  std::optional<double> threshold;
  std::string note;
};

/// Heuristic reading of a surprise curve.
///
/// Univariate: walking down from the highest threshold, the smallest v such
/// that every p at thresholds >= v lies within +-delta of the median p of the
/// top `window` thresholds. Multivariate: walking down the anchors, the
/// smallest anchor such that it and every higher anchor have a line range
/// below 2 delta and a level (median p) within delta of the highest anchor's
/// level. A reference level within delta of 0 or 1 yields no recommendation.
ThresholdRecommendation recommend_threshold(const SurpriseCurve& curve, double delta = 0.15,
                                            std::size_t window = 3);

}  // namespace evsurprise
