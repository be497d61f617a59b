#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evsurprise/gpd.hpp"

namespace evsurprise {

struct MrlPoint {
  double u = 0.0;
  double mean_excess = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_exc = 0;
};

struct MrlTable {
  std::vector<MrlPoint> points;
  // Thresholds left with fewer than two exceedances.
  std::vector<double> skipped;
};

// Mean excess over each threshold with a normal 95% interval.
MrlTable mean_residual_life(std::span<const double> y, std::span<const double> thresholds);

struct GofStatistics {
  double w2 = 0.0;
  double a2 = 0.0;
  // Some fitted CDF value was within 1e-12 of 0 or 1 and got clipped.
  bool clipped = false;
};

// Cramer-von Mises and Anderson-Darling statistics of y against p.
GofStatistics gof_statistics(const ExceedanceSet& y, const GpdParams& p);

struct BootstrapGof {
  GpdParams fit;
  GofStatistics observed;
  double p_w2 = 0.0;
  double p_a2 = 0.0;
  std::size_t n_boot = 0;
  std::size_t n_failed = 0;
};

/// Parametric bootstrap with refitting: n_boot samples from the MLE fit,
/// replicate i drawn from derive_seed(seed, i). Refits that fail are dropped;
/// more than 10% failures raise FitError.
BootstrapGof bootstrap_gof_pvalue(const ExceedanceSet& y, std::size_t n_boot = 500,
                                  std::uint64_t seed = 1, std::size_t workers = 1);

struct ClassicalRow {
  double u = 0.0;
  std::size_t n_exc = 0;
  bool ok = false;
  std::string reason;
  BootstrapGof gof;
};

struct ClassicalSelection {
  std::vector<ClassicalRow> rows;
  std::optional<double> u_w2;
  std::optional<double> u_a2;
  std::string note;
};

inline constexpr double kClassicalLevel = 0.05;

/// Fits and tests every threshold; for each statistic the selected threshold
/// is the lowest one whose bootstrap p-value does not reject at 5%.
ClassicalSelection classical_threshold_select(std::span<const double> y_all,
                                              std::span<const double> thresholds,
                                              std::uint64_t seed, std::size_t n_boot = 500,
                                              std::size_t min_exceedances = 30,
                                              std::size_t workers = 1);

}  // namespace evsurprise
