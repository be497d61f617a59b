#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace evsurprise {

using LogTarget = std::function<double(std::span<const double>)>;

struct McmcConfig {
  std::size_t n_keep = 9000;
  std::size_t n_burn = 1000;
  // Per-coordinate proposal scales. Empty means "let the caller choose".
  std::vector<double> initial_scale;
  bool adapt = true;
  // Defaults to 0.44 in one dimension and 0.234 otherwise.
  std::optional<double> target_acceptance;
  std::uint64_t seed = 1;

  [[nodiscard]] double target_for(std::size_t dim) const {
    return target_acceptance.value_or(dim == 1 ? 0.44 : 0.234);
  }
  // Throws UsageError when n_keep < 100, scales are non-positive or the
  // number of scales does not match `dim`.
  void validate(std::size_t dim) const;
};

/// Draws kept after burn-in, row-major (n_keep x dim).
struct PosteriorDraws {
  std::size_t dim = 0;
  std::vector<double> values;
  double acceptance_rate = 0.0;
  std::vector<double> ess;
  std::uint64_t seed = 0;
  std::size_t n_burn = 0;
  std::size_t n_keep = 0;
  // Proposal scales when the kept phase starts and when it ends. Equal by
  // construction since adaptation stops at the end of burn-in.
  std::vector<double> scale_at_burn_end;
  std::vector<double> scale_at_end;
  // Set when the kept-phase acceptance rate drops below 0.01.
  bool low_acceptance = false;

  [[nodiscard]] std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  [[nodiscard]] std::span<const double> draw(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  [[nodiscard]] std::vector<double> column(std::size_t k) const;
  [[nodiscard]] std::vector<double> mean() const;
  [[nodiscard]] std::vector<double> sd() const;
};

/// Adaptive Gaussian random-walk Metropolis.
///
/// All coordinates move jointly with per-coordinate scales. During burn-in a
/// global log multiplier follows a Robbins-Monro recursion toward the target
/// acceptance rate; halfway through burn-in the per-coordinate scales are reset
/// from the sample standard deviations seen so far (times 2.38/sqrt(dim)).
/// Nothing adapts in the kept phase. Throws InitializationError when the
/// target is not finite at `init`.
PosteriorDraws run_chain(const LogTarget& log_target, std::vector<double> init,
                         const McmcConfig& cfg);

/// Applies `fn` to every draw, e.g. to map unconstrained coordinates back to
/// the natural parameter scale. Diagnostics are carried over unchanged.
PosteriorDraws map_draws(const PosteriorDraws& draws, std::size_t out_dim,
                         const std::function<void(std::span<const double>, std::span<double>)>& fn);

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;
};

// Geyer's initial monotone sequence estimator, clamped to (0, n].
EssResult effective_sample_size(std::span<const double> chain);

}  // namespace evsurprise
