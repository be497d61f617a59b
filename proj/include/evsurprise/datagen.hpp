#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "evsurprise/gpd.hpp"
#include "evsurprise/spectral.hpp"

namespace evsurprise {

struct UniformComponent {
  double lo = 0.0;
  double hi = 1.0;
};

// Gamma(shape, scale) restricted to values <= upper.
struct TruncatedGammaComponent {
  double shape = 1.0;
  double scale = 1.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct GpdComponent {
  GpdParams params;
};

struct WeightedComponent {
  double weight = 1.0;
  std::variant<UniformComponent, TruncatedGammaComponent, GpdComponent> component;
};

// How the "Gamma(3, 8)" of design 3 is read.
enum class GammaParameterization { shape_scale, shape_rate };

struct UnivariateDesign {
  int id = 1;
  std::size_t n = 0;
  std::vector<WeightedComponent> components;
  double true_threshold = 20.0;

  // Designs 1-3 with their default sample sizes (500, 1000, 2400).
  static UnivariateDesign standard(int id,
                                   GammaParameterization gamma = GammaParameterization::shape_scale);
  // Throws DesignError for bad weights or component parameters.
  void validate() const;
};

std::vector<double> gen_univariate(const UnivariateDesign& design, std::uint64_t seed);

// One truncated-Gamma draw by rejection from `rng`.
double sample_truncated_gamma(const TruncatedGammaComponent& c, Rng& rng);
std::vector<double> gen_truncated_gamma(double shape, double scale, double upper, std::size_t n,
                                        std::uint64_t seed);

// Weight of the non-extreme angular component at radius r.
double mixing_p(double r, double r_a, double r_b);

enum class BivariateDesignId { logistic, dirichlet };
std::string to_string(BivariateDesignId id);

struct BivariateDesign {
  BivariateDesignId id = BivariateDesignId::logistic;
  std::size_t n = 3000;
  GpdParams radial{0.4, 10.0, 0.0};
  double r_a = 0.0;
  double r_b = 1.0;
  SpectralModelSpec non_extreme = SpectralModelSpec::logistic(0.55);
  SpectralModelSpec extreme = SpectralModelSpec::logistic(0.3);

  static BivariateDesign logistic();
  static BivariateDesign dirichlet();
  [[nodiscard]] double true_threshold() const { return r_b; }
  void validate() const;
};

PolarDataset gen_bivariate(const BivariateDesign& design, std::uint64_t seed);

}  // namespace evsurprise
