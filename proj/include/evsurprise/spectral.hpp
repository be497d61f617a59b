#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evsurprise/point_set.hpp"
#include "evsurprise/rng.hpp"

namespace evsurprise {

// Simplex coordinates are clipped to [kSimplexClip, 1 - kSimplexClip] before
// any density evaluation. Parametric angular densities are normalized over
// that same clipped interval.
inline constexpr double kSimplexClip = 1e-10;

enum class SpectralFamily { logistic, bilogistic, dirichlet_mixture };

std::string to_string(SpectralFamily family);
// Accepts "logistic", "bilogistic", "dirichlet" / "dirichlet_mixture".
SpectralFamily parse_spectral_family(const std::string& name);

struct LogisticParams {
  double phi = 0.5;
};

struct BilogisticParams {
  double alpha = 0.5;
  double beta = 0.5;
};

struct DirichletMixtureParams {
  std::vector<double> weights;
  std::vector<std::vector<double>> shapes;
};

/// Angular density family together with its parameters.
///
/// Natural parameter vectors (as produced by the samplers) are laid out as
///   logistic:          (phi)
///   bilogistic:        (alpha, beta)
///   dirichlet_mixture: (lambda_1..lambda_I, mu^1_1..mu^1_d, ..., mu^I_d)
class SpectralModelSpec {
 public:
  using Params = std::variant<LogisticParams, BilogisticParams, DirichletMixtureParams>;

  static SpectralModelSpec logistic(double phi);
  static SpectralModelSpec bilogistic(double alpha, double beta);
  static SpectralModelSpec dirichlet_mixture(std::vector<double> weights,
                                             std::vector<std::vector<double>> shapes);
  // `d` is only consulted for the Dirichlet mixture layout.
  static SpectralModelSpec from_vector(SpectralFamily family, std::span<const double> theta,
                                       std::size_t d = 2);

  [[nodiscard]] SpectralFamily family() const;
  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] std::size_t components() const;
  [[nodiscard]] std::vector<double> to_vector() const;
  [[nodiscard]] const Params& params() const { return params_; }
  [[nodiscard]] bool in_domain() const;
  // Throws DomainError describing the first violated constraint.
  void validate() const;

 private:
  explicit SpectralModelSpec(Params p) : params_(std::move(p)) {}
  Params params_;
};

/// Radial and angular parts of Frechet-scale observations.
struct PolarDataset {
  std::vector<double> r;
  PointSet w;

  [[nodiscard]] std::size_t size() const { return r.size(); }
  [[nodiscard]] std::size_t dim() const { return w.dim; }
  // Angular rows whose radial part strictly exceeds r0.
  [[nodiscard]] PointSet angles_above(double r0) const;
  [[nodiscard]] std::size_t count_above(double r0) const;
  void validate() const;
};

// Empirical unit-Frechet margins: z = -1/log(rank / (n + 1)), average ranks for
// ties. Throws DegenerateMarginError naming the column for constant columns.
PointSet frechet_transform(const PointSet& data);
PolarDataset to_pseudo_polar(const PointSet& z);
// z_ik = d * r_i * w_ik
PointSet from_pseudo_polar(const PolarDataset& polar);

double bilogistic_gamma(double w, double alpha, double beta);
double bilogistic_log_density(double w, double alpha, double beta);
double logistic_log_density(double w, double phi);
double dirichlet_log_density(std::span<const double> w, std::span<const double> shape);
// -inf when any coordinate of w is zero.
double dirichlet_mixture_log_density(std::span<const double> w, const SpectralModelSpec& spec);

// Unnormalized log density of a simplex point after interior clipping.
// Bivariate families read the first coordinate.
double angular_log_density(std::span<const double> w, const SpectralModelSpec& spec);
double normalize_angular(const SpectralModelSpec& spec);
// Sum of normalized log densities over the rows of `w`.
double angular_log_likelihood(const SpectralModelSpec& spec, const PointSet& w);

/// Draws n simplex points. Dirichlet mixtures pick a component and normalize
/// independent Gamma draws; bivariate parametric families invert a cached
/// tabulated CDF.
PointSet angular_sample(std::size_t n, const SpectralModelSpec& spec, Rng& rng);

// Number of tabulations currently held by the inverse-CDF cache.
std::size_t angular_cache_size();

struct SpectralMoment {
  double value = 0.0;
  double std_error = 0.0;
  // |value - 1/d| small enough to satisfy the marginal moment constraint.
  bool satisfies_constraint = false;
};

// Mean of w[margin] under the normalized angular density.
SpectralMoment spectral_moment(const SpectralModelSpec& spec, std::size_t margin);

/// Log posterior for a natural parameter vector: angular log likelihood plus
/// uniform priors on (0,1) for phi, alpha, beta; for Dirichlet mixtures a
/// uniform prior on the weight simplex and log-uniform (0.1, 100) shapes.
double spectral_log_posterior(std::span<const double> theta, const PointSet& w_data,
                              SpectralFamily family);

}  // namespace evsurprise
