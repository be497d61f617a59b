#include "evsurprise/datagen.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "evsurprise/error.hpp"

namespace evsurprise {
namespace {

constexpr double kMinAcceptance = 1e-4;

double gamma_acceptance(const TruncatedGammaComponent& c) {
  if (std::isinf(c.upper)) return 1.0;
  return boost::math::gamma_p(c.shape, c.upper / c.scale);
}

void check_gamma(const TruncatedGammaComponent& c) {
  if (!(c.shape > 0.0 && c.scale > 0.0 && c.upper > 0.0))
    throw DesignError("truncated Gamma needs positive shape, scale and upper bound");
  const double accept = gamma_acceptance(c);
  if (accept < kMinAcceptance)
    throw DesignError("truncated Gamma acceptance probability " + std::to_string(accept) +
                      " is below 1e-4");
}

}  // namespace

UnivariateDesign UnivariateDesign::standard(int id, GammaParameterization gamma) {
  UnivariateDesign d;
  d.id = id;
  switch (id) {
    case 1:
      d.n = 500;
      d.components = {{0.3, UniformComponent{0.0, 20.0}}, {0.7, GpdComponent{{0.2, 8.0, 20.0}}}};
      break;
    case 2:
      d.n = 1000;
      d.components = {{0.3, UniformComponent{0.0, 20.0}}, {0.7, GpdComponent{{-0.1, 10.0, 20.0}}}};
      break;
    case 3: {
      d.n = 2400;
      const double scale = gamma == GammaParameterization::shape_scale ? 8.0 : 1.0 / 8.0;
      d.components = {{0.7, TruncatedGammaComponent{3.0, scale, 20.0}},
                      {0.3, GpdComponent{{0.4, 6.0974, 20.0}}}};
      break;
    }
    default:
      throw DesignError("univariate design id must be 1, 2 or 3");
  }
  return d;
}

void UnivariateDesign::validate() const {
  if (components.empty()) throw DesignError("design has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw DesignError("component weights must be positive");
    total += c.weight;
    if (const auto* u = std::get_if<UniformComponent>(&c.component); u && !(u->hi > u->lo))
      throw DesignError("uniform component needs lo < hi");
    if (const auto* g = std::get_if<TruncatedGammaComponent>(&c.component)) check_gamma(*g);
    if (const auto* p = std::get_if<GpdComponent>(&c.component); p && !(p->params.sigma > 0.0))
      throw DesignError("GPD component needs sigma > 0");
  }
  if (std::abs(total - 1.0) > 1e-12) throw DesignError("component weights must sum to 1");
}

double sample_truncated_gamma(const TruncatedGammaComponent& c, Rng& rng) {
  for (;;) {
    const double x = c.scale * rng.gamma(c.shape);
    if (x <= c.upper) return x;
  }
}

std::vector<double> gen_univariate(const UnivariateDesign& design, std::uint64_t seed) {
  design.validate();
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(design.n);
  for (std::size_t i = 0; i < design.n; ++i) {
    const double pick = rng.uniform();
    std::size_t k = 0;
    double cum = design.components[0].weight;
    while (pick > cum && k + 1 < design.components.size()) cum += design.components[++k].weight;
    const auto& comp = design.components[k].component;
    if (const auto* u = std::get_if<UniformComponent>(&comp)) {
      out.push_back(u->lo + (u->hi - u->lo) * rng.uniform());
    } else if (const auto* g = std::get_if<TruncatedGammaComponent>(&comp)) {
      out.push_back(sample_truncated_gamma(*g, rng));
    } else {
      out.push_back(gpd_sample(1, std::get<GpdComponent>(comp).params, rng)[0]);
    }
  }
  return out;
}

std::vector<double> gen_truncated_gamma(double shape, double scale, double upper, std::size_t n,
                                        std::uint64_t seed) {
  const TruncatedGammaComponent c{shape, scale, upper};
  check_gamma(c);
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_truncated_gamma(c, rng);
  return out;
}

double mixing_p(double r, double r_a, double r_b) {
  if (!(r_a < r_b)) throw DomainError("mixing function needs r_a < r_b");
  if (r <= r_a) return 1.0;
  if (r >= r_b) return 0.0;
  return (r - r_b) / (r_a - r_b);
}

std::string to_string(BivariateDesignId id) {
  return id == BivariateDesignId::logistic ? "logistic" : "dirichlet";
}

BivariateDesign BivariateDesign::logistic() {
  BivariateDesign d;
  d.id = BivariateDesignId::logistic;
  d.r_a = 21.0;
  d.r_b = 22.0;
  d.non_extreme = SpectralModelSpec::logistic(0.55);
  d.extreme = SpectralModelSpec::logistic(0.3);
  return d;
}

BivariateDesign BivariateDesign::dirichlet() {
  BivariateDesign d;
  d.id = BivariateDesignId::dirichlet;
  d.r_a = 5.0;
  d.r_b = 8.0;
  d.non_extreme = SpectralModelSpec::dirichlet_mixture({0.25, 0.75}, {{1.0, 9.0}, {9.0, 1.0}});
  d.extreme = SpectralModelSpec::dirichlet_mixture({0.25, 0.75}, {{4.0, 6.0}, {7.0, 3.0}});
  return d;
}

void BivariateDesign::validate() const {
  if (!(r_a < r_b)) throw DesignError("bivariate design needs r_a < r_b");
  if (n == 0) throw DesignError("bivariate design needs n > 0");
  if (!(radial.sigma > 0.0)) throw DesignError("radial GPD needs sigma > 0");
  if (non_extreme.dim() != extreme.dim())
    throw DesignError("angular components differ in dimension");
  non_extreme.validate();
  extreme.validate();
}

PolarDataset gen_bivariate(const BivariateDesign& design, std::uint64_t seed) {
  design.validate();
  Rng rng(seed);
  PolarDataset out;
  out.r.reserve(design.n);
  out.w = PointSet(design.extreme.dim(), {});
  for (std::size_t i = 0; i < design.n; ++i) {
    const double r = gpd_sample(1, design.radial, rng)[0];
    const bool calm = rng.uniform() < mixing_p(r, design.r_a, design.r_b);
    const PointSet w = angular_sample(1, calm ? design.non_extreme : design.extreme, rng);
    out.r.push_back(r);
    out.w.push_row(w.row(0));
  }
  return out;
}

}  // namespace evsurprise
