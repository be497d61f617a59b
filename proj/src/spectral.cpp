#include "evsurprise/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "evsurprise/error.hpp"

namespace evsurprise {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Log-odds range covered by the clipped interval [eps, 1 - eps].
const double kLogitRange = std::log1p(-kSimplexClip) - std::log(kSimplexClip);

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream msg;
    msg << name << " must lie in (0, 1), got " << v;
    throw DomainError(msg.str());
  }
}

// log h for the logistic family given log w, log(1 - w) and logit w.
double logistic_log_h(double log_w, double log_1mw, double logit_w, double phi) {
  const double t = logit_w / phi;
  const double log_gamma = -softplus(t);
  const double log_1mgamma = -softplus(-t);
  return std::log1p(-phi) + log_1mgamma + (1.0 - phi) * log_gamma - log_1mw - 2.0 * log_w -
         std::log(phi);
}

// Root of the bilogistic defining equation in s = logit(gamma):
//   log(1-a) + log(1-w) + b log(1-gamma) - log(1-b) - log w - a log gamma = 0,
// which is strictly decreasing in s.
double bilogistic_root_logit(double log_w, double log_1mw, double alpha, double beta) {
  const double c = std::log1p(-alpha) + log_1mw - std::log1p(-beta) - log_w;
  auto f = [&](double s) { return c - beta * softplus(s) + alpha * softplus(-s); };
  double lo = -50.0, hi = 50.0;
  for (int k = 0; k < 20 && f(lo) <= 0.0; ++k) lo *= 2.0;
  for (int k = 0; k < 20 && f(hi) >= 0.0; ++k) hi *= 2.0;
  if (!(f(lo) > 0.0) || !(f(hi) < 0.0))
    throw NumericalError("bilogistic root could not be bracketed");
  for (int it = 0; it < 300 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double s = 0.5 * (lo + hi);
  if (!(std::abs(f(s)) < 1e-9)) throw NumericalError("bilogistic root residual above tolerance");
  return s;
}

double bilogistic_log_h(double log_w, double log_1mw, double alpha, double beta) {
  const double s = bilogistic_root_logit(log_w, log_1mw, alpha, beta);
  const double log_gamma = -softplus(-s);
  const double log_1mgamma = -softplus(s);
  const double gamma = std::exp(log_gamma);
  const double one_minus_gamma = std::exp(log_1mgamma);
  return std::log1p(-alpha) + log_1mgamma + (1.0 - alpha) * log_gamma - log_1mw - 2.0 * log_w -
         std::log(alpha * one_minus_gamma + beta * gamma);
}

// log of h(w) w (1 - w) at log-odds x: the density of logit(W) up to the
// normalizing constant.
double logit_space_log_density(double x, const SpectralModelSpec& spec) {
  const double log_w = -softplus(-x);
  const double log_1mw = -softplus(x);
  double log_h = 0.0;
  if (const auto* l = std::get_if<LogisticParams>(&spec.params()))
    log_h = logistic_log_h(log_w, log_1mw, x, l->phi);
  else if (const auto* b = std::get_if<BilogisticParams>(&spec.params()))
    log_h = bilogistic_log_h(log_w, log_1mw, b->alpha, b->beta);
  else
    throw UsageError("logit-space density is only defined for bivariate parametric families");
  return log_h + log_w + log_1mw;
}

template <class F>
double integrate_logit_space(F&& f) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, -kLogitRange, kLogitRange, 20, 1e-11, &error);
  if (!std::isfinite(value) || !(value > 0.0) || error > 1e-8 * std::abs(value))
    throw NumericalError("angular quadrature did not converge");
  return value;
}

/// Tabulated CDF of logit(W) on an adaptive window of the clipped interval.
/// Each cell stores the density at both ends and the midpoint; the density is
/// treated as the interpolating quadratic inside a cell, whose integral is
/// Simpson's rule.
class AngularTable {
 public:
  explicit AngularTable(const SpectralModelSpec& spec) {
    constexpr int kCoarse = 400;
    constexpr int kCells = 2048;
    std::vector<double> coarse(kCoarse + 1);
    const double step = 2.0 * kLogitRange / kCoarse;
    double peak = -kInf;
    for (int i = 0; i <= kCoarse; ++i) {
      coarse[i] = logit_space_log_density(-kLogitRange + step * i, spec);
      peak = std::max(peak, coarse[i]);
    }
    int first = 0, last = kCoarse;
    while (first < kCoarse && coarse[first] < peak - 40.0) ++first;
    while (last > 0 && coarse[last] < peak - 40.0) --last;
    const double lo = -kLogitRange + step * std::max(first - 1, 0);
    const double hi = -kLogitRange + step * std::min(last + 1, kCoarse);

    x_.resize(kCells + 1);
    g_.resize(kCells + 1);
    mid_.resize(kCells);
    cum_.assign(kCells + 1, 0.0);
    const double h = (hi - lo) / kCells;
    for (int i = 0; i <= kCells; ++i) {
      x_[i] = lo + h * i;
      g_[i] = std::exp(logit_space_log_density(x_[i], spec) - peak);
    }
    for (int i = 0; i < kCells; ++i) {
      mid_[i] = std::exp(logit_space_log_density(x_[i] + 0.5 * h, spec) - peak);
      cum_[i + 1] = cum_[i] + h * (g_[i] + 4.0 * mid_[i] + g_[i + 1]) / 6.0;
    }
    if (!(cum_.back() > 0.0) || !std::isfinite(cum_.back()))
      throw NumericalError("angular tabulation has no mass");
  }

  // Log-odds value whose tabulated CDF equals `p`.
  [[nodiscard]] double invert(double p) const {
    const double target = p * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t k = static_cast<std::size_t>(std::distance(cum_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, cum_.size() - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    const double rem = (target - cum_[k]) / h;
    const double g0 = g_[k], gm = mid_[k], g1 = g_[k + 1];
    const double b = -3.0 * g0 + 4.0 * gm - g1;
    const double c = 2.0 * g0 - 4.0 * gm + 2.0 * g1;
    auto mass = [&](double s) { return g0 * s + b * s * s / 2.0 + c * s * s * s / 3.0; };
    auto dens = [&](double s) { return g0 + b * s + c * s * s; };
    double lo = 0.0, hi = 1.0;
    double s = mass(1.0) > 0.0 ? std::clamp(rem / mass(1.0), 0.0, 1.0) : 0.5;
    for (int it = 0; it < 60; ++it) {
      const double f = mass(s) - rem;
      if (std::abs(f) < 1e-15 * (1.0 + std::abs(rem))) break;
      if (f > 0.0)
        hi = s;
      else
        lo = s;
      const double d = dens(s);
      double next = d > 0.0 ? s - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      s = next;
    }
    return x_[k] + s * h;
  }

 private:
  std::vector<double> x_, g_, mid_, cum_;
};

std::vector<double> cache_key(const SpectralModelSpec& spec) {
  std::vector<double> key{static_cast<double>(spec.family())};
  auto v = spec.to_vector();
  key.insert(key.end(), v.begin(), v.end());
  return key;
}

struct TableCache {
  std::mutex mutex;
  std::map<std::vector<double>, std::shared_ptr<const AngularTable>> tables;
};

TableCache& table_cache() {
  static TableCache cache;
  return cache;
}

std::shared_ptr<const AngularTable> cached_table(const SpectralModelSpec& spec) {
  constexpr std::size_t kMaxEntries = 20000;
  auto key = cache_key(spec);
  auto& cache = table_cache();
  std::lock_guard lock(cache.mutex);
  if (auto it = cache.tables.find(key); it != cache.tables.end()) return it->second;
  if (cache.tables.size() >= kMaxEntries) cache.tables.clear();
  auto table = std::make_shared<const AngularTable>(spec);
  cache.tables.emplace(std::move(key), table);
  return table;
}

// Copies w with every coordinate clipped into [eps, 1 - eps] and renormalized.
std::vector<double> clip_simplex(std::span<const double> w) {
  std::vector<double> out(w.begin(), w.end());
  if (out.size() == 2) {
    out[0] = std::clamp(out[0], kSimplexClip, 1.0 - kSimplexClip);
    out[1] = 1.0 - out[0];
    return out;
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::clamp(v, kSimplexClip, 1.0 - kSimplexClip);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

double log_factorial(std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

std::string to_string(SpectralFamily family) {
  switch (family) {
    case SpectralFamily::logistic:
      return "logistic";
    case SpectralFamily::bilogistic:
      return "bilogistic";
    case SpectralFamily::dirichlet_mixture:
      return "dirichlet_mixture";
  }
  return "unknown";
}

SpectralFamily parse_spectral_family(const std::string& name) {
  if (name == "logistic") return SpectralFamily::logistic;
  if (name == "bilogistic") return SpectralFamily::bilogistic;
  if (name == "dirichlet" || name == "dirichlet_mixture") return SpectralFamily::dirichlet_mixture;
  throw UsageError("unknown spectral family '" + name + "'");
}

SpectralModelSpec SpectralModelSpec::logistic(double phi) { return SpectralModelSpec(LogisticParams{phi}); }

SpectralModelSpec SpectralModelSpec::bilogistic(double alpha, double beta) {
  return SpectralModelSpec(BilogisticParams{alpha, beta});
}

SpectralModelSpec SpectralModelSpec::dirichlet_mixture(std::vector<double> weights,
                                                       std::vector<std::vector<double>> shapes) {
  return SpectralModelSpec(DirichletMixtureParams{std::move(weights), std::move(shapes)});
}

SpectralModelSpec SpectralModelSpec::from_vector(SpectralFamily family,
                                                 std::span<const double> theta, std::size_t d) {
  switch (family) {
    case SpectralFamily::logistic:
      if (theta.size() != 1) throw UsageError("logistic model takes one parameter");
      return logistic(theta[0]);
    case SpectralFamily::bilogistic:
      if (theta.size() != 2) throw UsageError("bilogistic model takes two parameters");
      return bilogistic(theta[0], theta[1]);
    case SpectralFamily::dirichlet_mixture: {
      if (d < 2 || theta.size() % (d + 1) != 0 || theta.empty())
        throw UsageError("Dirichlet mixture parameter vector has the wrong length");
      const std::size_t comps = theta.size() / (d + 1);
      std::vector<double> weights(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(comps));
      std::vector<std::vector<double>> shapes(comps);
      for (std::size_t i = 0; i < comps; ++i) {
        auto first = theta.begin() + static_cast<std::ptrdiff_t>(comps + i * d);
        shapes[i].assign(first, first + static_cast<std::ptrdiff_t>(d));
      }
      return dirichlet_mixture(std::move(weights), std::move(shapes));
    }
  }
  throw UsageError("unknown spectral family");
}

SpectralFamily SpectralModelSpec::family() const {
  return static_cast<SpectralFamily>(params_.index());
}

std::size_t SpectralModelSpec::dim() const {
  if (const auto* m = std::get_if<DirichletMixtureParams>(&params_))
    return m->shapes.empty() ? 0 : m->shapes.front().size();
  return 2;
}

std::size_t SpectralModelSpec::components() const {
  if (const auto* m = std::get_if<DirichletMixtureParams>(&params_)) return m->weights.size();
  return 1;
}

std::vector<double> SpectralModelSpec::to_vector() const {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          return {p.phi};
        } else if constexpr (std::is_same_v<T, BilogisticParams>) {
          return {p.alpha, p.beta};
        } else {
          std::vector<double> v = p.weights;
          for (const auto& s : p.shapes) v.insert(v.end(), s.begin(), s.end());
          return v;
        }
      },
      params_);
}

bool SpectralModelSpec::in_domain() const {
  try {
    validate();
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

void SpectralModelSpec::validate() const {
  if (const auto* l = std::get_if<LogisticParams>(&params_)) {
    check_open_unit(l->phi, "logistic phi");
  } else if (const auto* b = std::get_if<BilogisticParams>(&params_)) {
    check_open_unit(b->alpha, "bilogistic alpha");
    check_open_unit(b->beta, "bilogistic beta");
  } else {
    const auto& m = std::get<DirichletMixtureParams>(params_);
    if (m.weights.empty() || m.weights.size() != m.shapes.size())
      throw DomainError("Dirichlet mixture needs one shape vector per weight");
    double total = 0.0;
    for (double w : m.weights) {
      if (!(w > 0.0)) throw DomainError("Dirichlet mixture weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("Dirichlet mixture weights must sum to 1");
    const std::size_t d = m.shapes.front().size();
    if (d < 2) throw DomainError("Dirichlet mixture needs dimension >= 2");
    for (const auto& s : m.shapes) {
      if (s.size() != d) throw DomainError("Dirichlet shape vectors must share one dimension");
      for (double v : s)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Dirichlet shapes must be positive");
    }
  }
}

PointSet PolarDataset::angles_above(double r0) const {
  PointSet out;
  out.dim = w.dim;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] > r0) out.push_row(w.row(i));
  return out;
}

std::size_t PolarDataset::count_above(double r0) const {
  return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [r0](double v) { return v > r0; }));
}

void PolarDataset::validate() const {
  if (w.dim < 2) throw DomainError("polar dataset needs dimension >= 2");
  if (w.rows() != r.size()) throw DomainError("radial and angular parts differ in length");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0)) throw DomainError("radial components must be nonnegative");
    double total = 0.0;
    for (double v : w.row(i)) {
      if (!(v >= 0.0)) throw DomainError("simplex coordinates must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("simplex rows must sum to 1");
  }
}

PointSet frechet_transform(const PointSet& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.dim;
  if (n < 2) throw DomainError("Frechet transform needs at least two rows");
  PointSet out(d, std::vector<double>(n * d));
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.at(a, k) < data.at(b, k); });
    if (data.at(order.front(), k) == data.at(order.back(), k))
      throw DegenerateMarginError(k, "column " + std::to_string(k) + " is constant");
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && data.at(order[j + 1], k) == data.at(order[i], k)) ++j;
      const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
      const double z = -1.0 / std::log(rank / static_cast<double>(n + 1));
      for (std::size_t t = i; t <= j; ++t) out.at(order[t], k) = z;
      i = j + 1;
    }
  }
  return out;
}

PolarDataset to_pseudo_polar(const PointSet& z) {
  if (z.dim < 2) throw DomainError("pseudo-polar coordinates need dimension >= 2");
  PolarDataset out;
  out.w.dim = z.dim;
  out.r.reserve(z.rows());
  out.w.values.reserve(z.values.size());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double total = 0.0;
    for (double v : z.row(i)) {
      if (!(v > 0.0)) throw DomainError("pseudo-polar coordinates need positive entries");
      total += v;
    }
    out.r.push_back(total / static_cast<double>(z.dim));
    for (double v : z.row(i)) out.w.values.push_back(v / total);
  }
  return out;
}

PointSet from_pseudo_polar(const PolarDataset& polar) {
  PointSet z(polar.w.dim, std::vector<double>(polar.w.values.size()));
  const auto d = static_cast<double>(polar.w.dim);
  for (std::size_t i = 0; i < polar.size(); ++i)
    for (std::size_t k = 0; k < polar.w.dim; ++k) z.at(i, k) = d * polar.r[i] * polar.w.at(i, k);
  return z;
}

double bilogistic_gamma(double w, double alpha, double beta) {
  check_open_unit(w, "w");
  check_open_unit(alpha, "alpha");
  check_open_unit(beta, "beta");
  const double s = bilogistic_root_logit(std::log(w), std::log1p(-w), alpha, beta);
  return 1.0 / (1.0 + std::exp(-s));
}

double bilogistic_log_density(double w, double alpha, double beta) {
  check_open_unit(w, "w");
  check_open_unit(alpha, "alpha");
  check_open_unit(beta, "beta");
  return bilogistic_log_h(std::log(w), std::log1p(-w), alpha, beta);
}

double logistic_log_density(double w, double phi) {
  check_open_unit(w, "w");
  check_open_unit(phi, "phi");
  const double log_w = std::log(w);
  const double log_1mw = std::log1p(-w);
  return logistic_log_h(log_w, log_1mw, log_w - log_1mw, phi);
}

double dirichlet_log_density(std::span<const double> w, std::span<const double> shape) {
  if (w.size() != shape.size()) throw UsageError("Dirichlet point and shape differ in dimension");
  double total_shape = 0.0;
  double out = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] > 0.0)) return -kInf;
    total_shape += shape[k];
    out += (shape[k] - 1.0) * std::log(w[k]) - std::lgamma(shape[k]);
  }
  return out + std::lgamma(total_shape);
}

double dirichlet_mixture_log_density(std::span<const double> w, const SpectralModelSpec& spec) {
  const auto* m = std::get_if<DirichletMixtureParams>(&spec.params());
  if (m == nullptr) throw UsageError("expected a Dirichlet mixture specification");
  std::vector<double> terms(m->weights.size());
  double peak = -kInf;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = std::log(m->weights[i]) + dirichlet_log_density(w, m->shapes[i]);
    peak = std::max(peak, terms[i]);
  }
  if (!std::isfinite(peak)) return -kInf;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

double angular_log_density(std::span<const double> w, const SpectralModelSpec& spec) {
  const auto clipped = clip_simplex(w);
  switch (spec.family()) {
    case SpectralFamily::logistic: {
      const double phi = std::get<LogisticParams>(spec.params()).phi;
      const double log_w = std::log(clipped[0]);
      const double log_1mw = std::log(clipped[1]);
      return logistic_log_h(log_w, log_1mw, log_w - log_1mw, phi);
    }
    case SpectralFamily::bilogistic: {
      const auto& b = std::get<BilogisticParams>(spec.params());
      return bilogistic_log_h(std::log(clipped[0]), std::log(clipped[1]), b.alpha, b.beta);
    }
    case SpectralFamily::dirichlet_mixture:
      return dirichlet_mixture_log_density(clipped, spec);
  }
  return -kInf;
}

double normalize_angular(const SpectralModelSpec& spec) {
  spec.validate();
  if (spec.family() == SpectralFamily::dirichlet_mixture) return 1.0;
  return integrate_logit_space(
      [&](double x) { return std::exp(logit_space_log_density(x, spec)); });
}

double angular_log_likelihood(const SpectralModelSpec& spec, const PointSet& w) {
  if (spec.family() != SpectralFamily::dirichlet_mixture && w.dim != 2)
    throw UsageError("logistic and bilogistic models are bivariate only");
  if (w.dim != spec.dim()) throw UsageError("data and model differ in dimension");
  const double log_c = std::log(normalize_angular(spec));
  double total = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) total += angular_log_density(w.row(i), spec);
  return total - static_cast<double>(w.rows()) * log_c;
}

PointSet angular_sample(std::size_t n, const SpectralModelSpec& spec, Rng& rng) {
  spec.validate();
  PointSet out;
  out.dim = spec.dim();
  out.values.reserve(n * out.dim);
  if (const auto* m = std::get_if<DirichletMixtureParams>(&spec.params())) {
    std::vector<double> cumulative(m->weights.size());
    std::partial_sum(m->weights.begin(), m->weights.end(), cumulative.begin());
    std::vector<double> g(out.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * cumulative.back();
      const auto comp = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                   cumulative.begin()),
          cumulative.size() - 1);
      double total = 0.0;
      do {
        total = 0.0;
        for (std::size_t k = 0; k < out.dim; ++k) {
          g[k] = rng.gamma(m->shapes[comp][k]);
          total += g[k];
        }
      } while (!(total > 0.0));
      for (double v : g) out.values.push_back(v / total);
    }
    return out;
  }
  const auto table = cached_table(spec);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::clamp(table->invert(rng.uniform()), -kLogitRange, kLogitRange);
    out.values.push_back(1.0 / (1.0 + std::exp(-x)));
    out.values.push_back(1.0 / (1.0 + std::exp(x)));
  }
  return out;
}

std::size_t angular_cache_size() {
  auto& cache = table_cache();
  std::lock_guard lock(cache.mutex);
  return cache.tables.size();
}

SpectralMoment spectral_moment(const SpectralModelSpec& spec, std::size_t margin) {
  spec.validate();
  const std::size_t d = spec.dim();
  if (margin >= d) throw UsageError("margin index out of range");
  SpectralMoment out;
  if (const auto* m = std::get_if<DirichletMixtureParams>(&spec.params())) {
    // Mixture of Dirichlet means, exact.
    for (std::size_t i = 0; i < m->weights.size(); ++i) {
      const double total = std::accumulate(m->shapes[i].begin(), m->shapes[i].end(), 0.0);
      out.value += m->weights[i] * m->shapes[i][margin] / total;
    }
  } else {
    const double mass = normalize_angular(spec);
    const double first = integrate_logit_space([&](double x) {
      const double w = margin == 0 ? 1.0 / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
      return w * std::exp(logit_space_log_density(x, spec));
    });
    out.value = first / mass;
  }
  out.satisfies_constraint = std::abs(out.value - 1.0 / static_cast<double>(d)) < 1e-6;
  return out;
}

double spectral_log_posterior(std::span<const double> theta, const PointSet& w_data,
                              SpectralFamily family) {
  double log_prior = 0.0;
  for (double v : theta)
    if (!std::isfinite(v)) return -kInf;
  switch (family) {
    case SpectralFamily::logistic:
    case SpectralFamily::bilogistic:
      for (double v : theta)
        if (!(v > 0.0 && v < 1.0)) return -kInf;
      break;
    case SpectralFamily::dirichlet_mixture: {
      const std::size_t d = w_data.dim;
      if (theta.empty() || theta.size() % (d + 1) != 0)
        throw UsageError("Dirichlet mixture parameter vector has the wrong length");
      const std::size_t comps = theta.size() / (d + 1);
      double total = 0.0;
      for (std::size_t i = 0; i < comps; ++i) {
        if (!(theta[i] > 0.0)) return -kInf;
        total += theta[i];
      }
      if (std::abs(total - 1.0) > 1e-9) return -kInf;
      log_prior += log_factorial(comps - 1);
      const double log_range = std::log(std::log(100.0 / 0.1));
      for (std::size_t k = comps; k < theta.size(); ++k) {
        if (!(theta[k] > 0.1 && theta[k] < 100.0)) return -kInf;
        log_prior -= std::log(theta[k]) + log_range;
      }
      break;
    }
  }
  const auto spec = SpectralModelSpec::from_vector(family, theta, w_data.dim);
  return log_prior + angular_log_likelihood(spec, w_data);
}

}  // namespace evsurprise
