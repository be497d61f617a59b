#pragma once
// Independent reference routines for the unit tests. Nothing here calls into
// the library's own quadrature or statistics code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15.0 * eps) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on a finite interval.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double eps = 1e-12, int depth = 50) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, eps, depth);
}

// Integral over (a, inf) through x = a + s t/(1-t). Integrand must vanish at the
// ends or be finite there.
inline double simpson_half_line(const std::function<double(double)>& f, double a, double s,
                                double eps = 1e-12) {
  auto g = [&](double t) {
    if (t <= 0.0) return f(a) * s;
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    const double v = f(a + s * t / one_minus) * s / (one_minus * one_minus);
    return std::isfinite(v) ? v : 0.0;
  };
  // split so the recursion sees the bulk
  double total = 0.0;
  const double cuts[] = {0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 1.0};
  for (int i = 0; i + 1 < 9; ++i) total += simpson(g, cuts[i], cuts[i + 1], eps);
  return total;
}

// Two-sided one-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Asymptotic critical values.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }
inline double ks_critical_5pct(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
