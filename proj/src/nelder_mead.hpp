#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace evsurprise::detail {

template <class Point>
struct SimplexResult {
  Point x{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Objective values of +inf act as walls. Point is a
// std::array<double, N> or a std::vector<double>.
template <class Point>
SimplexResult<Point> nelder_mead(const std::function<double(const Point&)>& f, Point start,
                                 Point step, double ftol = 1e-10, int max_iter = 4000) {
  const std::size_t N = start.size();
  std::vector<Point> pts(N + 1, start);
  std::vector<double> vals(N + 1);
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i <= N; ++i) vals[i] = f(pts[i]);

  SimplexResult<Point> out;
  std::vector<std::size_t> order(N + 1);
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[N - 1];
    out.iterations = it;

    if (std::isfinite(vals[worst]) &&
        std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) {
      double size = 0.0;
      for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t k = 0; k < N; ++k) size = std::max(size, std::abs(pts[i][k] - pts[best][k]));
      if (size < 1e-7) {
        out.converged = true;
        break;
      }
    }

    Point centroid = start;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[i][k] / static_cast<double>(N);
    }
    auto along = [&](double t) {
      Point p = centroid;
      for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };

    const auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < vals[best]) {
      const auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < N; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  out.x = pts[best];
  out.value = vals[best];
  return out;
}

}  // namespace evsurprise::detail
