#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evsurprise {

/// Rows of equal dimension stored row-major. Used for raw data matrices,
/// simplex samples and univariate datasets (dim = 1).
struct PointSet {
  std::size_t dim = 1;
  std::vector<double> values;

  PointSet() = default;
  PointSet(std::size_t d, std::vector<double> v) : dim(d), values(std::move(v)) {}

  [[nodiscard]] std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  [[nodiscard]] bool empty() const { return values.empty(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  [[nodiscard]] double at(std::size_t i, std::size_t k) const { return values[i * dim + k]; }
  [[nodiscard]] double& at(std::size_t i, std::size_t k) { return values[i * dim + k]; }
  void push_row(std::span<const double> r) { values.insert(values.end(), r.begin(), r.end()); }

  friend bool operator==(const PointSet&, const PointSet&) = default;
};

}  // namespace evsurprise
