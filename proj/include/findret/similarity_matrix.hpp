#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace findret {

/// Dense query-by-corpus score matrix, row-major.
struct SimilarityMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<double> values;

  std::size_t rows() const noexcept { return row_ids.size(); }
  std::size_t cols() const noexcept { return col_ids.size(); }

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }
};

/// Min-max scales `values` into [0, 1] in place. A constant row (including an
/// all-zero one) maps to all zeros.
inline void min_max_normalize(std::span<double> values) {
  if (values.empty()) return;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - min;
  if (!(range > 0.0)) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (auto& v : values) v = (v - min) / range;
}

}  // namespace findret
