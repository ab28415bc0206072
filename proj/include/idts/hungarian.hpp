// Copyright 2026 The idts Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace idts {

/// Dense row-major cost matrix. Forbidden pairs hold +infinity.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Minimum-cost assignment (Kuhn-Munkres with row/column potentials,
/// O(n^3)). Rectangular inputs are padded to square with zero-cost dummy
/// rows or columns, which shifts every complete assignment by the same
/// amount. Forbidden entries are replaced by a cost larger than any
/// assignment of finite entries, so the solver only uses one when no
/// alternative exists; such pairs are dropped from the result. Returns
/// (row, col) pairs sorted by row. The scan order is fixed (lowest row,
/// then lowest column wins among equal reductions), so ties resolve
/// deterministically.
inline std::vector<std::pair<int, int>> SolveAssignment(const CostMatrix& cost) {
  const std::size_t n_rows = cost.rows();
  const std::size_t n_cols = cost.cols();
  if (n_rows == 0 || n_cols == 0) return {};
  const std::size_t n = std::max(n_rows, n_cols);

  double max_abs = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double v = cost(r, c);
      if (std::isfinite(v)) max_abs = std::max(max_abs, std::abs(v));
    }
  }
  const double big = (2.0 * max_abs + 1.0) * static_cast<double>(n + 1);

  auto entry = [&](std::size_t r, std::size_t c) -> double {
    if (r >= n_rows || c >= n_cols) return 0.0;
    const double v = cost(r, c);
    return std::isfinite(v) ? v : big;
  };

  // 1-based arrays; index 0 is the virtual start column.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_v(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(min_v.begin(), min_v.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> out;
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = match[j] - 1;
    const std::size_t c = j - 1;
    if (r < n_rows && c < n_cols && std::isfinite(cost(r, c))) {
      out.emplace_back(static_cast<int>(r), static_cast<int>(c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double AssignmentCost(const CostMatrix& cost,
                             const std::vector<std::pair<int, int>>& pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

}  // namespace idts
