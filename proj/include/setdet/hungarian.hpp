/* Copyright 2026 The setdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SETDET_HUNGARIAN_HPP_
#define SETDET_HUNGARIAN_HPP_

#include <concepts>
#include <cstddef>
#include <optional>
#include <vector>

#include "setdet/error.hpp"

namespace setdet {

// Edge weights for the assignment solver: an ordered commutative group.
// A value-initialized Cost is the zero element.
template <typename Cost>
concept AssignmentCost = std::regular<Cost> && requires(Cost a, Cost b) {
  { a + b } -> std::convertible_to<Cost>;
  { a - b } -> std::convertible_to<Cost>;
  { a < b } -> std::convertible_to<bool>;
};

// Kuhn-Munkres with dual potentials (O(rows^2 * cols)) for rows <= cols.
// `cost(i, j)` yields the weight of assigning row i to column j. Returns
// the column chosen for every row; the assignment minimizes the summed
// weight under Cost's ordering.
template <AssignmentCost Cost, typename CostFn>
std::vector<std::size_t> solve_assignment(std::size_t rows, std::size_t cols,
                                          CostFn&& cost) {
  if (rows > cols) {
    throw Error("assignment needs rows <= cols");
  }
  if (rows == 0) return {};

  // 1-based with a virtual column 0 that anchors each augmenting search.
  std::vector<Cost> u(rows + 1), v(cols + 1);
  std::vector<std::size_t> owner(cols + 1, 0), way(cols + 1, 0);

  for (std::size_t i = 1; i <= rows; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<std::optional<Cost>> minv(cols + 1);
    std::vector<bool> used(cols + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      std::optional<Cost> delta;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const Cost cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (!minv[j] || cur < *minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (!delta || *minv[j] < *delta) {
          delta = *minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[owner[j]] = u[owner[j]] + *delta;
          v[j] = v[j] - *delta;
        } else {
          *minv[j] = *minv[j] - *delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(rows);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (owner[j] != 0) row_to_col[owner[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace setdet

#endif  // SETDET_HUNGARIAN_HPP_
