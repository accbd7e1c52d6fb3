#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

#include "senmfk/types.hpp"

namespace senmfk {

/// Maximum-weight perfect matching on a square score matrix (Hungarian
/// method, O(k^3)). Returns row_to_col with row_to_col[r] = matched column.
template <typename Derived>
std::vector<int> max_weight_assignment(const Eigen::MatrixBase<Derived>& score) {
  const int n = static_cast<int>(score.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; cost = -score.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int row = 1; row <= n; ++row) {
    col_owner[0] = row;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = col_owner[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -static_cast<double>(score(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const int j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (col_owner[j] > 0) row_to_col[col_owner[j] - 1] = j - 1;
  }
  return row_to_col;
}

/// Greedy one-to-one matching by descending score; ties resolved by
/// (row, col) order.
template <typename Derived>
std::vector<int> greedy_assignment(const Eigen::MatrixBase<Derived>& score) {
  const int n = static_cast<int>(score.rows());
  std::vector<std::tuple<double, int, int>> cells;
  cells.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) cells.emplace_back(static_cast<double>(score(r, c)), r, c);
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<int> row_to_col(n, -1);
  std::vector<char> col_taken(n, 0);
  int matched = 0;
  for (const auto& [s, r, c] : cells) {
    if (row_to_col[r] >= 0 || col_taken[c]) continue;
    row_to_col[r] = c;
    col_taken[c] = 1;
    if (++matched == n) break;
  }
  return row_to_col;
}

}  // namespace senmfk
