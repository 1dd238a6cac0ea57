// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posefuse/error.hpp"

namespace posefuse {

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

// Shortest augmenting path with row/column potentials, O(n^3).
std::vector<int> solve_min_cost_square(const DenseMatrix& cost) {
  if (cost.rows != cost.cols) {
    fail(ErrorCode::kDimsMismatch, "solve_min_cost_square needs a square matrix");
  }
  const std::size_t n = cost.rows;
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // 1-based; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);

  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t i0 = owner[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[owner[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

namespace {

struct Subproblem {
  double best = 0.0;
  std::vector<int> cols;  // chosen column (in the padded matrix) per remaining row
};

// Maximum of sum S(r, c) over assignments of rows [first_row, n) to the
// columns flagged free.
Subproblem solve_remaining(const DenseMatrix& sim, double max_entry, std::size_t first_row,
                           const std::vector<bool>& col_taken) {
  const std::size_t n = sim.rows;
  std::vector<int> free_cols;
  for (std::size_t j = 0; j < n; ++j) {
    if (!col_taken[j]) free_cols.push_back(static_cast<int>(j));
  }
  const std::size_t m = n - first_row;
  Subproblem out;
  if (m == 0) return out;
  DenseMatrix cost(m, m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) cost(r, c) = max_entry - sim(first_row + r, free_cols[c]);
  }
  const auto local = solve_min_cost_square(cost);
  out.cols.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    out.cols[r] = free_cols[local[r]];
    out.best += sim(first_row + r, out.cols[r]);
  }
  return out;
}

}  // namespace

Assignment hungarian_assign(const DenseMatrix& values) {
  Assignment result;
  result.row_to_col.assign(values.rows, -1);
  if (values.rows == 0 || values.cols == 0) return result;
  for (double x : values.values) {
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "assignment matrix has non-finite entries");
  }

  const std::size_t n = std::max(values.rows, values.cols);
  DenseMatrix sim(n, n, 0.0);
  double max_entry = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < values.rows; ++i) {
    for (std::size_t j = 0; j < values.cols; ++j) {
      sim(i, j) = values(i, j);
      max_entry = std::max(max_entry, values(i, j));
      max_abs = std::max(max_abs, std::abs(values(i, j)));
    }
  }

  std::vector<bool> col_taken(n, false);
  Subproblem current = solve_remaining(sim, max_entry, 0, col_taken);
  const double optimum = current.best;
  const double tol = 1e-12 * (1.0 + std::abs(optimum) + static_cast<double>(n) * max_abs);

  // Fix rows one at a time to the smallest column that still admits an
  // optimal completion.
  std::vector<int> chosen(n, -1);
  double fixed_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int incumbent = current.cols[0];
    int pick = incumbent;
    Subproblem rest_for_pick;
    bool have_rest = false;
    for (int j = 0; j < incumbent; ++j) {
      if (col_taken[j]) continue;
      col_taken[j] = true;
      Subproblem rest = solve_remaining(sim, max_entry, i + 1, col_taken);
      col_taken[j] = false;
      if (fixed_sum + sim(i, j) + rest.best >= optimum - tol) {
        pick = j;
        rest_for_pick = std::move(rest);
        have_rest = true;
        break;
      }
    }
    chosen[i] = pick;
    col_taken[pick] = true;
    fixed_sum += sim(i, pick);
    if (have_rest) {
      current = std::move(rest_for_pick);
    } else {
      current.cols.erase(current.cols.begin());
    }
  }

  for (std::size_t i = 0; i < values.rows; ++i) {
    if (chosen[i] >= 0 && static_cast<std::size_t>(chosen[i]) < values.cols) {
      result.row_to_col[i] = chosen[i];
      result.total += values(i, chosen[i]);
    }
  }
  return result;
}

}  // namespace posefuse
