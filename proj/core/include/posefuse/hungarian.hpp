// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace posefuse {

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }

  DenseMatrix transposed() const;
};

struct Assignment {
  std::vector<int> row_to_col;  // -1 when the row is left unassigned
  double total = 0.0;           // sum of matrix entries over assigned pairs, in row order
};

/// One-to-one assignment maximizing the summed entries of a rectangular
/// matrix. Solved as min-cost on (max_entry - value) after padding with
/// zero-valued dummy rows/columns. Among optimal assignments the
/// lexicographically smallest (row, col) sequence is returned.
Assignment hungarian_assign(const DenseMatrix& values);

/// Square min-cost solver underneath hungarian_assign. Returns the column
/// chosen for each row.
std::vector<int> solve_min_cost_square(const DenseMatrix& cost);

}  // namespace posefuse
