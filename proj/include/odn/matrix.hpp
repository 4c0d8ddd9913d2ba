// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "odn/error.hpp"

namespace odn {

/// Plain row-major 2D array of doubles used for datasets, sample grids and
/// anything else that never participates in differentiation.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw DimensionError("Matrix: buffer length does not match rows*cols");
    }
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool empty() const { return data.empty(); }

  /// Rows [first, first+count) as a new matrix.
  Matrix slice_rows(std::size_t first, std::size_t count) const {
    if (first + count > rows) throw IndexError("Matrix::slice_rows out of range");
    return Matrix(count, cols,
                  std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(first * cols),
                                      data.begin() + static_cast<std::ptrdiff_t>((first + count) * cols)));
  }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= rows) throw IndexError("Matrix::select_rows out of range");
      auto src = row(idx[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

}  // namespace odn
