// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "rows.hpp"

#include <algorithm>
#include <cmath>

namespace wlab::kernels::detail {

__attribute__((noinline)) void row_nn(std::size_t n, std::size_t p,
                                      const double* a_row, const double* b,
                                      double* c_row) {
  for (std::size_t k = 0; k < n; ++k) {
    const double aik = a_row[k];
    const double* b_row = b + k * p;
    for (std::size_t j = 0; j < p; ++j) c_row[j] += aik * b_row[j];
  }
}

__attribute__((noinline)) void row_tn(std::size_t i, std::size_t m, std::size_t n,
                                      std::size_t p, const double* a,
                                      const double* b, double* c_row) {
  for (std::size_t k = 0; k < n; ++k) {
    const double aki = a[k * m + i];
    const double* b_row = b + k * p;
    for (std::size_t j = 0; j < p; ++j) c_row[j] += aki * b_row[j];
  }
}

__attribute__((noinline)) void row_softmax(std::size_t cols, double* row) {
  const double peak = *std::max_element(row, row + cols);
  double total = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    row[j] = std::exp(row[j] - peak);
    total += row[j];
  }
  const double inv = 1.0 / total;
  for (std::size_t j = 0; j < cols; ++j) row[j] *= inv;
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = in[r * cols + c];
}

}  // namespace wlab::kernels::detail
