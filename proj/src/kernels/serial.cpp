// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cassert>
#include <vector>

#include "rows.hpp"
#include "wlab/kernels/kernels.hpp"

namespace wlab::kernels::serial {

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.m * d.n && b.size() == d.n * d.p && c.size() == d.m * d.p);
  for (std::size_t i = 0; i < d.m; ++i)
    detail::row_nn(d.n, d.p, a.data() + i * d.n, b.data(), c.data() + i * d.p);
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.m * d.n && b.size() == d.p * d.n && c.size() == d.m * d.p);
  std::vector<double> bt(d.n * d.p);
  detail::transpose(d.p, d.n, b.data(), bt.data());
  for (std::size_t i = 0; i < d.m; ++i)
    detail::row_nn(d.n, d.p, a.data() + i * d.n, bt.data(), c.data() + i * d.p);
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.n * d.m && b.size() == d.n * d.p && c.size() == d.m * d.p);
  for (std::size_t i = 0; i < d.m; ++i)
    detail::row_tn(i, d.m, d.n, d.p, a.data(), b.data(), c.data() + i * d.p);
}

void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x) {
  assert(x.size() == rows * cols);
  for (std::size_t r = 0; r < rows; ++r) detail::row_softmax(cols, x.data() + r * cols);
}

}  // namespace wlab::kernels::serial
