// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cassert>
#include <cstdint>
#include <vector>

#ifdef WLAB_HAVE_OPENMP
#include <omp.h>
#endif

#include "rows.hpp"
#include "wlab/kernels/kernels.hpp"

namespace wlab::kernels {
namespace parallel {

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.m * d.n && b.size() == d.n * d.p && c.size() == d.m * d.p);
  const auto rows = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    detail::row_nn(d.n, d.p, a.data() + i * d.n, b.data(), c.data() + i * d.p);
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.m * d.n && b.size() == d.p * d.n && c.size() == d.m * d.p);
  std::vector<double> bt(d.n * d.p);
  detail::transpose(d.p, d.n, b.data(), bt.data());
  const auto rows = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    detail::row_nn(d.n, d.p, a.data() + i * d.n, bt.data(), c.data() + i * d.p);
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  assert(a.size() == d.n * d.m && b.size() == d.n * d.p && c.size() == d.m * d.p);
  const auto rows = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    detail::row_tn(static_cast<std::size_t>(i), d.m, d.n, d.p, a.data(), b.data(),
                   c.data() + i * d.p);
}

void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x) {
  assert(x.size() == rows * cols);
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) detail::row_softmax(cols, x.data() + r * cols);
}

}  // namespace parallel

namespace {
// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 16;

bool use_parallel(std::size_t work) { return work >= kParallelWork && max_threads() > 1; }
}  // namespace

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  if (use_parallel(d.m * d.n * d.p)) {
    parallel::gemm_nn(d, a, b, c);
  } else {
    serial::gemm_nn(d, a, b, c);
  }
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  if (use_parallel(d.m * d.n * d.p)) {
    parallel::gemm_nt(d, a, b, c);
  } else {
    serial::gemm_nt(d, a, b, c);
  }
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c) {
  if (use_parallel(d.m * d.n * d.p)) {
    parallel::gemm_tn(d, a, b, c);
  } else {
    serial::gemm_tn(d, a, b, c);
  }
}

void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x) {
  if (use_parallel(rows * cols * 8)) {
    parallel::softmax_rows(rows, cols, x);
  } else {
    serial::softmax_rows(rows, cols, x);
  }
}

int max_threads() {
#ifdef WLAB_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_num_threads(int n) {
#ifdef WLAB_HAVE_OPENMP
  omp_set_num_threads(n < 1 ? 1 : n);
#else
  (void)n;
#endif
}

}  // namespace wlab::kernels
