// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense row-major kernels. Every kernel accumulates into its output.
//
// `serial::` is the reference implementation. `parallel::` splits the outer
// row loop across OpenMP threads; both call the same out-of-line row kernels,
// so results are bit-identical regardless of thread count. The unqualified
// entry points dispatch to `parallel::` above a work threshold.

#include <cstddef>
#include <span>

namespace wlab::kernels {

struct GemmDims {
  std::size_t m;  // rows of the output
  std::size_t n;  // contracted dimension
  std::size_t p;  // columns of the output
};

namespace serial {
/// C[m×p] += A[m×n] · B[n×p]
void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
/// C[m×p] += A[m×n] · B[p×n]ᵀ
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
/// C[m×p] += A[n×m]ᵀ · B[n×p]
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
/// In-place softmax of each row of x[rows×cols].
void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x);
}  // namespace serial

namespace parallel {
void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x);
}  // namespace parallel

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b,
             std::span<double> c);
void softmax_rows(std::size_t rows, std::size_t cols, std::span<double> x);

/// Threads the parallel kernels will use (1 when built without OpenMP).
int max_threads();
void set_num_threads(int n);

}  // namespace wlab::kernels
