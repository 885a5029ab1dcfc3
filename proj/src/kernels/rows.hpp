// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace wlab::kernels::detail {

// Out-of-line so serial and parallel paths execute the same instructions.
void row_nn(std::size_t n, std::size_t p, const double* a_row, const double* b,
            double* c_row);
void row_tn(std::size_t i, std::size_t m, std::size_t n, std::size_t p,
            const double* a, const double* b, double* c_row);
void row_softmax(std::size_t cols, double* row);
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

}  // namespace wlab::kernels::detail
