// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wlab/kernels/kernels.hpp"
#include "wlab/util/rng.hpp"

namespace wlab::kernels {
namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

TEST(Kernels, SerialGemmMatchesTripleLoop) {
  Rng rng(1);
  const GemmDims d{7, 5, 9};
  auto a = random_vec(d.m * d.n, rng), b = random_vec(d.n * d.p, rng);
  std::vector<double> c(d.m * d.p, 0.0);
  serial::gemm_nn(d, a, b, c);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t j = 0; j < d.p; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < d.n; ++k) ref += a[i * d.n + k] * b[k * d.p + j];
      EXPECT_NEAR(c[i * d.p + j], ref, 1e-12);
    }
}

TEST(Kernels, TransposedVariantsAgreeWithNn) {
  Rng rng(2);
  const GemmDims d{6, 4, 5};
  auto a = random_vec(d.m * d.n, rng), b = random_vec(d.n * d.p, rng);
  std::vector<double> bt(d.p * d.n), at(d.n * d.m);
  for (std::size_t k = 0; k < d.n; ++k) {
    for (std::size_t j = 0; j < d.p; ++j) bt[j * d.n + k] = b[k * d.p + j];
    for (std::size_t i = 0; i < d.m; ++i) at[k * d.m + i] = a[i * d.n + k];
  }
  std::vector<double> nn(d.m * d.p), nt(d.m * d.p), tn(d.m * d.p);
  serial::gemm_nn(d, a, b, nn);
  serial::gemm_nt(d, a, bt, nt);
  serial::gemm_tn(d, at, b, tn);
  for (std::size_t i = 0; i < nn.size(); ++i) {
    EXPECT_NEAR(nt[i], nn[i], 1e-12);
    EXPECT_NEAR(tn[i], nn[i], 1e-12);
  }
}

TEST(Kernels, ParallelIsBitIdenticalToSerial) {
  Rng rng(3);
  const GemmDims d{130, 70, 90};
  auto a = random_vec(d.m * d.n, rng), b = random_vec(d.n * d.p, rng);
  auto bt = random_vec(d.p * d.n, rng), at = random_vec(d.n * d.m, rng);
  auto run = [&](auto nn, auto nt, auto tn) {
    std::vector<double> out(3 * d.m * d.p, 0.5);
    std::span<double> s(out);
    nn(d, a, b, s.subspan(0, d.m * d.p));
    nt(d, a, bt, s.subspan(d.m * d.p, d.m * d.p));
    tn(d, at, b, s.subspan(2 * d.m * d.p, d.m * d.p));
    return out;
  };
  auto s = run(serial::gemm_nn, serial::gemm_nt, serial::gemm_tn);
  auto p = run(parallel::gemm_nn, parallel::gemm_nt, parallel::gemm_tn);
  EXPECT_EQ(s, p);

  auto x = random_vec(40 * 33, rng), y = x;
  serial::softmax_rows(40, 33, x);
  parallel::softmax_rows(40, 33, y);
  EXPECT_EQ(x, y);
}

TEST(Kernels, SoftmaxRowsSumToOne) {
  Rng rng(4);
  auto x = random_vec(8 * 11, rng);
  x[3] = 800.0;
  softmax_rows(8, 11, x);
  for (std::size_t r = 0; r < 8; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 11; ++c) total += x[r * 11 + c];
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace wlab::kernels
