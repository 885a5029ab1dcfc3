// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <vector>

#include <benchmark/benchmark.h>

#include "wlab/kernels/kernels.hpp"
#include "wlab/util/rng.hpp"

namespace {

using wlab::kernels::GemmDims;

std::vector<double> random_matrix(std::size_t n, std::uint64_t seed) {
  wlab::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

template <void (*Gemm)(GemmDims, std::span<const double>, std::span<const double>, std::span<double>)>
void BM_Gemm(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const GemmDims d{s, s, s};
  const auto a = random_matrix(s * s, 1), b = random_matrix(s * s, 2);
  std::vector<double> c(s * s);
  for (auto _ : state) {
    Gemm(d, a, b, c);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * s * s * s));
  state.counters["threads"] = wlab::kernels::max_threads();
}

template <void (*Softmax)(std::size_t, std::size_t, std::span<double>)>
void BM_Softmax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0)), cols = std::size_t{512};
  const auto src = random_matrix(rows * cols, 3);
  std::vector<double> x(src.size());
  for (auto _ : state) {
    x = src;
    Softmax(rows, cols, x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * cols));
}

BENCHMARK(BM_Gemm<wlab::kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Gemm<wlab::kernels::parallel::gemm_nn>)->Name("gemm_nn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Gemm<wlab::kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(128);
BENCHMARK(BM_Gemm<wlab::kernels::parallel::gemm_nt>)->Name("gemm_nt/parallel")->Arg(128);
BENCHMARK(BM_Gemm<wlab::kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(128);
BENCHMARK(BM_Gemm<wlab::kernels::parallel::gemm_tn>)->Name("gemm_tn/parallel")->Arg(128);
BENCHMARK(BM_Softmax<wlab::kernels::serial::softmax_rows>)->Name("softmax_rows/serial")->Arg(256);
BENCHMARK(BM_Softmax<wlab::kernels::parallel::softmax_rows>)->Name("softmax_rows/parallel")->Arg(256);

}  // namespace

BENCHMARK_MAIN();
