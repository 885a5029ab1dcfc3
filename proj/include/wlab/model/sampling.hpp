// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "wlab/autodiff/ops.hpp"

namespace wlab {

class Rng;

struct SamplingConfig {
  double temperature = 0.0;
  std::size_t top_k = 1;
};

/// Greedy argmax (lowest id wins ties) when temperature is 0 or top_k is 1;
/// otherwise samples from the temperature-scaled softmax over the top_k logits.
/// ConfigError when top_k == 0 or temperature < 0.
TokenId sample_next(std::span<const double> logits, const SamplingConfig& config, Rng& rng);

}  // namespace wlab
