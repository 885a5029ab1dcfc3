// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/model/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {

TokenId sample_next(std::span<const double> logits, const SamplingConfig& config, Rng& rng) {
  if (config.top_k == 0) throw ConfigError("top_k must be ≥ 1");
  if (config.temperature < 0.0) throw ConfigError(fmt::format("temperature {} < 0", config.temperature));
  if (logits.empty()) throw DomainError("sample_next on empty logits");
  if (config.temperature == 0.0 || config.top_k == 1) {
    // max_element returns the first maximum, i.e. the lowest id.
    return static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  std::vector<TokenId> order(logits.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k = std::min(config.top_k, logits.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](TokenId a, TokenId b) {
                      return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
                    });
  order.resize(k);
  std::vector<double> weights(k);
  const double peak = logits[order[0]];
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    weights[i] = std::exp((logits[order[i]] - peak) / config.temperature);
    total += weights[i];
  }
  double draw = rng.uniform() * total;
  for (std::size_t i = 0; i < k; ++i) {
    draw -= weights[i];
    if (draw < 0.0) return order[i];
  }
  return order[k - 1];
}

}  // namespace wlab
