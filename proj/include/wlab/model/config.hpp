// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <json.hpp>

namespace wlab {

/// Decoder-only transformer hyperparameters. Defaults are the desk-scale model.
struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ff = 256;
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 256;
  double dropout_p = 0.0;

  /// Throws ConfigError on a violated invariant.
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace wlab
