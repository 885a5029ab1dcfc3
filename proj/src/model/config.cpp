// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/model/config.hpp"

#include <fmt/format.h>

#include "wlab/util/error.hpp"

namespace wlab {

void ModelConfig::validate() const {
  if (n_layers == 0) throw ConfigError("model: n_layers must be ≥ 1");
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ConfigError(fmt::format("model: d_model {} not divisible by n_heads {}", d_model, n_heads));
  }
  if (d_ff == 0) throw ConfigError("model: d_ff must be ≥ 1");
  if (vocab_size == 0) throw ConfigError("model: vocab_size must be ≥ 1");
  if (max_seq_len == 0) throw ConfigError("model: max_seq_len must be ≥ 1");
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ConfigError(fmt::format("model: dropout_p {} not in [0, 1)", dropout_p));
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"n_layers", c.n_layers}, {"n_heads", c.n_heads},         {"d_model", c.d_model},
       {"d_ff", c.d_ff},         {"vocab_size", c.vocab_size},   {"max_seq_len", c.max_seq_len},
       {"dropout_p", c.dropout_p}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_model = j.value("d_model", c.d_model);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.dropout_p = j.value("dropout_p", c.dropout_p);
}

}  // namespace wlab
