// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wlab/adapter/task.hpp"
#include "wlab/autodiff/ops.hpp"
#include "wlab/model/config.hpp"

namespace wlab {

/// Pre-norm decoder-only transformer with learned positional embeddings.
///
/// Parameters live in an ordered name → Tensor map. Attention and MLP weight
/// matrices are stored [out×in] and may carry one AdapterLayer each, whose
/// delta is added to the frozen projection.
class Transformer {
 public:
  using ParameterMap = std::map<std::string, Tensor>;

  /// Weights ~ N(0, 0.02²), LayerNorm gain 1 / bias 0, other biases 0.
  Transformer(ModelConfig config, std::uint64_t seed);
  /// Wraps existing parameters (e.g. from a checkpoint); names and shapes are checked.
  Transformer(ModelConfig config, ParameterMap parameters);
  Transformer(const Transformer&) = delete;
  Transformer& operator=(const Transformer&) = delete;
  Transformer(Transformer&&) = default;
  Transformer& operator=(Transformer&&) = default;

  const ModelConfig& config() const noexcept { return config_; }
  ParameterMap& parameters() noexcept { return params_; }
  const ParameterMap& parameters() const noexcept { return params_; }
  Tensor& parameter(const std::string& name);
  const Tensor& parameter(const std::string& name) const;

  /// Names of the weight matrices adapters may wrap.
  std::vector<std::string> adaptable_weights() const;
  /// Default LoRA targets: attention query and value projections of every block.
  std::vector<std::string> default_targets() const;

  /// ConfigError for unknown names or non-adaptable weights; ContractError if
  /// the weight already carries an adapter.
  void attach_adapter(const std::string& weight, std::shared_ptr<AdapterLayer> layer);
  void detach_adapters() { adapters_.clear(); }
  const AdapterLayer* adapter(const std::string& weight) const;
  bool has_adapters() const noexcept { return !adapters_.empty(); }

  /// Marks every backbone tensor (un)trainable.
  void set_backbone_trainable(bool trainable);

  /// Logits [T×V] for ids[0..T). Position i depends on ids[0..=i] only.
  /// Throws LengthError for empty or overlong input.
  Var forward(Tape& tape, std::span<const TokenId> ids, const AdapterContext& ctx);

  /// Eval-mode convenience.
  Tensor logits(std::span<const TokenId> ids, const AdapterContext& ctx = {});

 private:
  friend class DecodeSession;

  Var project(Tape& tape, Var x, const std::string& weight, const std::string& bias,
              const AdapterContext& ctx);
  void check_parameters() const;

  ModelConfig config_;
  ParameterMap params_;
  std::map<std::string, std::shared_ptr<AdapterLayer>> adapters_;
};

/// Incremental inference with a key/value cache. Produces the same logits as
/// Transformer::forward up to floating-point reassociation.
class DecodeSession {
 public:
  DecodeSession(const Transformer& model, AdapterContext ctx);

  /// Appends one token and returns the logits row for the next position.
  std::vector<double> step(TokenId id);
  std::size_t position() const noexcept { return position_; }

 private:
  void linear_row(std::span<const double> x, const std::string& weight, const std::string& bias,
                  std::span<double> out) const;

  const Transformer& model_;
  AdapterContext ctx_;
  std::size_t position_ = 0;
  std::vector<std::vector<double>> keys_;    // per layer, [pos×d]
  std::vector<std::vector<double>> values_;  // per layer, [pos×d]
};

}  // namespace wlab
