// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/autodiff/tensor.hpp"

namespace wlab {

struct TrainConfig {
  double peak_lr = 1e-4;
  double warmup_ratio = 0.1;
  std::size_t epochs_per_stage = 3;
  std::size_t grad_accum_steps = 8;
  std::size_t micro_batch_size = 1;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::optional<double> max_grad_norm;
  std::uint64_t seed = 0;
  /// Examples kept per stage after a seeded shuffle; 0 keeps everything.
  std::size_t max_samples_per_stage = 1000;
  /// Hard cap on optimizer steps per stage.
  std::optional<std::size_t> max_steps;
  /// One warmup + cosine schedule spanning every stage instead of one per stage.
  bool shared_schedule = false;

  std::size_t examples_per_step() const { return grad_accum_steps * micro_batch_size; }
  /// ConfigError on invalid values.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Linear warmup over ⌈warmup_ratio·total⌉ steps to peak_lr, then cosine decay
/// to 0 at `total`. Accepts fractional steps; 0 for step ≥ total.
/// ConfigError when total is 0.
double lr_at(double step, std::size_t total, const TrainConfig& config);
std::size_t warmup_steps(std::size_t total, const TrainConfig& config);

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

/// Decoupled weight decay Adam:
///   m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g²,
///   θ ← θ − lr·(m̂/(√v̂ + ε) + λθ)
/// with bias-corrected m̂, v̂. A missing gradient counts as zero.
class AdamW {
 public:
  explicit AdamW(const TrainConfig& config);

  /// TrainingError naming the parameter on a non-finite gradient; nothing is
  /// updated in that case.
  void step(const std::vector<NamedTensor>& params, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
  std::map<const Tensor*, Moments> state_;
};

/// Global L2 norm of the gradients of `params`.
double grad_norm(const std::vector<NamedTensor>& params);
/// Scales gradients so their global norm is at most `max_norm`. Returns the pre-clip norm.
double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm);

}  // namespace wlab
