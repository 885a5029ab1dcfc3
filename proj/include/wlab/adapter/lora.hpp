// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/task.hpp"
#include "wlab/autodiff/tensor.hpp"

namespace wlab {

class Rng;
class Transformer;

enum class AdapterMode { PlainLoRA, WriterLoRA, MoELoRA };

std::string_view mode_name(AdapterMode mode);
AdapterMode parse_mode(std::string_view name);

struct AdapterSpec {
  std::size_t rank = 8;
  double scaling = 1.0;
  double dropout_p = 0.05;
  /// Backbone weight names; empty selects the model's default targets.
  std::vector<std::string> target_matrices;
  AdapterMode mode = AdapterMode::WriterLoRA;
  double init_std = 0.02;

  /// Checks the spec against one target of shape [d×k]. ConfigError on failure.
  void validate(std::size_t d, std::size_t k) const;
};

void to_json(nlohmann::json& j, const AdapterSpec& s);
void from_json(const nlohmann::json& j, AdapterSpec& s);

/// α_t = softmax(w)_t with w = 1 for `active` and 0 elsewhere, over `enabled`.
/// ContractError when `enabled` is empty or does not contain `active`.
GatingWeights gating_weights(std::span<const TaskId> enabled, TaskId active);

/// Gating used inside forward passes. Identical to gating_weights when
/// `active` is enabled; with active = Foundation every pre-weight is 0, giving
/// uniform weights. Empty `enabled` yields empty weights.
GatingWeights forward_gating(std::span<const TaskId> enabled, TaskId active);

/// Trainable adapter parameters per target.
/// WriterLoRA: r·k + (1 + n_tasks)·d·r; PlainLoRA: r·k + d·r;
/// MoELoRA: n_tasks·(r·k + d·r).
std::size_t param_count(const AdapterSpec& spec, std::size_t d, std::size_t k, std::size_t n_tasks);

/// Reference to one adapter matrix, keyed by (target, role, task).
struct AdapterTensorRef {
  std::string target;
  char role;  // 'A' or 'B'
  TaskId task;
  Tensor* tensor;

  std::string key() const;
};

/// Shared-foundation adapter on W₀ [d×k]:
///   h' = W₀x + s·(B_fdn·A_fdn·x + Σ_{t∈enabled} α_t·B_t·A_fdn·x)
/// With no tasks enabled this is plain LoRA with the (A_fdn, B_fdn) pair.
class WriterLoraLayer : public AdapterLayer {
 public:
  /// A_fdn ~ N(0, init_std²), B_fdn = 0. `base` must outlive the layer.
  WriterLoraLayer(const Tensor& base, std::size_t rank, double scaling, double dropout_p,
                  double init_std, Rng& rng, bool allow_tasks = true);

  std::size_t out_dim() const noexcept { return base_->dim(0); }
  std::size_t in_dim() const noexcept { return base_->dim(1); }
  std::size_t rank() const noexcept { return a_fdn_.dim(0); }
  double scaling() const noexcept { return scaling_; }
  const Tensor& base() const noexcept { return *base_; }

  Tensor& a_fdn() noexcept { return a_fdn_; }
  Tensor& b_fdn() noexcept { return b_fdn_; }
  const Tensor& a_fdn() const noexcept { return a_fdn_; }
  const Tensor& b_fdn() const noexcept { return b_fdn_; }
  Tensor& task_b(TaskId task);
  const Tensor& task_b(TaskId task) const;
  const std::vector<TaskId>& enabled() const noexcept { return enabled_; }

  /// Attaches a zero-initialised B_task. Tasks must be enabled in curriculum
  /// order; ContractError for Foundation, duplicates, or plain layers.
  void enable(TaskId task);

  /// Taped delta with explicit gating covering exactly the enabled tasks.
  Var delta_with(Tape& tape, Var x, const GatingWeights& gating, bool training, Rng* rng);

  Var delta(Tape& tape, Var x, const AdapterContext& ctx) override;
  void delta_row(std::span<const double> x, std::span<double> out,
                 const AdapterContext& ctx) const override;

  std::vector<AdapterTensorRef> tensors(const std::string& target);

 private:
  void check_gating(const GatingWeights& gating) const;

  const Tensor* base_;
  double scaling_;
  double dropout_p_;
  bool allow_tasks_;
  Tensor a_fdn_;
  Tensor b_fdn_;
  std::map<TaskId, Tensor> task_b_;
  std::vector<TaskId> enabled_;
};

/// Baseline: one (A_e, B_e) pair per downstream task, mixed by the same
/// active-task softmax:  h' = W₀x + s·Σ_e g_e·B_e·A_e·x
class MoeLoraLayer : public AdapterLayer {
 public:
  MoeLoraLayer(const Tensor& base, std::size_t rank, double scaling, double dropout_p,
               double init_std, Rng& rng,
               std::vector<TaskId> experts = {kDownstreamTasks.begin(), kDownstreamTasks.end()});

  const std::vector<TaskId>& experts() const noexcept { return experts_; }
  Tensor& expert_a(TaskId task);
  Tensor& expert_b(TaskId task);
  const Tensor& base() const noexcept { return *base_; }

  /// Router weights must cover exactly the experts.
  Var delta_with(Tape& tape, Var x, const GatingWeights& router, bool training, Rng* rng);

  Var delta(Tape& tape, Var x, const AdapterContext& ctx) override;
  void delta_row(std::span<const double> x, std::span<double> out,
                 const AdapterContext& ctx) const override;

  std::vector<AdapterTensorRef> tensors(const std::string& target);

 private:
  const Tensor* base_;
  double scaling_;
  double dropout_p_;
  std::vector<TaskId> experts_;
  std::map<TaskId, Tensor> a_;
  std::map<TaskId, Tensor> b_;
};

/// h' for a single input x [k] with explicit gating. ContractError when the
/// gating does not cover exactly the enabled tasks or `active` is neither
/// enabled nor Foundation.
Tensor forward_adapted(WriterLoraLayer& layer, const Tensor& x, TaskId active,
                       const GatingWeights& gating);
Tensor moelora_forward(MoeLoraLayer& layer, const Tensor& x, const GatingWeights& router);

/// How trainability is assigned per stage.
enum class TrainAblation {
  None,       // curriculum default
  UnfreezeA,  // A_fdn also trains in downstream stages
  Joint,      // every adapter matrix trains at once
};

struct FreezePolicy {
  bool train_fdn_b_downstream = false;  // B_fdn keeps training after Foundation
  bool train_prior_task_b = false;      // earlier task Bs keep training
};

/// Every adapter attached to one model, plus the stage lineage.
class AdapterSet {
 public:
  /// Wraps each target per spec.mode and freezes the backbone. ConfigError for
  /// unknown targets or an invalid spec; ContractError if a target already has
  /// an adapter.
  static AdapterSet attach(Transformer& model, const AdapterSpec& spec, std::uint64_t seed);

  const AdapterSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& targets() const noexcept { return targets_; }
  /// Enabled task branches (shared by all layers; empty for plain and MoE).
  std::vector<TaskId> enabled() const;
  void enable(TaskId task);
  bool is_enabled(TaskId task) const;

  WriterLoraLayer* writer_layer(const std::string& target);
  MoeLoraLayer* moe_layer(const std::string& target);

  /// All adapter matrices in (target, role, task) order.
  std::vector<AdapterTensorRef> tensors();

  /// Parameters that train in `stage`. StagingError when the stage's own task
  /// branch or any earlier one is not enabled.
  std::vector<AdapterTensorRef> trainable_set(TaskId stage, TrainAblation ablation,
                                              const FreezePolicy& policy = {});
  /// requires_grad on exactly `set`; everything else (backbone included) frozen.
  void apply_trainable(const std::vector<AdapterTensorRef>& set, Transformer& model);

  const std::vector<TaskId>& completed() const noexcept { return completed_; }
  void mark_completed(TaskId stage);

  std::size_t parameter_count();

  /// Adapter checkpoint, separate from the backbone. Keys are target/role/task.
  std::string save(const std::filesystem::path& dir, const nlohmann::json& meta);
  /// Re-attaches adapters stored in `dir` onto `model` (which must carry none).
  static AdapterSet load(const std::filesystem::path& dir, Transformer& model);

 private:
  AdapterSpec spec_;
  std::vector<std::string> targets_;
  std::map<std::string, std::shared_ptr<WriterLoraLayer>> writer_layers_;
  std::map<std::string, std::shared_ptr<MoeLoraLayer>> moe_layers_;
  std::vector<TaskId> completed_;
};

}  // namespace wlab
