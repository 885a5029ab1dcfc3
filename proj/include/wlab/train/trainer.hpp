// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/lora.hpp"
#include "wlab/corpus/datasets.hpp"
#include "wlab/model/transformer.hpp"
#include "wlab/train/optim.hpp"

namespace wlab {

enum class Ablation { None, NoCurriculum, SingleLoRA, UnfreezeA };

std::string_view ablation_name(Ablation ablation);
Ablation parse_ablation(std::string_view name);

/// A training sequence together with the task whose gating it runs under.
struct TrainExample {
  TaskId task = TaskId::Foundation;
  TokenSequence sequence;
};

/// Serializes task examples. `truncated` receives the number cut to fit.
std::vector<TrainExample> encode_examples(const std::vector<TaskExample>& examples,
                                          const Tokenizer& tokenizer, std::size_t max_seq_len,
                                          std::size_t* truncated = nullptr);

struct StepRecord {
  std::string stage;
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

void to_json(nlohmann::json& j, const StepRecord& r);

struct StageReport {
  std::string stage;
  std::size_t examples = 0;
  std::size_t steps = 0;
  std::vector<StepRecord> log;
  std::filesystem::path checkpoint;  // empty when checkpoints are disabled
  std::string checkpoint_hash;
  std::size_t frozen_verified = 0;  // tensors confirmed byte-identical
};

struct CurriculumReport {
  std::vector<StageReport> stages;
};

struct TrainerOptions {
  /// Receives stage-<name>/ checkpoints and loss_log.jsonl when set.
  std::optional<std::filesystem::path> out_dir;
  Ablation ablation = Ablation::None;
  FreezePolicy freeze;
  std::function<void(const StepRecord&)> on_step;
  /// Merged into every checkpoint manifest (e.g. the backbone hash).
  nlohmann::json checkpoint_meta = nlohmann::json::object();
};

/// Global step offset and length when one schedule spans several stages.
struct ScheduleWindow {
  std::size_t offset = 0;
  std::size_t total = 0;  // 0: the stage's own step count
};

struct StagePlanEntry {
  TaskId stage = TaskId::Foundation;
  std::vector<TrainExample> data;
  std::optional<TrainConfig> config;  // overrides the plan config
};

struct StagePlan {
  std::vector<StagePlanEntry> stages;
  TrainConfig config;

  /// StagingError when stages are out of curriculum order.
  void validate(Ablation ablation) const;
};

/// Optimizer steps a stage will run for `n_examples` examples.
std::size_t planned_steps(std::size_t n_examples, const TrainConfig& config);

/// Trains adapter stages on a frozen backbone.
class CurriculumTrainer {
 public:
  CurriculumTrainer(Transformer& model, AdapterSet& adapters, TrainerOptions options = {});

  /// Enables the stage's task branch if new, trains its trainable set and
  /// checks every other tensor is byte-identical afterwards. StagingError when
  /// the previous curriculum stage has not completed; DataError on empty data.
  StageReport run_stage(TaskId stage, const std::vector<TrainExample>& data,
                        const TrainConfig& config, ScheduleWindow window = {});
  /// One mixed-task stage with every adapter matrix trainable. Each example
  /// runs under its own task's gating.
  StageReport run_joint(const std::vector<TrainExample>& data, const TrainConfig& config);
  /// Runs the plan in order; NoCurriculum merges every stage's data into one
  /// joint stage.
  CurriculumReport run_curriculum(const StagePlan& plan);

 private:
  Transformer& model_;
  AdapterSet& adapters_;
  TrainerOptions options_;
};

/// Full-parameter training of a backbone that carries no adapters.
StageReport train_backbone(Transformer& model, const std::vector<TrainExample>& data,
                           const TrainConfig& config, const TrainerOptions& options = {});

/// Masked mean cross-entropy of one example in eval mode.
double example_loss(Transformer& model, const TrainExample& example);
/// Mean of example_loss over `data`.
double heldout_loss(Transformer& model, const std::vector<TrainExample>& data);

}  // namespace wlab
