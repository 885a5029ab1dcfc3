// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/util/error.hpp"
#include "wlab/util/hash.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string tensor_digest(const Tensor& t) {
  auto v = t.values();
  return sha256_hex(std::span(reinterpret_cast<const unsigned char*>(v.data()), v.size_bytes()));
}

Var forward_loss(Tape& tape, Transformer& model, const TrainExample& ex, const AdapterContext& ctx) {
  const auto& ids = ex.sequence.ids;
  if (ids.size() < 2) throw DataError("training sequence needs at least two tokens");
  std::span<const TokenId> inputs(ids.data(), ids.size() - 1);
  std::span<const TokenId> targets(ids.data() + 1, ids.size() - 1);
  std::span<const std::uint8_t> mask(ex.sequence.loss_mask.data() + 1, ids.size() - 1);
  return masked_cross_entropy(model.forward(tape, inputs, ctx), targets, mask);
}

using ContextFor = std::function<AdapterContext(const TrainExample&)>;

StageReport train_loop(const std::string& stage_name, Transformer& model,
                       const std::vector<NamedTensor>& trainable,
                       const std::vector<TrainExample>& data, const TrainConfig& config,
                       ScheduleWindow window, const TrainerOptions& options,
                       const ContextFor& context_for, Rng& rng) {
  config.validate();
  if (data.empty()) throw DataError(fmt::format("stage '{}' has no training examples", stage_name));
  if (trainable.empty()) throw ContractError(fmt::format("stage '{}' has nothing to train", stage_name));

  std::vector<std::size_t> selected(data.size());
  std::iota(selected.begin(), selected.end(), 0);
  if (config.max_samples_per_stage > 0 && selected.size() > config.max_samples_per_stage) {
    rng.shuffle(selected);
    selected.resize(config.max_samples_per_stage);
  }

  StageReport report;
  report.stage = stage_name;
  report.examples = selected.size();
  const std::size_t per_step = config.examples_per_step();
  const std::size_t steps_per_epoch = (selected.size() + per_step - 1) / per_step;
  std::size_t total = planned_steps(selected.size(), config);
  const std::size_t schedule_total = window.total ? window.total : total;

  AdamW optimizer(config);
  std::vector<std::size_t> order;
  for (std::size_t step = 0; step < total; ++step) {
    const std::size_t in_epoch = step % steps_per_epoch;
    if (in_epoch == 0) {
      order = selected;
      rng.shuffle(order);
    }
    const std::size_t begin = in_epoch * per_step;
    const std::size_t end = std::min(begin + per_step, order.size());
    const double weight = 1.0 / static_cast<double>(end - begin);

    for (const auto& p : trainable) p.tensor->clear_grad();
    double loss_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const TrainExample& ex = data[order[i]];
      AdapterContext ctx = context_for(ex);
      ctx.training = true;
      ctx.rng = &rng;
      Tape tape;
      Var loss = forward_loss(tape, model, ex, ctx);
      loss_sum += loss.value().item();
      tape.backward(scale(loss, weight));
    }
    if (config.max_grad_norm) clip_grad_norm(trainable, *config.max_grad_norm);
    const double lr = lr_at(static_cast<double>(window.offset + step), schedule_total, config);
    optimizer.step(trainable, lr);

    StepRecord rec{stage_name, step, lr, loss_sum * weight};
    if (!std::isfinite(rec.loss))
      throw TrainingError(fmt::format("stage '{}' loss became non-finite at step {}", stage_name, step));
    if (options.out_dir)
      append_file(*options.out_dir / "loss_log.jsonl", nlohmann::json(rec).dump() + "\n");
    if (options.on_step) options.on_step(rec);
    report.log.push_back(std::move(rec));
  }
  for (const auto& p : trainable) p.tensor->clear_grad();
  report.steps = total;
  return report;
}

// Writes to a sibling temp directory and renames, so a failure never leaves
// a half-written checkpoint where a good one used to be.
template <typename SaveFn>
std::string save_atomically(const std::filesystem::path& dir, SaveFn save) {
  auto tmp = dir;
  tmp += ".partial";
  std::filesystem::remove_all(tmp);
  const std::string hash = save(tmp);
  std::filesystem::remove_all(dir);
  std::filesystem::rename(tmp, dir);
  return hash;
}

}  // namespace

std::string_view ablation_name(Ablation ablation) {
  switch (ablation) {
    case Ablation::None:
      return "none";
    case Ablation::NoCurriculum:
      return "no-curriculum";
    case Ablation::SingleLoRA:
      return "single-lora";
    case Ablation::UnfreezeA:
      return "unfreeze-a";
  }
  return "unknown";
}

Ablation parse_ablation(std::string_view name) {
  for (Ablation a : {Ablation::None, Ablation::NoCurriculum, Ablation::SingleLoRA, Ablation::UnfreezeA})
    if (ablation_name(a) == name) return a;
  throw ConfigError(fmt::format("unknown ablation '{}'", name));
}

std::vector<TrainExample> encode_examples(const std::vector<TaskExample>& examples,
                                          const Tokenizer& tokenizer, std::size_t max_seq_len,
                                          std::size_t* truncated) {
  std::vector<TrainExample> out;
  out.reserve(examples.size());
  std::size_t cut = 0;
  for (const auto& e : examples) {
    auto ser = serialize_example(e, tokenizer, max_seq_len);
    cut += ser.truncated;
    out.push_back({e.task, std::move(ser.sequence)});
  }
  if (truncated) *truncated = cut;
  return out;
}

void to_json(nlohmann::json& j, const StepRecord& r) {
  j = {{"stage", r.stage}, {"step", r.step}, {"lr", r.lr}, {"loss", r.loss}};
}

std::size_t planned_steps(std::size_t n_examples, const TrainConfig& config) {
  std::size_t n = n_examples;
  if (config.max_samples_per_stage > 0) n = std::min(n, config.max_samples_per_stage);
  const std::size_t per_step = config.examples_per_step();
  std::size_t total = (n + per_step - 1) / per_step * config.epochs_per_stage;
  if (config.max_steps) total = std::min(total, *config.max_steps);
  return total;
}

void StagePlan::validate(Ablation ablation) const {
  if (stages.empty()) throw ConfigError("stage plan is empty");
  if (ablation == Ablation::NoCurriculum) return;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (!(stages[i - 1].stage < stages[i].stage)) {
      throw StagingError(fmt::format("stage '{}' cannot follow '{}'", task_name(stages[i].stage),
                                     task_name(stages[i - 1].stage)));
    }
  }
}

CurriculumTrainer::CurriculumTrainer(Transformer& model, AdapterSet& adapters, TrainerOptions options)
    : model_(model), adapters_(adapters), options_(std::move(options)) {
  const bool plain = adapters_.spec().mode == AdapterMode::PlainLoRA;
  if ((options_.ablation == Ablation::SingleLoRA) != plain) {
    throw ConfigError("the single-lora ablation requires plain adapters, and only it uses them");
  }
  if (options_.out_dir) std::filesystem::create_directories(*options_.out_dir);
}

StageReport CurriculumTrainer::run_stage(TaskId stage, const std::vector<TrainExample>& data,
                                         const TrainConfig& config, ScheduleWindow window) {
  if (stage != TaskId::Foundation) {
    const auto previous = static_cast<TaskId>(static_cast<int>(stage) - 1);
    const auto& done = adapters_.completed();
    if (std::find(done.begin(), done.end(), previous) == done.end()) {
      throw StagingError(fmt::format("stage '{}' requires stage '{}' to complete first",
                                     task_name(stage), task_name(previous)));
    }
    if (adapters_.spec().mode == AdapterMode::WriterLoRA && !adapters_.is_enabled(stage))
      adapters_.enable(stage);
  }
  if (data.empty()) throw DataError(fmt::format("stage '{}' has no training examples", task_name(stage)));

  const TrainAblation mode =
      options_.ablation == Ablation::UnfreezeA ? TrainAblation::UnfreezeA : TrainAblation::None;
  auto refs = adapters_.trainable_set(stage, mode, options_.freeze);
  adapters_.apply_trainable(refs, model_);
  std::vector<NamedTensor> trainable;
  for (const auto& r : refs) trainable.push_back({r.key(), r.tensor});

  std::map<std::string, std::pair<const Tensor*, std::string>> frozen;
  for (const auto& [name, t] : model_.parameters()) frozen[name] = {&t, tensor_digest(t)};
  for (const auto& r : adapters_.tensors())
    if (!r.tensor->requires_grad()) frozen[r.key()] = {r.tensor, tensor_digest(*r.tensor)};

  Rng rng = Rng(config.seed).fork(fnv1a(task_name(stage)));
  const std::string name(task_name(stage));
  StageReport report = train_loop(
      name, model_, trainable, data, config, window, options_,
      [stage](const TrainExample&) {
        AdapterContext ctx;
        ctx.active = stage;
        return ctx;
      },
      rng);

  for (const auto& [key, entry] : frozen) {
    if (tensor_digest(*entry.first) != entry.second)
      throw TrainingError(fmt::format("frozen tensor '{}' changed during stage '{}'", key, name));
  }
  report.frozen_verified = frozen.size();
  adapters_.mark_completed(stage);

  if (options_.out_dir) {
    report.checkpoint = *options_.out_dir / ("stage-" + name);
    nlohmann::json meta = options_.checkpoint_meta;
    meta["stage"] = name;
    meta["ablation"] = std::string(ablation_name(options_.ablation));
    meta["steps"] = report.steps;
    meta["train_config"] = config;
    report.checkpoint_hash =
        save_atomically(report.checkpoint, [&](const auto& dir) { return adapters_.save(dir, meta); });
  }
  spdlog::info("stage {}: {} steps on {} examples, final loss {:.4f}", name, report.steps,
               report.examples, report.log.empty() ? 0.0 : report.log.back().loss);
  return report;
}

StageReport CurriculumTrainer::run_joint(const std::vector<TrainExample>& data,
                                         const TrainConfig& config) {
  if (adapters_.spec().mode == AdapterMode::WriterLoRA)
    for (TaskId t : kDownstreamTasks)
      if (!adapters_.is_enabled(t)) adapters_.enable(t);
  auto refs = adapters_.trainable_set(TaskId::Writing, TrainAblation::Joint);
  adapters_.apply_trainable(refs, model_);
  std::vector<NamedTensor> trainable;
  for (const auto& r : refs) trainable.push_back({r.key(), r.tensor});

  std::map<std::string, std::pair<const Tensor*, std::string>> frozen;
  for (const auto& [name, t] : model_.parameters()) frozen[name] = {&t, tensor_digest(t)};

  Rng rng = Rng(config.seed).fork(fnv1a("joint"));
  StageReport report = train_loop(
      "joint", model_, trainable, data, config, {}, options_,
      [](const TrainExample& ex) {
        AdapterContext ctx;
        ctx.active = ex.task;
        return ctx;
      },
      rng);
  for (const auto& [key, entry] : frozen) {
    if (tensor_digest(*entry.first) != entry.second)
      throw TrainingError(fmt::format("frozen tensor '{}' changed during the joint stage", key));
  }
  report.frozen_verified = frozen.size();
  for (TaskId t : kCurriculum) adapters_.mark_completed(t);

  if (options_.out_dir) {
    report.checkpoint = *options_.out_dir / "stage-joint";
    nlohmann::json meta = options_.checkpoint_meta;
    meta["stage"] = "joint";
    meta["ablation"] = std::string(ablation_name(options_.ablation));
    meta["steps"] = report.steps;
    meta["train_config"] = config;
    report.checkpoint_hash =
        save_atomically(report.checkpoint, [&](const auto& dir) { return adapters_.save(dir, meta); });
  }
  return report;
}

CurriculumReport CurriculumTrainer::run_curriculum(const StagePlan& plan) {
  plan.validate(options_.ablation);
  CurriculumReport report;
  if (options_.ablation == Ablation::NoCurriculum) {
    std::vector<TrainExample> mixed;
    for (const auto& entry : plan.stages) mixed.insert(mixed.end(), entry.data.begin(), entry.data.end());
    report.stages.push_back(run_joint(mixed, plan.config));
    return report;
  }
  std::vector<std::size_t> steps;
  std::size_t total = 0;
  for (const auto& entry : plan.stages) {
    steps.push_back(planned_steps(entry.data.size(), entry.config.value_or(plan.config)));
    total += steps.back();
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& entry = plan.stages[i];
    const TrainConfig config = entry.config.value_or(plan.config);
    ScheduleWindow window;
    if (plan.config.shared_schedule) window = {offset, total};
    report.stages.push_back(run_stage(entry.stage, entry.data, config, window));
    offset += steps[i];
  }
  return report;
}

StageReport train_backbone(Transformer& model, const std::vector<TrainExample>& data,
                           const TrainConfig& config, const TrainerOptions& options) {
  if (model.has_adapters()) throw ContractError("backbone training expects a model without adapters");
  model.set_backbone_trainable(true);
  std::vector<NamedTensor> trainable;
  for (auto& [name, t] : model.parameters()) trainable.push_back({name, &t});
  Rng rng = Rng(config.seed).fork(fnv1a("base"));
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
  StageReport report = train_loop(
      "base", model, trainable, data, config, {}, options,
      [](const TrainExample&) { return AdapterContext{}; }, rng);
  model.set_backbone_trainable(false);
  return report;
}

double example_loss(Transformer& model, const TrainExample& example) {
  AdapterContext ctx;
  ctx.active = example.task;
  Tape tape;
  return forward_loss(tape, model, example, ctx).value().item();
}

double heldout_loss(Transformer& model, const std::vector<TrainExample>& data) {
  if (data.empty()) throw DataError("held-out set is empty");
  double total = 0.0;
  for (const auto& ex : data) total += example_loss(model, ex);
  return total / static_cast<double>(data.size());
}

}  // namespace wlab
