// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/lora.hpp"
#include "wlab/eval/report.hpp"
#include "wlab/generate/generation.hpp"
#include "wlab/model/config.hpp"
#include "wlab/train/optim.hpp"

namespace wlab::cli {

struct DataConfig {
  std::size_t train_chapters = 0;  // 0: the leading two thirds
  std::size_t foundation_window = 128;
  std::size_t foundation_stride = 128;
  std::size_t plot_context = 3;
  bool cross_chapter = true;
  bool ramp_up = false;
};

struct EvalConfig {
  EvalMode mode = EvalMode::Writing;
  TokenMode token_mode = TokenMode::Auto;
  bool judge = false;
};

/// Every setting a subcommand can read. Secrets are deliberately absent: API
/// keys and endpoints come from the environment and never reach this struct.
struct RunConfig {
  std::uint64_t model_seed = 1;
  std::uint64_t adapter_seed = 3;
  ModelConfig model;
  AdapterSpec adapter;
  TrainConfig backbone;
  TrainConfig train;
  std::map<TaskId, nlohmann::json> stage_overrides;  // partial TrainConfig per stage
  DataConfig data;
  GenerationConfig generation;
  JudgeConfig judge;
  EvalConfig eval;

  TrainConfig stage_config(TaskId stage) const;
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);

/// The defaults as JSON; doubles as the schema every file and override is
/// checked against.
nlohmann::json default_config_json();

/// defaults ← file ← `path=value` overrides. Unknown keys, type mismatches and
/// invalid values are ConfigErrors. Values parse as JSON, falling back to a
/// plain string.
RunConfig resolve_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

}  // namespace wlab::cli
