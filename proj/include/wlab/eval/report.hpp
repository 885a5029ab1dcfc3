// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/eval/judge.hpp"
#include "wlab/eval/rouge.hpp"

namespace wlab {

/// Writing scores prose with ROUGE and all six aspects; PlotPlanning scores
/// predicted summaries against gold ones on SM, CBM and EM only.
enum class EvalMode { Writing, PlotPlanning };

std::string_view eval_mode_name(EvalMode mode);
EvalMode parse_eval_mode(std::string_view name);

struct EvalItem {
  std::string id;
  std::string text;
};

struct ItemResult {
  std::string id;
  std::optional<RougeScores> rouge;
  std::optional<AspectScores> aspects;
  bool judge_failed = false;
  int judge_attempts = 0;
  std::string judge_error;
};

struct EvalOptions {
  EvalMode mode = EvalMode::Writing;
  TokenMode token_mode = TokenMode::Auto;
  std::optional<JudgeConfig> judge;  // unset: no aspect scoring
};

struct EvalReport {
  EvalMode mode = EvalMode::Writing;
  std::vector<ItemResult> items;
  std::map<std::string, double> means;  // "rouge1.f1", "SM", ...
  std::size_t judged = 0;
  std::size_t judge_failed = 0;
  nlohmann::json provenance;

  std::string table() const;
};

void to_json(nlohmann::json& j, const ItemResult& r);
void to_json(nlohmann::json& j, const EvalReport& r);

/// Pairs candidates with references by id. AlignmentError names every id
/// present on only one side, and any duplicate. `client` may be null only
/// when options.judge is unset.
EvalReport evaluate_run(const std::vector<EvalItem>& candidates,
                        const std::vector<EvalItem>& references, const EvalOptions& options,
                        ChatClient* client, nlohmann::json provenance = {});

}  // namespace wlab
