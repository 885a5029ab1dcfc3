// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/task.hpp"
#include "wlab/model/sampling.hpp"
#include "wlab/model/tokenizer.hpp"
#include "wlab/model/transformer.hpp"

namespace wlab {

struct GenerationConfig {
  std::size_t max_new_tokens = 256;  // writing cap; plot summaries use plot_max_tokens
  std::size_t plot_max_tokens = 96;
  double temperature = 0.0;
  std::size_t top_k = 1;
  std::uint64_t seed = 0;
  std::size_t n_plots = 4;
  std::size_t plot_window = 3;

  SamplingConfig sampling() const { return {temperature, top_k}; }
  /// ConfigError on invalid values.
  void validate() const;
};

void to_json(nlohmann::json& j, const GenerationConfig& c);
void from_json(const nlohmann::json& j, GenerationConfig& c);

/// Instrumentation for tests and audits.
struct GenerationHooks {
  std::function<void(TaskId active, const GatingWeights&)> on_gating;
  /// Called with the exact context window before each plot prediction.
  std::function<void(const std::vector<std::string>& window)> on_window;
};

struct Decoded {
  std::string text;
  std::vector<TokenId> ids;
  bool hit_eos = false;
};

/// Decodes after `prompt` under `active` until EOS, SEP, `max_new_tokens`, or
/// the model's position limit. LengthError when the prompt leaves no room.
Decoded decode_continuation(const Transformer& model, std::span<const TokenId> prompt,
                            TaskId active, std::size_t max_new_tokens,
                            const SamplingConfig& sampling, Rng& rng,
                            const Tokenizer& tokenizer, const GenerationHooks& hooks = {});

/// Next summary from the most recent `plot_window` summaries of `context`.
/// ContractError on an empty context.
std::string predict_next_plot(const Transformer& model, const Tokenizer& tokenizer,
                              const std::vector<std::string>& context,
                              const GenerationConfig& config, Rng& rng,
                              const GenerationHooks& hooks = {});

struct StoryPlan {
  std::vector<std::string> seed_context;  // gold summaries the plan started from
  std::vector<std::string> plots;         // n_plots predictions
  std::string provenance;                 // "teacher-seeded" or "free-running"
};

void to_json(nlohmann::json& j, const StoryPlan& p);

/// Rolling-window plot prediction. An empty seed context runs free: the first
/// summary is decoded from an empty input.
StoryPlan plan_story(const Transformer& model, const Tokenizer& tokenizer,
                     const std::vector<std::string>& seed_context, const GenerationConfig& config,
                     const GenerationHooks& hooks = {});

/// Prose for one summary under the writing task.
Decoded write_segment(const Transformer& model, const Tokenizer& tokenizer,
                      const std::string& summary, const GenerationConfig& config, Rng& rng,
                      const GenerationHooks& hooks = {});

struct GeneratedChapter {
  std::vector<std::string> segments;
  std::vector<bool> hit_eos;
  std::string text;  // segments concatenated in plan order
};

GeneratedChapter write_story(const Transformer& model, const Tokenizer& tokenizer,
                             const StoryPlan& plan, const GenerationConfig& config,
                             const GenerationHooks& hooks = {});

/// Writing cap: four times the mean training passage length.
std::size_t writing_token_cap(double mean_segment_length);

}  // namespace wlab
