// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/generate/generation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wlab/corpus/datasets.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {

void GenerationConfig::validate() const {
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (n_plots < 1) throw ConfigError("n_plots must be at least 1");
  if (plot_window < 1) throw ConfigError("plot_window must be at least 1");
  if (max_new_tokens < 1 || plot_max_tokens < 1) throw ConfigError("token limits must be positive");
}

void to_json(nlohmann::json& j, const GenerationConfig& c) {
  j = {{"max_new_tokens", c.max_new_tokens}, {"plot_max_tokens", c.plot_max_tokens},
       {"temperature", c.temperature},       {"top_k", c.top_k},
       {"seed", c.seed},                     {"n_plots", c.n_plots},
       {"plot_window", c.plot_window}};
}

void from_json(const nlohmann::json& j, GenerationConfig& c) {
  const GenerationConfig d;
  c.max_new_tokens = j.value("max_new_tokens", d.max_new_tokens);
  c.plot_max_tokens = j.value("plot_max_tokens", d.plot_max_tokens);
  c.temperature = j.value("temperature", d.temperature);
  c.top_k = j.value("top_k", d.top_k);
  c.seed = j.value("seed", d.seed);
  c.n_plots = j.value("n_plots", d.n_plots);
  c.plot_window = j.value("plot_window", d.plot_window);
}

Decoded decode_continuation(const Transformer& model, std::span<const TokenId> prompt,
                            TaskId active, std::size_t max_new_tokens,
                            const SamplingConfig& sampling, Rng& rng,
                            const Tokenizer& tokenizer, const GenerationHooks& hooks) {
  const std::size_t limit = model.config().max_seq_len;
  if (prompt.empty()) throw ContractError("decoding needs a non-empty prompt");
  if (prompt.size() >= limit) {
    throw LengthError(fmt::format("prompt of {} tokens leaves no room within max_seq_len {}",
                                  prompt.size(), limit));
  }
  AdapterContext ctx;
  ctx.active = active;
  ctx.on_gating = hooks.on_gating;
  DecodeSession session(model, ctx);
  std::vector<double> logits;
  for (TokenId id : prompt) logits = session.step(id);

  Decoded out;
  while (out.ids.size() < max_new_tokens) {
    const TokenId next = sample_next(logits, sampling, rng);
    if (next == kEos || next == kSep) {
      out.hit_eos = true;
      break;
    }
    out.ids.push_back(next);
    if (session.position() >= limit) break;
    logits = session.step(next);
  }
  out.text = tokenizer.decode(out.ids);
  return out;
}

std::string predict_next_plot(const Transformer& model, const Tokenizer& tokenizer,
                              const std::vector<std::string>& context,
                              const GenerationConfig& config, Rng& rng,
                              const GenerationHooks& hooks) {
  if (context.empty()) throw ContractError("plot prediction needs at least one previous summary");
  const std::size_t n = std::min(config.plot_window, context.size());
  std::vector<std::string> window(context.end() - static_cast<std::ptrdiff_t>(n), context.end());
  if (hooks.on_window) hooks.on_window(window);
  auto prompt = prompt_tokens(TaskId::Plot, kPlotInstruction, join_plot_context(window), tokenizer);
  return decode_continuation(model, prompt, TaskId::Plot, config.plot_max_tokens,
                             config.sampling(), rng, tokenizer, hooks)
      .text;
}

void to_json(nlohmann::json& j, const StoryPlan& p) {
  j = {{"seed_context", p.seed_context}, {"plots", p.plots}, {"provenance", p.provenance}};
}

StoryPlan plan_story(const Transformer& model, const Tokenizer& tokenizer,
                     const std::vector<std::string>& seed_context, const GenerationConfig& config,
                     const GenerationHooks& hooks) {
  config.validate();
  Rng rng(config.seed);
  StoryPlan plan;
  plan.seed_context = seed_context;
  plan.provenance = seed_context.empty() ? "free-running" : "teacher-seeded";
  std::vector<std::string> history = seed_context;
  for (std::size_t t = 0; t < config.n_plots; ++t) {
    std::string next;
    if (history.empty()) {
      if (hooks.on_window) hooks.on_window({});
      auto prompt = prompt_tokens(TaskId::Plot, kPlotInstruction, "", tokenizer);
      next = decode_continuation(model, prompt, TaskId::Plot, config.plot_max_tokens,
                                 config.sampling(), rng, tokenizer, hooks)
                 .text;
    } else {
      next = predict_next_plot(model, tokenizer, history, config, rng, hooks);
    }
    history.push_back(next);
    plan.plots.push_back(std::move(next));
  }
  return plan;
}

Decoded write_segment(const Transformer& model, const Tokenizer& tokenizer,
                      const std::string& summary, const GenerationConfig& config, Rng& rng,
                      const GenerationHooks& hooks) {
  auto prompt = prompt_tokens(TaskId::Writing, kWritingInstruction, summary, tokenizer);
  return decode_continuation(model, prompt, TaskId::Writing, config.max_new_tokens,
                             config.sampling(), rng, tokenizer, hooks);
}

GeneratedChapter write_story(const Transformer& model, const Tokenizer& tokenizer,
                             const StoryPlan& plan, const GenerationConfig& config,
                             const GenerationHooks& hooks) {
  config.validate();
  Rng rng = Rng(config.seed).fork(1);
  GeneratedChapter out;
  for (const auto& summary : plan.plots) {
    Decoded d = write_segment(model, tokenizer, summary, config, rng, hooks);
    out.text += d.text;
    out.segments.push_back(std::move(d.text));
    out.hit_eos.push_back(d.hit_eos);
  }
  return out;
}

std::size_t writing_token_cap(double mean_segment_length) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(4.0 * mean_segment_length)));
}

}  // namespace wlab
