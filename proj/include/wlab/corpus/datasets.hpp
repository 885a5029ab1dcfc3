// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/task.hpp"
#include "wlab/corpus/corpus.hpp"
#include "wlab/model/tokenizer.hpp"

namespace wlab {

inline constexpr std::string_view kWorldInstruction = "Describe the character.";
inline constexpr std::string_view kPlotInstruction = "Continue the plot.";
inline constexpr std::string_view kWritingInstruction = "Write the passage.";

/// Alpaca-style record with a task id. `chapters` lists the source chapters
/// (empty for profile-derived examples).
struct TaskExample {
  TaskId task = TaskId::Foundation;
  std::string instruction;
  std::string input;
  std::string output;
  std::vector<std::size_t> chapters;

  bool operator==(const TaskExample&) const = default;
};

void to_json(nlohmann::json& j, const TaskExample& e);
void from_json(const nlohmann::json& j, TaskExample& e);

std::string serialize_dataset(const std::vector<TaskExample>& examples);
std::vector<TaskExample> parse_dataset(std::string_view jsonl);
void write_dataset(const std::filesystem::path& path, const std::vector<TaskExample>& examples);
std::vector<TaskExample> read_dataset(const std::filesystem::path& path);

/// Sliding windows of `window` codepoints (step `stride`) over the chapter
/// bodies joined by newlines. Text shorter than the window gives one example.
std::vector<TaskExample> build_foundation_dataset(const NovelCorpus& corpus, std::size_t window,
                                                  std::size_t stride);
/// One example per profile, ordered by name.
std::vector<TaskExample> build_world_dataset(const std::vector<CharacterProfile>& profiles);

struct PlotWindowOptions {
  std::size_t context = 3;     // preceding summaries per example
  bool cross_chapter = true;   // windows may span chapter boundaries
  bool ramp_up = false;        // also emit examples with shorter leading windows
};
/// Input = preceding summaries joined by the SEP character, output = next
/// summary. Plots must be in corpus order.
std::vector<TaskExample> build_plot_dataset(const std::vector<PlotUnit>& plots,
                                            const PlotWindowOptions& options = {});
/// Input = summary, output = the exact span text.
std::vector<TaskExample> build_writing_dataset(const std::vector<PlotUnit>& plots,
                                               const NovelCorpus& corpus);

/// Joins summaries with the in-text SEP character.
std::string join_plot_context(const std::vector<std::string>& summaries);

struct SerializedExample {
  TokenSequence sequence;
  bool truncated = false;
};

/// Task examples: BOS, tag, instruction, SEP, input, SEP, output, EOS with the
/// mask set from the first output token through EOS. Foundation examples: BOS
/// then the text, all masked in, optionally PAD-extended to `pad_to` tokens.
/// Sequences longer than max_seq_len + 1 drop output tail (EOS first); an
/// input that leaves no room for output is cut from the front.
SerializedExample serialize_example(const TaskExample& example, const Tokenizer& tokenizer,
                                    std::size_t max_seq_len, std::size_t pad_to = 0);
/// Inverse of serialize_example for untruncated sequences.
TaskExample parse_serialized(const TokenSequence& sequence, const Tokenizer& tokenizer);

/// BOS, tag, instruction, SEP, input, SEP: the generation prompt.
std::vector<TokenId> prompt_tokens(TaskId task, std::string_view instruction,
                                   std::string_view input, const Tokenizer& tokenizer);

std::string_view default_instruction(TaskId task);

/// Text that a vocabulary must cover besides the corpus: the instruction strings.
std::string template_text();

}  // namespace wlab
