// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/corpus/datasets.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {

void to_json(nlohmann::json& j, const TaskExample& e) {
  j = {{"task_id", std::string(task_name(e.task))},
       {"instruction", e.instruction},
       {"input", e.input},
       {"output", e.output},
       {"chapters", e.chapters}};
}

void from_json(const nlohmann::json& j, TaskExample& e) {
  e.task = parse_task(j.at("task_id").get<std::string>());
  e.instruction = j.value("instruction", std::string());
  e.input = j.value("input", std::string());
  j.at("output").get_to(e.output);
  e.chapters = j.value("chapters", std::vector<std::size_t>{});
}

std::string serialize_dataset(const std::vector<TaskExample>& examples) {
  std::string out;
  for (const auto& e : examples) out += nlohmann::json(e).dump() + "\n";
  return out;
}

std::vector<TaskExample> parse_dataset(std::string_view jsonl) {
  std::vector<TaskExample> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    auto line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<TaskExample>());
    } catch (const nlohmann::json::exception& e) {
      throw IngestionError(fmt::format("dataset line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<TaskExample>& examples) {
  write_file(path, serialize_dataset(examples));
}

std::vector<TaskExample> read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

std::vector<TaskExample> build_foundation_dataset(const NovelCorpus& corpus, std::size_t window,
                                                  std::size_t stride) {
  if (window == 0 || stride == 0) throw ConfigError("window and stride must be positive");
  std::u32string text;
  std::vector<std::pair<std::size_t, std::size_t>> starts;  // (codepoint offset, chapter)
  for (const auto& c : corpus.chapters) {
    if (!text.empty()) text.push_back(U'\n');
    starts.emplace_back(text.size(), c.index);
    text += utf8::decode(c.body);
  }
  if (text.empty()) return {};
  auto chapters_in = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const std::size_t s = starts[i].first;
      const std::size_t e = i + 1 < starts.size() ? starts[i + 1].first : text.size();
      if (s < end && begin < e) out.push_back(starts[i].second);
    }
    return out;
  };
  std::vector<TaskExample> out;
  auto emit = [&](std::size_t begin, std::size_t len) {
    TaskExample ex;
    ex.task = TaskId::Foundation;
    ex.output = utf8::encode(std::u32string_view(text).substr(begin, len));
    ex.chapters = chapters_in(begin, begin + len);
    out.push_back(std::move(ex));
  };
  if (text.size() <= window) {
    emit(0, text.size());
    return out;
  }
  for (std::size_t begin = 0; begin + window <= text.size(); begin += stride) emit(begin, window);
  return out;
}

std::vector<TaskExample> build_world_dataset(const std::vector<CharacterProfile>& profiles) {
  if (profiles.empty()) throw DataError("world dataset needs at least one profile");
  std::vector<CharacterProfile> sorted = profiles;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::vector<TaskExample> out;
  for (const auto& p : sorted)
    out.push_back({TaskId::World, std::string(kWorldInstruction), p.name, p.description, {}});
  return out;
}

std::string join_plot_context(const std::vector<std::string>& summaries) {
  std::string out;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (i) out.push_back(kSepChar);
    out += summaries[i];
  }
  return out;
}

std::vector<TaskExample> build_plot_dataset(const std::vector<PlotUnit>& plots,
                                            const PlotWindowOptions& options) {
  if (options.context < 1) throw ConfigError("plot context must be at least 1");
  std::vector<TaskExample> out;
  for (std::size_t t = 0; t < plots.size(); ++t) {
    std::size_t begin = t >= options.context ? t - options.context : 0;
    if (!options.cross_chapter) {
      while (begin < t && plots[begin].chapter != plots[t].chapter) ++begin;
    }
    const std::size_t have = t - begin;
    if (have == 0 || (have < options.context && !options.ramp_up)) continue;
    std::vector<std::string> context;
    std::set<std::size_t> chapters;
    for (std::size_t i = begin; i < t; ++i) {
      context.push_back(plots[i].summary);
      chapters.insert(plots[i].chapter);
    }
    chapters.insert(plots[t].chapter);
    out.push_back({TaskId::Plot, std::string(kPlotInstruction), join_plot_context(context),
                   plots[t].summary, {chapters.begin(), chapters.end()}});
  }
  if (out.empty()) {
    spdlog::warn("plot dataset is empty: {} plots with a context of {}", plots.size(),
                 options.context);
  }
  return out;
}

std::vector<TaskExample> build_writing_dataset(const std::vector<PlotUnit>& plots,
                                               const NovelCorpus& corpus) {
  std::vector<TaskExample> out;
  for (const auto& p : plots) {
    out.push_back({TaskId::Writing, std::string(kWritingInstruction), p.summary,
                   segment_text(corpus, p), {p.chapter}});
  }
  return out;
}

std::string_view default_instruction(TaskId task) {
  switch (task) {
    case TaskId::World:
      return kWorldInstruction;
    case TaskId::Plot:
      return kPlotInstruction;
    case TaskId::Writing:
      return kWritingInstruction;
    case TaskId::Foundation:
      break;
  }
  return {};
}

std::string template_text() {
  return fmt::format("{}\n{}\n{}\n", kWorldInstruction, kPlotInstruction, kWritingInstruction);
}

std::vector<TokenId> prompt_tokens(TaskId task, std::string_view instruction,
                                   std::string_view input, const Tokenizer& tokenizer) {
  if (task == TaskId::Foundation) throw ContractError("foundation examples have no prompt");
  std::vector<TokenId> ids = {kBos, Tokenizer::task_tag(task)};
  auto append = [&](std::string_view s) {
    auto t = tokenizer.encode(s);
    ids.insert(ids.end(), t.begin(), t.end());
  };
  append(instruction);
  ids.push_back(kSep);
  append(input);
  ids.push_back(kSep);
  return ids;
}

SerializedExample serialize_example(const TaskExample& example, const Tokenizer& tokenizer,
                                    std::size_t max_seq_len, std::size_t pad_to) {
  const std::size_t limit = max_seq_len + 1;
  SerializedExample out;
  auto& seq = out.sequence;
  if (example.task == TaskId::Foundation) {
    seq.ids.push_back(kBos);
    auto body = tokenizer.encode(example.output);
    seq.ids.insert(seq.ids.end(), body.begin(), body.end());
    seq.loss_mask.assign(seq.ids.size(), 1);
    seq.loss_mask[0] = 0;
    if (seq.ids.size() > limit) {
      seq.ids.resize(limit);
      seq.loss_mask.resize(limit);
      out.truncated = true;
    }
    while (seq.ids.size() < std::min(pad_to, limit)) {
      seq.ids.push_back(kPad);
      seq.loss_mask.push_back(0);
    }
    return out;
  }

  auto instruction = tokenizer.encode(example.instruction);
  auto input = tokenizer.encode(example.input);
  auto output = tokenizer.encode(example.output);
  output.push_back(kEos);
  const std::size_t fixed = 4 + instruction.size();  // BOS, tag, SEP, SEP
  if (fixed + 1 >= limit) throw LengthError("instruction leaves no room within max_seq_len");
  if (fixed + input.size() + 1 > limit) {
    input.erase(input.begin(), input.end() - static_cast<std::ptrdiff_t>(limit - fixed - 1));
    out.truncated = true;
  }
  seq.ids = prompt_tokens(example.task, example.instruction, {}, tokenizer);
  seq.ids.pop_back();  // re-add after input
  seq.ids.insert(seq.ids.end(), input.begin(), input.end());
  seq.ids.push_back(kSep);
  seq.loss_mask.assign(seq.ids.size(), 0);
  const std::size_t room = limit - seq.ids.size();
  if (output.size() > room) {
    output.resize(room);
    out.truncated = true;
  }
  seq.ids.insert(seq.ids.end(), output.begin(), output.end());
  seq.loss_mask.resize(seq.ids.size(), 1);
  return out;
}

TaskExample parse_serialized(const TokenSequence& sequence, const Tokenizer& tokenizer) {
  const auto& ids = sequence.ids;
  if (ids.empty() || ids[0] != kBos) throw ParseError("serialized example must start with BOS");
  TaskExample ex;
  if (ids.size() < 2 || ids[1] < kTaskWorld || ids[1] > kTaskWrite) {
    ex.task = TaskId::Foundation;
    std::vector<TokenId> body(ids.begin() + 1, ids.end());
    while (!body.empty() && body.back() == kPad) body.pop_back();
    ex.output = tokenizer.decode(body);
    return ex;
  }
  ex.task = ids[1] == kTaskWorld ? TaskId::World : ids[1] == kTaskPlot ? TaskId::Plot : TaskId::Writing;
  auto first_sep = std::find(ids.begin() + 2, ids.end(), kSep);
  // output is after the SEP that precedes the first masked position
  auto first_out = std::find(sequence.loss_mask.begin(), sequence.loss_mask.end(), 1);
  if (first_sep == ids.end() || first_out == sequence.loss_mask.end())
    throw ParseError("serialized task example is missing its separators or output");
  auto out_begin = ids.begin() + (first_out - sequence.loss_mask.begin());
  if (out_begin - 1 <= first_sep || *(out_begin - 1) != kSep)
    throw ParseError("serialized task example is missing the input separator");
  auto out_end = std::find(out_begin, ids.end(), kEos);
  ex.instruction = tokenizer.decode({ids.begin() + 2, first_sep});
  ex.input = tokenizer.decode({first_sep + 1, out_begin - 1});
  ex.output = tokenizer.decode({out_begin, out_end});
  return ex;
}

}  // namespace wlab
