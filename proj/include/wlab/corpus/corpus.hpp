// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace wlab {

struct Chapter {
  std::size_t index = 0;
  std::string title;
  std::string body;

  bool operator==(const Chapter&) const = default;
};

/// Novel text split into chapters. On disk: UTF-8 with an optional
/// "# <title>" first line and one "## CHAPTER <n> <title>" line per chapter.
struct NovelCorpus {
  std::string title;
  std::vector<Chapter> chapters;

  const Chapter& chapter(std::size_t index) const;
  bool operator==(const NovelCorpus&) const = default;
};

/// One plot section. `start`/`end` are codepoint offsets into the chapter
/// body, end exclusive.
struct PlotUnit {
  std::size_t chapter = 0;
  std::size_t index = 0;
  std::string summary;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const PlotUnit&) const = default;
};

struct CharacterProfile {
  std::string name;
  std::string description;

  bool operator==(const CharacterProfile&) const = default;
};

struct Annotations {
  std::vector<PlotUnit> plots;  // ordered by (chapter, index)
  std::vector<CharacterProfile> profiles;

  bool operator==(const Annotations&) const = default;
};

void to_json(nlohmann::json& j, const PlotUnit& p);
void from_json(const nlohmann::json& j, PlotUnit& p);
void to_json(nlohmann::json& j, const CharacterProfile& p);
void from_json(const nlohmann::json& j, CharacterProfile& p);

NovelCorpus parse_corpus(std::string_view text);
std::string serialize_corpus(const NovelCorpus& corpus);

std::vector<PlotUnit> parse_plots(std::string_view jsonl);
std::string serialize_plots(const std::vector<PlotUnit>& plots);
std::vector<CharacterProfile> parse_profiles(std::string_view jsonl);
std::string serialize_profiles(const std::vector<CharacterProfile>& profiles);

/// Throws IngestionError naming the offending record: chapter gaps, empty
/// bodies, out-of-bounds or overlapping spans, unknown chapters, duplicate or
/// empty names, empty summaries.
void validate(const NovelCorpus& corpus, const Annotations& annotations);

struct LoadedCorpus {
  NovelCorpus corpus;
  Annotations annotations;
};

/// Reads and cross-validates the three files. Plots are sorted by (chapter, index).
LoadedCorpus load_corpus(const std::filesystem::path& corpus_file,
                         const std::filesystem::path& plots_file,
                         const std::filesystem::path& profiles_file);
/// Writes corpus.txt, plots.jsonl, profiles.jsonl into `dir`.
void save_corpus(const std::filesystem::path& dir, const LoadedCorpus& data);

/// Codepoint slice [start, end) of a UTF-8 string.
std::string codepoint_substr(std::string_view text, std::size_t start, std::size_t end);

/// The exact text of a plot's span.
std::string segment_text(const NovelCorpus& corpus, const PlotUnit& plot);

}  // namespace wlab
