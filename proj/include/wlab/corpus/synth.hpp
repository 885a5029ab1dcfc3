// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/corpus/corpus.hpp"

namespace wlab {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t chapters = 120;
  std::size_t plots_per_chapter = 12;
  std::size_t characters = 20;

  /// "tiny" (12 chapters), "small" (120 chapters, about 200 KB) or "medium" (240).
  static SynthConfig preset(std::string_view size, std::uint64_t seed);
};

/// The planted regularities a synthetic corpus was generated from.
struct SynthTruth {
  std::map<std::string, std::string> traits;     // character name → trait word
  std::map<std::string, std::string> successor;  // event → next event in the chain
  std::map<std::string, std::string> markers;    // event → style-marker word

  /// Event named by a summary ("the <event>. ..."); empty if none.
  static std::string event_of(std::string_view summary);
};

void to_json(nlohmann::json& j, const SynthTruth& t);
void from_json(const nlohmann::json& j, SynthTruth& t);

struct SynthCorpus {
  LoadedCorpus data;
  SynthTruth truth;
};

/// Deterministic for a given config: characters with unique invented trait
/// words, plots following one cyclic event chain, and passages opening with
/// the style marker of their event. Each chapter ends with an unannotated line.
SynthCorpus generate_synthetic(const SynthConfig& config);

/// corpus.txt, plots.jsonl, profiles.jsonl and truth.json.
void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& synth);
SynthTruth read_truth(const std::filesystem::path& file);

/// True when `word` occurs in `text` delimited by non-letters.
bool contains_word(std::string_view text, std::string_view word);

}  // namespace wlab
