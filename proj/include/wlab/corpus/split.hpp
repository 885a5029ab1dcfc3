// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "wlab/corpus/corpus.hpp"

namespace wlab {

/// Inclusive chapter range; first > last means empty.
struct ChapterRange {
  std::size_t first = 1;
  std::size_t last = 0;

  bool empty() const noexcept { return first > last; }
  bool contains(std::size_t c) const noexcept { return c >= first && c <= last; }
  std::size_t size() const noexcept { return empty() ? 0 : last - first + 1; }
};

struct SplitSpec {
  ChapterRange train;
  ChapterRange test;

  /// Train on the first `n_train` chapters, test on the rest.
  static SplitSpec leading(std::size_t n_train, std::size_t n_chapters);
};

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

struct CorpusPart {
  NovelCorpus corpus;
  Annotations annotations;  // plots of these chapters; every profile
};

struct CorpusSplit {
  CorpusPart train;
  CorpusPart test;
};

/// Partitions by chapter index, keeping original indices. ConfigError unless
/// the ranges are disjoint and together cover the corpus exactly. An empty
/// test range logs a warning.
CorpusSplit split(const NovelCorpus& corpus, const Annotations& annotations, const SplitSpec& spec);

}  // namespace wlab
