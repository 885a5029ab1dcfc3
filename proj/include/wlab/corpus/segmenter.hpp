// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "wlab/corpus/corpus.hpp"
#include "wlab/llm/chat.hpp"

namespace wlab {

struct SegmenterConfig {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
};

struct SegmentationResult {
  std::vector<PlotUnit> units;
  std::vector<std::string> rejected;  // proposed passages that were not found verbatim
};

/// Asks a chat model to split one chapter into plot sections with summaries.
/// Each proposed passage is anchored by exact substring search after the
/// previous unit. UnavailableError when `client` is null; ParseError when no
/// well-formed reply arrives within the attempt limit.
SegmentationResult segment_with_llm(std::size_t chapter_index, const std::string& chapter_text,
                                    ChatClient* client, const SegmenterConfig& config = {});

}  // namespace wlab
