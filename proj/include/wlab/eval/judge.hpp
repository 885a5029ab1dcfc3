// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wlab/llm/chat.hpp"

namespace wlab {

enum class Aspect { LS, EX, SLC, SM, CBM, EM };

inline constexpr std::array<Aspect, 6> kAllAspects = {Aspect::LS, Aspect::EX,  Aspect::SLC,
                                                      Aspect::SM, Aspect::CBM, Aspect::EM};
inline constexpr std::array<Aspect, 3> kPlotAspects = {Aspect::SM, Aspect::CBM, Aspect::EM};

std::string_view aspect_name(Aspect aspect);

/// One 1–5 rating per aspect.
struct AspectScores {
  std::array<int, 6> values{};

  int operator[](Aspect a) const { return values[static_cast<std::size_t>(a)]; }
  int& operator[](Aspect a) { return values[static_cast<std::size_t>(a)]; }
  bool operator==(const AspectScores&) const = default;
};

enum class JudgeLanguage { English, Chinese };

std::string_view judge_language_name(JudgeLanguage language);
JudgeLanguage parse_judge_language(std::string_view name);

struct JudgeConfig {
  std::string endpoint;  // informational; the client carries the connection
  std::string model = "gpt-4o";
  JudgeLanguage language = JudgeLanguage::English;
  int retry_limit = 3;
  std::size_t concurrency = 2;
  std::chrono::milliseconds base_delay{500};
  std::filesystem::path template_dir;  // empty: the installed resources

  /// ConfigError unless retry_limit >= 1 and concurrency >= 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const JudgeConfig& c);
void from_json(const nlohmann::json& j, JudgeConfig& c);

/// The rubric with its two worked examples, byte for byte as stored.
std::string judge_template(JudgeLanguage language, const std::filesystem::path& dir = {});

/// The template followed by the pair to score, labelled like the examples.
std::string build_judge_prompt(const std::string& rubric, JudgeLanguage language,
                               std::string_view candidate, std::string_view reference);

/// Reads the first JSON object in `response`. Accepts the English keys in
/// both spellings the template uses and the Chinese keys. ParseError when an
/// aspect is missing, repeated or outside 1–5.
AspectScores parse_aspect_scores(std::string_view response);

struct JudgeOutcome {
  std::optional<AspectScores> scores;  // empty: judge-failed
  int attempts = 0;
  std::string error;
};

/// One chat request per attempt; transient and parse failures retry with
/// exponential backoff up to retry_limit, after which the item is judge-failed.
JudgeOutcome judge_aspects(std::string_view candidate, std::string_view reference,
                           const JudgeConfig& config, ChatClient& client);

void to_json(nlohmann::json& j, const AspectScores& s);

}  // namespace wlab
