// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/eval/judge.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"

namespace wlab {
namespace {

struct KeySpelling {
  std::string_view key;
  Aspect aspect;
  bool variant;
};

// The output contract of each template is the canonical spelling; the worked
// examples in the English template use the longer forms.
constexpr KeySpelling kKeys[] = {
    {"Language Style Analysis", Aspect::LS, false},
    {"Expression Analysis", Aspect::EX, false},
    {"Expression Techniques Analysis", Aspect::EX, true},
    {"Sentence Length and Complexity Analysis", Aspect::SLC, false},
    {"Main Storyline Analysis", Aspect::SM, false},
    {"Character Behavior and Motivation Analysis", Aspect::CBM, false},
    {"Emotion and Conflict Analysis", Aspect::EM, false},
    {"Emotions and Conflict Analysis", Aspect::EM, true},
    {"语言风格分析", Aspect::LS, false},
    {"表达方式分析", Aspect::EX, false},
    {"句子长度与复杂度分析", Aspect::SLC, false},
    {"故事主线分析", Aspect::SM, false},
    {"人物行为与动机分析", Aspect::CBM, false},
    {"情感与冲突分析", Aspect::EM, false},
};

int score_value(const nlohmann::json& v, std::string_view key) {
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    try {
      std::size_t used = 0;
      const std::string s = v.get<std::string>();
      x = std::stod(s, &used);
      if (used != s.size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError(fmt::format("score for '{}' is not a number", key));
    }
  } else {
    throw ParseError(fmt::format("score for '{}' is not a number", key));
  }
  if (x != std::floor(x) || x < 1.0 || x > 5.0)
    throw ParseError(fmt::format("score for '{}' must be an integer in 1..5, got {}", key, x));
  return static_cast<int>(x);
}

}  // namespace

std::string_view aspect_name(Aspect aspect) {
  switch (aspect) {
    case Aspect::LS:
      return "LS";
    case Aspect::EX:
      return "EX";
    case Aspect::SLC:
      return "SLC";
    case Aspect::SM:
      return "SM";
    case Aspect::CBM:
      return "CBM";
    case Aspect::EM:
      return "EM";
  }
  return "?";
}

std::string_view judge_language_name(JudgeLanguage language) {
  return language == JudgeLanguage::Chinese ? "chinese" : "english";
}

JudgeLanguage parse_judge_language(std::string_view name) {
  if (name == "english" || name == "en") return JudgeLanguage::English;
  if (name == "chinese" || name == "zh") return JudgeLanguage::Chinese;
  throw ConfigError(fmt::format("unknown judge language '{}'", name));
}

void JudgeConfig::validate() const {
  if (retry_limit < 1) throw ConfigError("judge retry_limit must be at least 1");
  if (concurrency < 1) throw ConfigError("judge concurrency must be at least 1");
  if (base_delay.count() < 0) throw ConfigError("judge base_delay must be non-negative");
}

void to_json(nlohmann::json& j, const JudgeConfig& c) {
  j = {{"endpoint", c.endpoint},
       {"model", c.model},
       {"language", judge_language_name(c.language)},
       {"retry_limit", c.retry_limit},
       {"concurrency", c.concurrency},
       {"base_delay_ms", c.base_delay.count()},
       {"template_dir", c.template_dir.string()}};
}

void from_json(const nlohmann::json& j, JudgeConfig& c) {
  c = JudgeConfig{};
  if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("model")) c.model = j.at("model").get<std::string>();
  if (j.contains("language")) c.language = parse_judge_language(j.at("language").get<std::string>());
  if (j.contains("retry_limit")) c.retry_limit = j.at("retry_limit").get<int>();
  if (j.contains("concurrency")) c.concurrency = j.at("concurrency").get<std::size_t>();
  if (j.contains("base_delay_ms")) c.base_delay = std::chrono::milliseconds(j.at("base_delay_ms").get<long>());
  if (j.contains("template_dir")) c.template_dir = j.at("template_dir").get<std::string>();
}

std::string judge_template(JudgeLanguage language, const std::filesystem::path& dir) {
  const std::filesystem::path base = dir.empty() ? std::filesystem::path(WLAB_RESOURCE_DIR) / "judge" : dir;
  return read_file(base / (language == JudgeLanguage::Chinese ? "chinese.txt" : "english.txt"));
}

std::string build_judge_prompt(const std::string& rubric, JudgeLanguage language,
                               std::string_view candidate, std::string_view reference) {
  if (language == JudgeLanguage::Chinese)
    return fmt::format("{}\n\n原文本: {}\n输出文本: {}", rubric, reference, candidate);
  return fmt::format("{}\n\noriginal text: {}\n\noutput text: {}", rubric, reference, candidate);
}

AspectScores parse_aspect_scores(std::string_view response) {
  const auto open = response.find('{');
  const auto close = response.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ParseError("judge response holds no JSON object");
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(response.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("judge response is not valid JSON: {}", e.what()));
  }
  if (!obj.is_object()) throw ParseError("judge response is not a JSON object");

  AspectScores scores;
  std::array<bool, 6> seen{};
  for (const KeySpelling& k : kKeys) {
    auto it = obj.find(std::string(k.key));
    if (it == obj.end()) continue;
    const auto slot = static_cast<std::size_t>(k.aspect);
    if (seen[slot]) throw ParseError(fmt::format("aspect {} given twice", aspect_name(k.aspect)));
    if (k.variant) spdlog::info("judge used variant key '{}' for {}", k.key, aspect_name(k.aspect));
    seen[slot] = true;
    scores.values[slot] = score_value(*it, k.key);
  }
  for (Aspect a : kAllAspects)
    if (!seen[static_cast<std::size_t>(a)])
      throw ParseError(fmt::format("judge response is missing aspect {}", aspect_name(a)));
  return scores;
}

JudgeOutcome judge_aspects(std::string_view candidate, std::string_view reference,
                           const JudgeConfig& config, ChatClient& client) {
  config.validate();
  const std::string prompt = build_judge_prompt(judge_template(config.language, config.template_dir),
                                                config.language, candidate, reference);
  JudgeOutcome out;
  try {
    with_retries(
        [&] {
          ++out.attempts;
          std::string r = client.complete({{"user", prompt}});
          out.scores = parse_aspect_scores(r);
          return r;
        },
        config.retry_limit, config.base_delay);
  } catch (const UnavailableError&) {
    throw;
  } catch (const Error& e) {
    out.error = fmt::format("{}: {}", e.kind(), e.what());
    spdlog::warn("judge failed after {} attempt(s): {}", out.attempts, out.error);
  }
  return out;
}

void to_json(nlohmann::json& j, const AspectScores& s) {
  j = nlohmann::json::object();
  for (Aspect a : kAllAspects) j[std::string(aspect_name(a))] = s[a];
}

}  // namespace wlab
