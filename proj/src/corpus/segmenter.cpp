// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/corpus/segmenter.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "wlab/util/error.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {

namespace {

constexpr std::string_view kSystemPrompt =
    "You split novel chapters into consecutive plot sections. Reply with JSON only: "
    "{\"sections\": [{\"summary\": \"<one-sentence plot summary>\", "
    "\"text\": \"<the section copied verbatim from the chapter>\"}]}";

struct Proposal {
  std::string summary;
  std::string text;
};

std::vector<Proposal> parse_reply(const std::string& reply) {
  // Tolerate code fences around the JSON.
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ParseError("segmenter reply contains no JSON object");
  std::vector<Proposal> out;
  try {
    auto j = nlohmann::json::parse(reply.substr(open, close - open + 1));
    for (const auto& s : j.at("sections"))
      out.push_back({s.at("summary").get<std::string>(), s.at("text").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed segmenter reply: {}", e.what()));
  }
  if (out.empty()) throw ParseError("segmenter reply lists no sections");
  return out;
}

}  // namespace

SegmentationResult segment_with_llm(std::size_t chapter_index, const std::string& chapter_text,
                                    ChatClient* client, const SegmenterConfig& config) {
  if (client == nullptr) {
    throw UnavailableError(
        "no segmenter endpoint configured (set SEGMENTER_API_URL); use sidecar plot files instead");
  }
  std::vector<Proposal> proposals;
  with_retries(
      [&] {
        const std::string reply = client->complete(
            {{"system", std::string(kSystemPrompt)}, {"user", chapter_text}});
        proposals = parse_reply(reply);
        return reply;
      },
      config.max_attempts, config.base_delay);

  SegmentationResult result;
  std::size_t search_from = 0;  // byte offset
  for (const auto& p : proposals) {
    const auto at = p.text.empty() ? std::string::npos : chapter_text.find(p.text, search_from);
    if (at == std::string::npos || p.summary.empty()) {
      result.rejected.push_back(p.text);
      continue;
    }
    const std::size_t start = utf8::length(std::string_view(chapter_text).substr(0, at));
    const std::size_t len = utf8::length(p.text);
    result.units.push_back(
        {chapter_index, result.units.size() + 1, p.summary, start, start + len});
    search_from = at + p.text.size();
  }
  return result;
}

}  // namespace wlab
