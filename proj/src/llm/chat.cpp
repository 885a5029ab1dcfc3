// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/llm/chat.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wlab/util/error.hpp"

namespace wlab {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError(fmt::format("invalid URL '{}'", url));
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw UnavailableError("chat endpoint URL is not configured");
  split_url(config_.base_url);
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  nlohmann::json body = {{"model", config_.model}, {"temperature", config_.temperature}};
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string request = body.dump();

  const SplitUrl url = split_url(config_.base_url);
  httplib::Client cli(url.origin);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  cli.set_connection_timeout(secs);
  cli.set_read_timeout(secs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = cli.Post(url.path + "/chat/completions", headers, request, "application/json");
  if (!res) {
    throw TransientError(fmt::format("chat request failed: {}", httplib::to_string(res.error())));
  }
  if (config_.audit) config_.audit(request, res->body);
  if (res->status == 429 || res->status >= 500) {
    throw TransientError(fmt::format("chat endpoint returned HTTP {}", res->status));
  }
  if (res->status != 200) {
    throw UnavailableError(fmt::format("chat endpoint returned HTTP {}", res->status));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed chat response: {}", e.what()));
  }
}

std::unique_ptr<ChatClient> chat_client_from_env(const std::string& prefix,
                                                 const std::string& model) {
  const char* url = std::getenv((prefix + "_API_URL").c_str());
  if (url == nullptr || *url == '\0') return nullptr;
  const char* key = std::getenv((prefix + "_API_KEY").c_str());
  HttpChatConfig config;
  config.base_url = url;
  config.api_key = key ? key : "";
  config.model = model;
  return std::make_unique<HttpChatClient>(std::move(config));
}

FixtureChatClient::FixtureChatClient(std::vector<std::optional<std::string>> responses)
    : responses_(responses.begin(), responses.end()) {}

std::string FixtureChatClient::complete(const std::vector<ChatMessage>& messages) {
  std::lock_guard lock(mu_);
  requests_.push_back(messages);
  if (responses_.empty()) throw UnavailableError("fixture client has no responses left");
  auto next = std::move(responses_.front());
  responses_.pop_front();
  if (!next) throw TransientError("simulated network failure");
  return *next;
}

std::size_t FixtureChatClient::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::vector<std::vector<ChatMessage>> FixtureChatClient::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::string with_retries(const std::function<std::string()>& fn, int max_attempts,
                         std::chrono::milliseconds base_delay) {
  if (max_attempts < 1) throw ConfigError("retry limit must be at least 1");
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      const bool retryable = dynamic_cast<const TransientError*>(&e) != nullptr ||
                             dynamic_cast<const ParseError*>(&e) != nullptr;
      if (!retryable || attempt + 1 >= max_attempts) throw;
      spdlog::warn("attempt {} failed ({}); retrying", attempt + 1, e.what());
      std::this_thread::sleep_for(base_delay * (1 << attempt));
    }
  }
}

}  // namespace wlab
