// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace wlab {

struct ChatMessage {
  std::string role;
  std::string content;
};

/// Minimal chat-completion interface. Implementations throw TransientError for
/// failures worth retrying and UnavailableError when no backend is configured.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct HttpChatConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model = "gpt-4o";
  double temperature = 0.0;
  std::chrono::seconds timeout{120};
  /// Receives request and response bodies for auditing. The key is never included.
  std::function<void(const std::string& request, const std::string& response)> audit;
};

/// OpenAI-compatible `POST {base_url}/chat/completions`.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  HttpChatConfig config_;
};

/// Builds an HttpChatClient from `<prefix>_API_URL` / `<prefix>_API_KEY`.
/// Returns nullptr when the URL variable is unset.
std::unique_ptr<ChatClient> chat_client_from_env(const std::string& prefix,
                                                 const std::string& model = "gpt-4o");

/// Replays canned responses in order; an entry holding nullopt simulates a
/// network failure. Records every request.
class FixtureChatClient : public ChatClient {
 public:
  explicit FixtureChatClient(std::vector<std::optional<std::string>> responses);
  std::string complete(const std::vector<ChatMessage>& messages) override;

  std::size_t calls() const;
  std::vector<std::vector<ChatMessage>> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::optional<std::string>> responses_;
  std::vector<std::vector<ChatMessage>> requests_;
};

/// Retries `fn` on TransientError and ParseError with exponential backoff
/// (base_delay · 2^attempt). Rethrows the last error after `max_attempts`.
std::string with_retries(const std::function<std::string()>& fn, int max_attempts,
                         std::chrono::milliseconds base_delay);

}  // namespace wlab
