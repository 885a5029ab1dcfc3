// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/task.hpp"
#include "wlab/autodiff/ops.hpp"

namespace wlab {

enum SpecialToken : TokenId {
  kPad = 0,
  kBos = 1,
  kEos = 2,
  kSep = 3,
  kTaskWorld = 4,
  kTaskPlot = 5,
  kTaskWrite = 6,
};
inline constexpr std::size_t kNumSpecials = 7;

/// In-text spelling of the SEP token (ASCII record separator). Corpus text must
/// not contain it.
inline constexpr char kSepChar = '\x1e';

/// Character-level vocabulary: the 7 specials, then the corpus codepoints in
/// ascending order.
class Tokenizer {
 public:
  Tokenizer() = default;

  /// Throws IngestionError on empty text.
  static Tokenizer build(std::string_view corpus_text);
  static Tokenizer from_codepoints(std::vector<char32_t> codepoints);

  std::size_t vocab_size() const noexcept { return kNumSpecials + codepoints_.size(); }
  const std::vector<char32_t>& codepoints() const noexcept { return codepoints_; }
  bool covers(std::string_view text) const;

  /// kSepChar maps to SEP; any other codepoint outside the vocabulary throws
  /// DataError.
  std::vector<TokenId> encode(std::string_view text) const;
  /// SEP decodes to kSepChar; other specials are dropped.
  std::string decode(std::span<const TokenId> ids) const;

  static TokenId task_tag(TaskId task);
  static bool is_special(TokenId id) noexcept { return id < kNumSpecials; }

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);

  bool operator==(const Tokenizer& other) const { return codepoints_ == other.codepoints_; }

 private:
  std::vector<char32_t> codepoints_;
  std::unordered_map<char32_t, TokenId> index_;
};

/// Token ids plus a parallel mask marking which tokens are prediction targets.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> loss_mask;

  std::size_t size() const noexcept { return ids.size(); }
  /// Throws LengthError when the model would consume more than `max_seq_len`
  /// inputs (ids.size() − 1), or when the two lists differ in length.
  void validate(std::size_t max_seq_len) const;
};

}  // namespace wlab
