// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/model/tokenizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "wlab/util/error.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {

Tokenizer Tokenizer::build(std::string_view corpus_text) {
  if (corpus_text.empty()) throw IngestionError("cannot build a vocabulary from an empty corpus");
  std::set<char32_t> unique;
  for (char32_t cp : utf8::decode(corpus_text))
    if (cp != static_cast<char32_t>(kSepChar)) unique.insert(cp);
  if (unique.empty()) throw IngestionError("corpus contains no characters besides separators");
  return from_codepoints(std::vector<char32_t>(unique.begin(), unique.end()));
}

Tokenizer Tokenizer::from_codepoints(std::vector<char32_t> codepoints) {
  std::sort(codepoints.begin(), codepoints.end());
  codepoints.erase(std::unique(codepoints.begin(), codepoints.end()), codepoints.end());
  Tokenizer tok;
  tok.codepoints_ = std::move(codepoints);
  for (std::size_t i = 0; i < tok.codepoints_.size(); ++i)
    tok.index_.emplace(tok.codepoints_[i], static_cast<TokenId>(kNumSpecials + i));
  return tok;
}

bool Tokenizer::covers(std::string_view text) const {
  for (char32_t cp : utf8::decode(text))
    if (cp != static_cast<char32_t>(kSepChar) && !index_.contains(cp)) return false;
  return true;
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  const std::u32string cps = utf8::decode(text);
  ids.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp == static_cast<char32_t>(kSepChar)) {
      ids.push_back(kSep);
      continue;
    }
    auto it = index_.find(cp);
    if (it == index_.end()) {
      throw DataError(fmt::format("character U+{:04X} ('{}') is not in the vocabulary",
                                  static_cast<std::uint32_t>(cp), utf8::encode(cp)));
    }
    ids.push_back(it->second);
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::u32string cps;
  cps.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == kSep) {
      cps.push_back(static_cast<char32_t>(kSepChar));
    } else if (!is_special(id)) {
      const std::size_t index = id - kNumSpecials;
      if (index >= codepoints_.size()) {
        throw IndexError(fmt::format("token id {} outside vocabulary of {}", id, vocab_size()));
      }
      cps.push_back(codepoints_[index]);
    }
  }
  return utf8::encode(cps);
}

TokenId Tokenizer::task_tag(TaskId task) {
  switch (task) {
    case TaskId::World:
      return kTaskWorld;
    case TaskId::Plot:
      return kTaskPlot;
    case TaskId::Writing:
      return kTaskWrite;
    case TaskId::Foundation:
      break;
  }
  throw ContractError("the foundation task has no task tag");
}

nlohmann::json Tokenizer::to_json() const {
  std::vector<std::uint32_t> cps(codepoints_.begin(), codepoints_.end());
  return {{"specials", {"PAD", "BOS", "EOS", "SEP", "TASK_WORLD", "TASK_PLOT", "TASK_WRITE"}},
          {"codepoints", cps}};
}

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  std::vector<char32_t> cps;
  for (std::uint32_t cp : j.at("codepoints").get<std::vector<std::uint32_t>>()) cps.push_back(cp);
  return from_codepoints(std::move(cps));
}

void TokenSequence::validate(std::size_t max_seq_len) const {
  if (ids.size() != loss_mask.size()) {
    throw LengthError(fmt::format("token sequence has {} ids but {} mask entries", ids.size(),
                                  loss_mask.size()));
  }
  if (ids.size() > max_seq_len + 1) {
    throw LengthError(fmt::format("token sequence of {} feeds {} inputs, limit is {}", ids.size(),
                                  ids.size() - 1, max_seq_len));
  }
}

}  // namespace wlab
