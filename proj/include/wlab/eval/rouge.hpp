// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wlab {

/// Word: lowercased, punctuation stripped, whitespace separated. Character:
/// one token per non-space, non-punctuation codepoint. Auto picks Character
/// when CJK ideographs make up at least 30% of the letters.
enum class TokenMode { Auto, Word, Character };

std::string_view token_mode_name(TokenMode mode);
TokenMode parse_token_mode(std::string_view name);
TokenMode detect_token_mode(std::string_view text);

std::vector<std::string> rouge_tokens(std::string_view text, TokenMode mode);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR/(P+R), or 0 when both are 0.
double f_measure(double precision, double recall);

struct RougeResult {
  Prf score;
  bool degenerate = false;  // a side had fewer than n tokens
};

RougeResult rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    std::size_t n);
RougeResult rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct RougeScores {
  Prf r1, r2, rl;
  bool degenerate = false;
};

/// ROUGE-1/2/L of one pair. Auto mode is resolved on the reference.
RougeScores rouge_scores(std::string_view candidate, std::string_view reference,
                         TokenMode mode = TokenMode::Auto);

void to_json(nlohmann::json& j, const Prf& p);
void to_json(nlohmann::json& j, const RougeScores& s);

}  // namespace wlab
