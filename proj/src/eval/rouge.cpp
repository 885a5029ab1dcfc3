// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/eval/rouge.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "wlab/util/error.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {
namespace {

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0x3000 || cp == 0xA0;
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) return cp > 0x20 && cp < 0x7F && !((cp >= U'0' && cp <= U'9') ||
                                                      (cp >= U'a' && cp <= U'z') ||
                                                      (cp >= U'A' && cp <= U'Z'));
  return (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation, curly quotes, dashes
         (cp >= 0x3000 && cp <= 0x303F) ||  // CJK symbols and punctuation
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65) ||
         (cp >= 0xFE10 && cp <= 0xFE1F) || (cp >= 0xFE30 && cp <= 0xFE4F) || cp == 0xB7 ||
         cp == 0xAB || cp == 0xBB;
}

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> count_grams(std::span<const std::string> tokens, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[Gram(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

Prf make_prf(double overlap, double cand_total, double ref_total) {
  Prf p;
  p.precision = cand_total > 0 ? overlap / cand_total : 0.0;
  p.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  p.f1 = f_measure(p.precision, p.recall);
  return p;
}

}  // namespace

std::string_view token_mode_name(TokenMode mode) {
  switch (mode) {
    case TokenMode::Auto:
      return "auto";
    case TokenMode::Word:
      return "word";
    case TokenMode::Character:
      return "character";
  }
  return "unknown";
}

TokenMode parse_token_mode(std::string_view name) {
  for (TokenMode m : {TokenMode::Auto, TokenMode::Word, TokenMode::Character})
    if (token_mode_name(m) == name) return m;
  throw ConfigError(fmt::format("unknown token mode '{}'", name));
}

TokenMode detect_token_mode(std::string_view text) {
  std::size_t letters = 0, cjk = 0;
  for (char32_t cp : utf8::decode(text)) {
    if (is_space(cp) || is_punctuation(cp)) continue;
    ++letters;
    cjk += utf8::is_cjk(cp);
  }
  return letters > 0 && 10 * cjk >= 3 * letters ? TokenMode::Character : TokenMode::Word;
}

std::vector<std::string> rouge_tokens(std::string_view text, TokenMode mode) {
  if (mode == TokenMode::Auto) mode = detect_token_mode(text);
  std::vector<std::string> out;
  const std::u32string cps = utf8::decode(text);
  if (mode == TokenMode::Character) {
    for (char32_t cp : cps)
      if (!is_space(cp) && !is_punctuation(cp)) out.push_back(utf8::encode(cp));
    return out;
  }
  std::u32string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(utf8::encode(word));
    word.clear();
  };
  for (char32_t cp : cps) {
    if (is_space(cp) || is_punctuation(cp)) {
      flush();
    } else {
      word.push_back(cp >= U'A' && cp <= U'Z' ? cp - U'A' + U'a' : cp);
    }
  }
  flush();
  return out;
}

double f_measure(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

RougeResult rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    std::size_t n) {
  if (n == 0) throw DomainError("ROUGE-N needs n >= 1");
  RougeResult r;
  if (candidate.size() < n || reference.size() < n) {
    r.degenerate = true;
    return r;
  }
  const auto cand = count_grams(candidate, n);
  const auto ref = count_grams(reference, n);
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  r.score = make_prf(static_cast<double>(overlap), static_cast<double>(candidate.size() - n + 1),
                     static_cast<double>(reference.size() - n + 1));
  return r;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeResult rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  RougeResult r;
  if (candidate.empty() || reference.empty()) {
    r.degenerate = true;
    return r;
  }
  r.score = make_prf(static_cast<double>(lcs_length(candidate, reference)),
                     static_cast<double>(candidate.size()), static_cast<double>(reference.size()));
  return r;
}

RougeScores rouge_scores(std::string_view candidate, std::string_view reference, TokenMode mode) {
  if (mode == TokenMode::Auto) mode = detect_token_mode(reference);
  const auto c = rouge_tokens(candidate, mode);
  const auto r = rouge_tokens(reference, mode);
  RougeScores s;
  const auto r1 = rouge_n(c, r, 1), r2 = rouge_n(c, r, 2), rl = rouge_l(c, r);
  s.r1 = r1.score;
  s.r2 = r2.score;
  s.rl = rl.score;
  s.degenerate = r1.degenerate || r2.degenerate || rl.degenerate;
  return s;
}

void to_json(nlohmann::json& j, const Prf& p) {
  j = {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

void to_json(nlohmann::json& j, const RougeScores& s) {
  j = {{"rouge1", s.r1}, {"rouge2", s.r2}, {"rougeL", s.rl}, {"degenerate", s.degenerate}};
}

}  // namespace wlab
