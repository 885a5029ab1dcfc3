// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "rouge_oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace wlab::testing {
namespace {

bool same_gram(const Tokens& x, std::size_t i, const Tokens& y, std::size_t j, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    if (x[i + k] != y[j + k]) return false;
  return true;
}

bool is_subsequence(const Tokens& sub, const Tokens& of) {
  std::size_t j = 0;
  for (const auto& t : of)
    if (j < sub.size() && sub[j] == t) ++j;
  return j == sub.size();
}

}  // namespace

std::size_t brute_ngram_overlap(const Tokens& candidate, const Tokens& reference, std::size_t n) {
  if (candidate.size() < n || reference.size() < n) return 0;
  const std::size_t nc = candidate.size() - n + 1, nr = reference.size() - n + 1;
  // Match each candidate gram to an unused equal reference gram; greedy is
  // exact here because equal grams are interchangeable.
  std::vector<bool> used(nr, false);
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < nr; ++j)
      if (!used[j] && same_gram(candidate, i, reference, j, n)) {
        used[j] = true;
        ++overlap;
        break;
      }
  return overlap;
}

std::size_t brute_lcs(const Tokens& a, const Tokens& b) {
  if (a.size() > 20) throw std::invalid_argument("brute_lcs is exponential; keep |a| small");
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

Tokens random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Tokens out(rng.below(max_len + 1));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + rng.below(alphabet)));
  return out;
}

}  // namespace wlab::testing
