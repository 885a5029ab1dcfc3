// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/corpus/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/rng.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {

namespace {

constexpr std::array<std::string_view, 16> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                      "p", "r", "s", "t", "v", "z", "th", "qu"};
constexpr std::array<std::string_view, 6> kVowels = {"a", "e", "i", "o", "u", "ai"};
constexpr std::array<std::string_view, 7> kCodas = {"", "n", "r", "sh", "l", "x", "th"};

constexpr std::array<std::string_view, 12> kEvents = {
    "storm", "feast", "duel",  "harvest", "betrayal", "voyage",
    "wedding", "siege", "trial", "fire",  "flood",    "council"};
constexpr std::array<std::string_view, 12> kMarkers = {
    "verily", "lo",  "hark", "alas", "forsooth", "behold",
    "anon",   "yea", "ere",  "nay",  "prithee",  "whence"};

constexpr std::array<std::string_view, 8> kRoles = {"smith",  "scholar", "knight", "merchant",
                                                    "healer", "sailor",  "hunter", "bard"};
constexpr std::array<std::string_view, 8> kHabits = {
    "keeps old letters", "hums by the fire", "never sleeps early", "counts every coin",
    "trusts no stranger", "feeds the crows",  "walks before dawn",  "mends broken things"};
constexpr std::array<std::string_view, 6> kArrivals = {"came to", "rode into", "walked through",
                                                       "returned to", "fled from", "waited in"};
constexpr std::array<std::string_view, 6> kEventClauses = {
    "began at dusk", "was long remembered", "shook the town", "ended in silence",
    "came without warning", "changed the old ways"};
constexpr std::array<std::string_view, 6> kJoint = {
    "spoke of old debts", "shared a meal", "argued until night", "made a quiet pact",
    "watched the road", "buried a secret"};
constexpr std::array<std::string_view, 6> kReactions = {"said nothing", "wept openly",
                                                        "laughed at the sky", "drew a blade",
                                                        "kept watch", "sang softly"};
constexpr std::array<std::string_view, 4> kEpilogues = {
    "and so the day ended in {}.", "night fell over {} at last.",
    "the lamps of {} burned low.", "few in {} slept well that night."};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& items, Rng& rng) {
  return items[rng.below(N)];
}

std::string invent_word(Rng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += pick(kOnsets, rng);
    w += pick(kVowels, rng);
  }
  w += pick(kCodas, rng);
  return w;
}

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

// Unique words not colliding with anything already used.
std::vector<std::string> invent_unique(Rng& rng, std::size_t n, std::size_t syllables,
                                       std::set<std::string>& used) {
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = invent_word(rng, syllables);
    if (w.size() < 4 || !used.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

}  // namespace

SynthConfig SynthConfig::preset(std::string_view size, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  if (size == "tiny") {
    c.chapters = 12;
  } else if (size == "small") {
    c.chapters = 120;
  } else if (size == "medium") {
    c.chapters = 240;
  } else {
    throw ConfigError(fmt::format("unknown synthetic corpus size '{}'", size));
  }
  return c;
}

std::string SynthTruth::event_of(std::string_view summary) {
  constexpr std::string_view prefix = "the ";
  if (summary.substr(0, prefix.size()) != prefix) return {};
  const auto stop = summary.find('.', prefix.size());
  if (stop == std::string_view::npos) return {};
  return std::string(summary.substr(prefix.size(), stop - prefix.size()));
}

void to_json(nlohmann::json& j, const SynthTruth& t) {
  j = {{"traits", t.traits}, {"successor", t.successor}, {"markers", t.markers}};
}

void from_json(const nlohmann::json& j, SynthTruth& t) {
  j.at("traits").get_to(t.traits);
  j.at("successor").get_to(t.successor);
  j.at("markers").get_to(t.markers);
}

SynthCorpus generate_synthetic(const SynthConfig& config) {
  if (config.chapters == 0 || config.plots_per_chapter == 0 || config.characters < 2)
    throw ConfigError("synthetic corpus needs chapters, plots and at least two characters");
  Rng rng(config.seed);
  std::set<std::string> used(kMarkers.begin(), kMarkers.end());
  used.insert(kEvents.begin(), kEvents.end());

  auto names = invent_unique(rng, config.characters, 2, used);
  for (auto& n : names) n = capitalize(n);
  auto traits = invent_unique(rng, config.characters, 2, used);
  auto places = invent_unique(rng, 8, 2, used);
  for (auto& p : places) p = capitalize(p);

  SynthCorpus out;
  std::vector<std::string> order(kEvents.begin(), kEvents.end());
  rng.shuffle(order);
  std::vector<std::string> markers(kMarkers.begin(), kMarkers.end());
  rng.shuffle(markers);
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.truth.successor[order[i]] = order[(i + 1) % order.size()];
    out.truth.markers[order[i]] = markers[i];
  }

  auto& profiles = out.data.annotations.profiles;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.truth.traits[names[i]] = traits[i];
    profiles.push_back(
        {names[i], fmt::format("{} the {} is a {} from {}. {} the {} {}.", names[i], traits[i],
                               pick(kRoles, rng), places[rng.below(places.size())], names[i],
                               traits[i], pick(kHabits, rng))});
  }

  out.data.corpus.title = fmt::format("Synthetic Chronicle {}", config.seed);
  std::string event = order[rng.below(order.size())];
  for (std::size_t c = 1; c <= config.chapters; ++c) {
    Chapter chapter{c, capitalize("the " + event), {}};
    std::size_t cursor = 0;
    std::string place;
    for (std::size_t j = 1; j <= config.plots_per_chapter; ++j) {
      const std::size_t a = rng.below(names.size());
      std::size_t b = rng.below(names.size() - 1);
      if (b >= a) ++b;
      place = places[rng.below(places.size())];
      const std::string summary =
          fmt::format("the {}. {} and {} at {}.", event, names[a], names[b], place);
      const std::string segment = fmt::format(
          "{}, {} the {} {} {}. the {} {}. {} and {} {}. {} the {} {}.\n", out.truth.markers[event],
          names[a], traits[a], pick(kArrivals, rng), place, event, pick(kEventClauses, rng),
          names[a], names[b], pick(kJoint, rng), names[b], traits[b], pick(kReactions, rng));
      const std::size_t len = utf8::length(segment);
      out.data.annotations.plots.push_back({c, j, summary, cursor, cursor + len});
      chapter.body += segment;
      cursor += len;
      event = out.truth.successor[event];
    }
    chapter.body += fmt::format(fmt::runtime(pick(kEpilogues, rng)), place);
    out.data.corpus.chapters.push_back(std::move(chapter));
  }
  validate(out.data.corpus, out.data.annotations);
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& synth) {
  save_corpus(dir, synth.data);
  write_file(dir / "truth.json", nlohmann::json(synth.truth).dump(2) + "\n");
}

SynthTruth read_truth(const std::filesystem::path& file) {
  try {
    return nlohmann::json::parse(read_file(file)).get<SynthTruth>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(fmt::format("{}: {}", file.string(), e.what()));
  }
}

bool contains_word(std::string_view text, std::string_view word) {
  if (word.empty()) return false;
  auto is_letter = [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)) != 0; };
  for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !is_letter(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right = end >= text.size() || !is_letter(text[end]);
    if (left && right) return true;
  }
  return false;
}

}  // namespace wlab
