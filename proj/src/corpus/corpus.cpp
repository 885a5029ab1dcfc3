// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/corpus/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>

#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab {

namespace {

constexpr std::string_view kChapterMarker = "## CHAPTER ";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

template <typename T>
std::vector<T> parse_jsonl(std::string_view text, const char* what) {
  std::vector<T> out;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw IngestionError(fmt::format("{} line {}: {}", what, line_no, e.what()));
    }
  }
  return out;
}

template <typename T>
std::string serialize_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) out += nlohmann::json(item).dump() + "\n";
  return out;
}

}  // namespace

const Chapter& NovelCorpus::chapter(std::size_t index) const {
  if (index >= 1 && index <= chapters.size() && chapters[index - 1].index == index)
    return chapters[index - 1];
  for (const auto& c : chapters)
    if (c.index == index) return c;
  throw IndexError(fmt::format("no chapter {}", index));
}

void to_json(nlohmann::json& j, const PlotUnit& p) {
  j = {{"chapter", p.chapter},
       {"index", p.index},
       {"summary", p.summary},
       {"start", p.start},
       {"end", p.end}};
}

void from_json(const nlohmann::json& j, PlotUnit& p) {
  j.at("chapter").get_to(p.chapter);
  j.at("index").get_to(p.index);
  j.at("summary").get_to(p.summary);
  j.at("start").get_to(p.start);
  j.at("end").get_to(p.end);
}

void to_json(nlohmann::json& j, const CharacterProfile& p) {
  j = {{"name", p.name}, {"description", p.description}};
}

void from_json(const nlohmann::json& j, CharacterProfile& p) {
  j.at("name").get_to(p.name);
  j.at("description").get_to(p.description);
}

NovelCorpus parse_corpus(std::string_view text) {
  NovelCorpus corpus;
  // Body = everything between a marker line and the next marker line, minus
  // the newline that terminates it.
  std::size_t pos = 0;
  if (starts_with(text, "# ")) {
    const auto nl = text.find('\n');
    corpus.title = std::string(text.substr(2, nl == std::string_view::npos ? nl : nl - 2));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
  }
  Chapter* current = nullptr;
  std::size_t body_start = 0;
  auto close = [&](std::size_t end) {
    if (!current) return;
    std::size_t stop = end;
    if (stop > body_start && text[stop - 1] == '\n') --stop;
    current->body = std::string(text.substr(body_start, stop - body_start));
  };
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
    const auto line = text.substr(pos, line_end - pos);
    if (starts_with(line, kChapterMarker)) {
      close(pos);
      auto rest = line.substr(kChapterMarker.size());
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
      if (ec != std::errc()) {
        throw IngestionError(fmt::format("malformed chapter marker '{}'", std::string(line)));
      }
      std::string_view title(ptr, rest.data() + rest.size() - ptr);
      if (!title.empty() && title.front() == ' ') title.remove_prefix(1);
      corpus.chapters.push_back({n, std::string(title), {}});
      current = &corpus.chapters.back();
      body_start = nl == std::string_view::npos ? text.size() : nl + 1;
    } else if (!current && line.find_first_not_of(" \t\r") != std::string_view::npos) {
      throw IngestionError("text before the first chapter marker");
    }
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
  }
  close(text.size());
  return corpus;
}

std::string serialize_corpus(const NovelCorpus& corpus) {
  std::string out;
  if (!corpus.title.empty()) out += "# " + corpus.title + "\n";
  for (const auto& c : corpus.chapters) {
    out += fmt::format("{}{}", kChapterMarker, c.index);
    if (!c.title.empty()) out += " " + c.title;
    out += "\n" + c.body + "\n";
  }
  return out;
}

std::vector<PlotUnit> parse_plots(std::string_view jsonl) {
  return parse_jsonl<PlotUnit>(jsonl, "plots");
}
std::string serialize_plots(const std::vector<PlotUnit>& plots) { return serialize_jsonl(plots); }
std::vector<CharacterProfile> parse_profiles(std::string_view jsonl) {
  return parse_jsonl<CharacterProfile>(jsonl, "profiles");
}
std::string serialize_profiles(const std::vector<CharacterProfile>& profiles) {
  return serialize_jsonl(profiles);
}

void validate(const NovelCorpus& corpus, const Annotations& annotations) {
  if (corpus.chapters.empty()) throw IngestionError("corpus has no chapters");
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < corpus.chapters.size(); ++i) {
    const auto& c = corpus.chapters[i];
    if (c.index != i + 1) {
      throw IngestionError(fmt::format("chapter indices must be dense from 1: found {} at position {}",
                                       c.index, i + 1));
    }
    if (c.body.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw IngestionError(fmt::format("chapter {} has an empty body", c.index));
    }
    lengths.push_back(utf8::length(c.body));
  }
  const PlotUnit* prev = nullptr;
  for (const auto& p : annotations.plots) {
    const auto where = fmt::format("plot (chapter {}, index {})", p.chapter, p.index);
    if (p.chapter < 1 || p.chapter > lengths.size())
      throw IngestionError(where + " refers to a missing chapter");
    if (p.summary.empty()) throw IngestionError(where + " has an empty summary");
    if (p.start >= p.end || p.end > lengths[p.chapter - 1]) {
      throw IngestionError(fmt::format("{} span [{}, {}) is out of bounds for a {}-character chapter",
                                       where, p.start, p.end, lengths[p.chapter - 1]));
    }
    if (prev && prev->chapter == p.chapter) {
      if (p.index <= prev->index) throw IngestionError(where + " is out of order");
      if (p.start < prev->end) throw IngestionError(where + " overlaps the previous span");
    } else if (prev && prev->chapter > p.chapter) {
      throw IngestionError(where + " is out of order");
    }
    prev = &p;
  }
  std::set<std::string> names;
  for (const auto& profile : annotations.profiles) {
    if (profile.name.empty()) throw IngestionError("profile with an empty name");
    if (!names.insert(profile.name).second)
      throw IngestionError(fmt::format("duplicate profile name '{}'", profile.name));
  }
}

LoadedCorpus load_corpus(const std::filesystem::path& corpus_file,
                         const std::filesystem::path& plots_file,
                         const std::filesystem::path& profiles_file) {
  LoadedCorpus out;
  out.corpus = parse_corpus(read_file(corpus_file));
  out.annotations.plots = parse_plots(read_file(plots_file));
  out.annotations.profiles = parse_profiles(read_file(profiles_file));
  std::stable_sort(out.annotations.plots.begin(), out.annotations.plots.end(),
                   [](const PlotUnit& a, const PlotUnit& b) {
                     return std::tie(a.chapter, a.index) < std::tie(b.chapter, b.index);
                   });
  validate(out.corpus, out.annotations);
  return out;
}

void save_corpus(const std::filesystem::path& dir, const LoadedCorpus& data) {
  std::filesystem::create_directories(dir);
  write_file(dir / "corpus.txt", serialize_corpus(data.corpus));
  write_file(dir / "plots.jsonl", serialize_plots(data.annotations.plots));
  write_file(dir / "profiles.jsonl", serialize_profiles(data.annotations.profiles));
}

std::string codepoint_substr(std::string_view text, std::size_t start, std::size_t end) {
  std::size_t cp = 0, i = 0, byte_start = text.size(), byte_end = text.size();
  while (i < text.size()) {
    if (cp == start) byte_start = i;
    if (cp == end) {
      byte_end = i;
      break;
    }
    const auto lead = static_cast<unsigned char>(text[i]);
    i += lead < 0x80 ? 1 : (lead & 0xE0) == 0xC0 ? 2 : (lead & 0xF0) == 0xE0 ? 3 : 4;
    ++cp;
  }
  if (cp == start && byte_start == text.size()) byte_start = i;
  if (start > end || cp < end) {
    throw IndexError(fmt::format("codepoint range [{}, {}) outside a {}-codepoint text", start, end,
                                 cp));
  }
  return std::string(text.substr(byte_start, byte_end - byte_start));
}

std::string segment_text(const NovelCorpus& corpus, const PlotUnit& plot) {
  return codepoint_substr(corpus.chapter(plot.chapter).body, plot.start, plot.end);
}

}  // namespace wlab
