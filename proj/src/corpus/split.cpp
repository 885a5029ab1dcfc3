// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/corpus/split.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/util/error.hpp"

namespace wlab {

SplitSpec SplitSpec::leading(std::size_t n_train, std::size_t n_chapters) {
  return {{1, n_train}, {n_train + 1, n_chapters}};
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"train", {s.train.first, s.train.last}}, {"test", {s.test.first, s.test.last}}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  s.train = {j.at("train").at(0).get<std::size_t>(), j.at("train").at(1).get<std::size_t>()};
  s.test = {j.at("test").at(0).get<std::size_t>(), j.at("test").at(1).get<std::size_t>()};
}

CorpusSplit split(const NovelCorpus& corpus, const Annotations& annotations, const SplitSpec& spec) {
  const std::size_t n = corpus.chapters.size();
  if (spec.train.empty()) throw ConfigError("split has an empty training range");
  for (const auto& r : {spec.train, spec.test}) {
    if (!r.empty() && (r.first < 1 || r.last > n))
      throw ConfigError(fmt::format("chapter range [{}-{}] outside 1-{}", r.first, r.last, n));
  }
  for (std::size_t c = 1; c <= n; ++c) {
    const int owners = spec.train.contains(c) + spec.test.contains(c);
    if (owners != 1) {
      throw ConfigError(fmt::format("chapter {} is {} by the split", c,
                                    owners == 0 ? "not covered" : "claimed by both ranges"));
    }
  }
  if (spec.test.empty()) spdlog::warn("split has no test chapters; evaluation sets will be empty");

  CorpusSplit out;
  out.train.corpus.title = out.test.corpus.title = corpus.title;
  for (const auto& c : corpus.chapters)
    (spec.train.contains(c.index) ? out.train : out.test).corpus.chapters.push_back(c);
  for (const auto& p : annotations.plots)
    (spec.train.contains(p.chapter) ? out.train : out.test).annotations.plots.push_back(p);
  out.train.annotations.profiles = out.test.annotations.profiles = annotations.profiles;
  return out;
}

}  // namespace wlab
