// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/eval/report.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "wlab/util/error.hpp"

namespace wlab {
namespace {

std::map<std::string, const EvalItem*> index_by_id(const std::vector<EvalItem>& items,
                                                   std::string_view side,
                                                   std::vector<std::string>& problems) {
  std::map<std::string, const EvalItem*> out;
  for (const auto& item : items)
    if (!out.emplace(item.id, &item).second)
      problems.push_back(fmt::format("duplicate {} id '{}'", side, item.id));
  return out;
}

void add_prf(std::map<std::string, double>& sums, const std::string& name, const Prf& p) {
  sums[name + ".precision"] += p.precision;
  sums[name + ".recall"] += p.recall;
  sums[name + ".f1"] += p.f1;
}

}  // namespace

std::string_view eval_mode_name(EvalMode mode) {
  return mode == EvalMode::PlotPlanning ? "plot" : "writing";
}

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "writing") return EvalMode::Writing;
  if (name == "plot" || name == "plot-planning") return EvalMode::PlotPlanning;
  throw ConfigError(fmt::format("unknown evaluation mode '{}'", name));
}

EvalReport evaluate_run(const std::vector<EvalItem>& candidates,
                        const std::vector<EvalItem>& references, const EvalOptions& options,
                        ChatClient* client, nlohmann::json provenance) {
  if (options.judge) {
    options.judge->validate();
    if (client == nullptr) throw UnavailableError("judge scoring requested but no judge client is configured");
  }
  std::vector<std::string> problems;
  const auto cand = index_by_id(candidates, "candidate", problems);
  const auto ref = index_by_id(references, "reference", problems);
  for (const auto& [id, _] : cand)
    if (!ref.count(id)) problems.push_back(fmt::format("candidate '{}' has no reference", id));
  for (const auto& [id, _] : ref)
    if (!cand.count(id)) problems.push_back(fmt::format("reference '{}' has no candidate", id));
  if (!problems.empty()) {
    std::string msg = "misaligned evaluation items:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw AlignmentError(msg);
  }

  EvalReport report;
  report.mode = options.mode;
  report.provenance = std::move(provenance);
  std::vector<std::pair<const EvalItem*, const EvalItem*>> pairs;
  for (const auto& [id, c] : cand) {
    pairs.emplace_back(c, ref.at(id));
    report.items.push_back(ItemResult{id, {}, {}, false, 0, {}});
  }

  if (options.mode == EvalMode::Writing)
    for (std::size_t i = 0; i < pairs.size(); ++i)
      report.items[i].rouge = rouge_scores(pairs[i].first->text, pairs[i].second->text, options.token_mode);

  if (options.judge) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex mu;
    auto worker = [&] {
      for (std::size_t i = next++; i < pairs.size(); i = next++) {
        try {
          JudgeOutcome o = judge_aspects(pairs[i].first->text, pairs[i].second->text, *options.judge, *client);
          ItemResult& r = report.items[i];
          r.judge_attempts = o.attempts;
          r.aspects = o.scores;
          r.judge_failed = !o.scores.has_value();
          r.judge_error = o.error;
        } catch (...) {
          std::lock_guard lock(mu);
          if (!fatal) fatal = std::current_exception();
          next = pairs.size();
        }
      }
    };
    const std::size_t n = std::min(options.judge->concurrency, std::max<std::size_t>(pairs.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);
  }

  std::map<std::string, double> sums;
  std::size_t rouge_items = 0;
  for (const auto& r : report.items) {
    if (r.rouge) {
      ++rouge_items;
      add_prf(sums, "rouge1", r.rouge->r1);
      add_prf(sums, "rouge2", r.rouge->r2);
      add_prf(sums, "rougeL", r.rouge->rl);
    }
    if (r.judge_failed) ++report.judge_failed;
    if (r.aspects) {
      ++report.judged;
      for (Aspect a : kAllAspects) sums[std::string(aspect_name(a))] += (*r.aspects)[a];
    }
  }
  const bool plot = options.mode == EvalMode::PlotPlanning;
  for (const auto& [name, total] : sums) {
    const bool aspect = name.find('.') == std::string::npos;
    if (aspect && plot &&
        std::none_of(kPlotAspects.begin(), kPlotAspects.end(),
                     [&](Aspect a) { return aspect_name(a) == name; }))
      continue;
    report.means[name] = total / static_cast<double>(aspect ? report.judged : rouge_items);
  }
  return report;
}

std::string EvalReport::table() const {
  std::string out = fmt::format("mode: {}   items: {}", eval_mode_name(mode), items.size());
  if (judged + judge_failed > 0) out += fmt::format("   judged: {}   judge-failed: {}", judged, judge_failed);
  out += "\n";
  auto row = [&](const std::string& label, const std::string& key) {
    auto it = means.find(key);
    if (it != means.end()) out += fmt::format("  {:<10} {:>8.4f}\n", label, it->second);
  };
  for (const char* r : {"rouge1", "rouge2", "rougeL"}) {
    if (!means.count(std::string(r) + ".f1")) continue;
    out += fmt::format("  {:<10} P {:.4f}  R {:.4f}  F1 {:.4f}\n", r, means.at(std::string(r) + ".precision"),
                       means.at(std::string(r) + ".recall"), means.at(std::string(r) + ".f1"));
  }
  for (Aspect a : kAllAspects) row(std::string(aspect_name(a)), std::string(aspect_name(a)));
  return out;
}

void to_json(nlohmann::json& j, const ItemResult& r) {
  j = {{"id", r.id}};
  if (r.rouge) j["rouge"] = *r.rouge;
  if (r.aspects) j["aspects"] = *r.aspects;
  if (r.judge_attempts > 0) j["judge_attempts"] = r.judge_attempts;
  if (r.judge_failed) {
    j["judge_failed"] = true;
    j["judge_error"] = r.judge_error;
  }
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = {{"mode", eval_mode_name(r.mode)},
       {"items", r.items},
       {"means", r.means},
       {"judged", r.judged},
       {"judge_failed", r.judge_failed},
       {"provenance", r.provenance}};
  if (r.mode == EvalMode::PlotPlanning)
    for (auto& item : j["items"])
      if (item.contains("aspects"))
        for (Aspect a : {Aspect::LS, Aspect::EX, Aspect::SLC}) item["aspects"].erase(std::string(aspect_name(a)));
}

}  // namespace wlab
