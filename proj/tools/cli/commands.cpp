// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <mutex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/corpus/corpus.hpp"
#include "wlab/corpus/datasets.hpp"
#include "wlab/corpus/segmenter.hpp"
#include "wlab/corpus/split.hpp"
#include "wlab/corpus/synth.hpp"
#include "wlab/eval/report.hpp"
#include "wlab/experiment/synthetic.hpp"
#include "wlab/generate/generation.hpp"
#include "wlab/llm/chat.hpp"
#include "wlab/model/checkpoint.hpp"
#include "wlab/train/trainer.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/utf8.hpp"

namespace wlab::cli {
namespace {

using nlohmann::json;

const char* const kDatasetNames[] = {"foundation", "world", "plot", "writing"};

void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(fmt::format("{} is required", what));
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
}

void require_dir(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(fmt::format("{} is required", what));
  if (!fs::is_directory(p)) throw ConfigError(fmt::format("{} '{}' is not a directory", what, p.string()));
}

std::string chapter_id(std::size_t chapter) { return fmt::format("c{:03}", chapter); }
std::string plot_id(std::size_t chapter, std::size_t i) { return fmt::format("c{:03}.p{:02}", chapter, i); }

std::string items_jsonl(const std::vector<EvalItem>& items) {
  std::string out;
  for (const auto& it : items) out += json{{"id", it.id}, {"text", it.text}}.dump() + "\n";
  return out;
}

std::vector<EvalItem> read_items_jsonl(const fs::path& p) {
  std::vector<EvalItem> out;
  for (const auto& line : read_lines(p)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw IngestionError(fmt::format("{}: {}", p.string(), e.what()));
    }
  }
  return out;
}

/// Judge and segmenter clients take URL and key from the environment only.
/// Request and response bodies go to an audit file; the key never does.
std::unique_ptr<ChatClient> env_client(const std::string& prefix, const std::string& model,
                                       const fs::path& audit_file) {
  const char* url = std::getenv((prefix + "_API_URL").c_str());
  if (url == nullptr || *url == '\0') return nullptr;
  const char* key = std::getenv((prefix + "_API_KEY").c_str());
  HttpChatConfig hc;
  hc.base_url = url;
  hc.api_key = key ? key : "";
  hc.model = model;
  auto mu = std::make_shared<std::mutex>();
  const std::string secret = hc.api_key;
  hc.audit = [mu, audit_file, secret](const std::string& request, const std::string& response) {
    std::string line = json{{"request", request}, {"response", response}}.dump() + "\n";
    if (!secret.empty())
      for (auto pos = line.find(secret); pos != std::string::npos; pos = line.find(secret, pos))
        line.replace(pos, secret.size(), "[redacted]");
    std::lock_guard lock(*mu);
    append_file(audit_file, line);
  };
  return std::make_unique<HttpChatClient>(std::move(hc));
}

LoadedCorpus load_dir(const fs::path& dir) {
  require_dir(dir, "corpus directory");
  for (const char* f : {"corpus.txt", "plots.jsonl", "profiles.jsonl"}) require_file(dir / f, f);
  return load_corpus(dir / "corpus.txt", dir / "plots.jsonl", dir / "profiles.jsonl");
}

Tokenizer load_tokenizer(const fs::path& datasets) {
  require_file(datasets / "tokenizer.json", "tokenizer.json");
  try {
    return Tokenizer::from_json(json::parse(read_file(datasets / "tokenizer.json")));
  } catch (const json::exception& e) {
    throw IngestionError(fmt::format("tokenizer.json: {}", e.what()));
  }
}

ModelConfig model_config(const RunConfig& config, const Tokenizer& tok) {
  ModelConfig m = config.model;
  m.vocab_size = tok.vocab_size();
  m.validate();
  return m;
}

std::vector<TrainExample> load_stage(const fs::path& datasets, const std::string& name,
                                     const Tokenizer& tok, std::size_t max_seq_len) {
  const fs::path p = datasets / "train" / (name + ".jsonl");
  require_file(p, "training dataset");
  std::size_t truncated = 0;
  auto out = encode_examples(read_dataset(p), tok, max_seq_len, &truncated);
  if (truncated > 0) spdlog::info("{}: {} of {} examples truncated to fit the context", name, truncated, out.size());
  return out;
}

json stage_summary(const StageReport& s) {
  return {{"stage", s.stage},
          {"examples", s.examples},
          {"steps", s.steps},
          {"final_loss", s.log.empty() ? json() : json(s.log.back().loss)},
          {"checkpoint", s.checkpoint.string()},
          {"checkpoint_sha256", s.checkpoint_hash},
          {"frozen_verified", s.frozen_verified}};
}

}  // namespace

void cmd_synth(const SynthOptions& o, RunDirectory& run) {
  const SynthCorpus synth = generate_synthetic(SynthConfig::preset(o.size, o.seed));
  const fs::path out = run / "corpus";
  write_synthetic(out, synth);
  const auto bytes = fs::file_size(out / "corpus.txt");
  run.record_output("corpus", {{"path", out.string()},
                               {"chapters", synth.data.corpus.chapters.size()},
                               {"plots", synth.data.annotations.plots.size()},
                               {"profiles", synth.data.annotations.profiles.size()},
                               {"corpus_bytes", bytes},
                               {"sha256", content_hashes(out)}});
  std::cout << fmt::format("synthetic corpus: {} chapters, {} bytes -> {}\n", synth.data.corpus.chapters.size(),
                           bytes, out.string());
}

void cmd_ingest(const IngestOptions& o, RunDirectory& run) {
  fs::path corpus = o.corpus, plots = o.plots, profiles = o.profiles;
  if (!o.from.empty()) {
    require_dir(o.from, "--from");
    if (corpus.empty()) corpus = o.from / "corpus.txt";
    if (profiles.empty()) profiles = o.from / "profiles.jsonl";
    if (plots.empty() && fs::exists(o.from / "plots.jsonl")) plots = o.from / "plots.jsonl";
  }
  require_file(corpus, "--corpus");
  require_file(profiles, "--profiles");
  run.record_input("corpus", corpus);
  run.record_input("profiles", profiles);

  LoadedCorpus data;
  if (!plots.empty()) {
    require_file(plots, "--plots");
    run.record_input("plots", plots);
    data = load_corpus(corpus, plots, profiles);
  } else {
    if (!o.segment) throw ConfigError("--plots is required unless --segment is given");
    auto client = env_client("SEGMENTER", "gpt-4o", run / "segmenter_audit.jsonl");
    if (!client) throw ConfigError("--segment needs SEGMENTER_API_URL in the environment");
    data.corpus = parse_corpus(read_file(corpus));
    data.annotations.profiles = parse_profiles(read_file(profiles));
    std::size_t rejected = 0;
    for (const auto& ch : data.corpus.chapters) {
      auto seg = segment_with_llm(ch.index, ch.body, client.get());
      rejected += seg.rejected.size();
      data.annotations.plots.insert(data.annotations.plots.end(), seg.units.begin(), seg.units.end());
    }
    if (rejected > 0) spdlog::warn("segmenter proposed {} passages not found verbatim; dropped", rejected);
    validate(data.corpus, data.annotations);
  }
  const fs::path out = run / "dataset";
  save_corpus(out, data);
  json stats = {{"chapters", data.corpus.chapters.size()},
                {"plots", data.annotations.plots.size()},
                {"profiles", data.annotations.profiles.size()},
                {"corpus_codepoints", utf8::length(serialize_corpus(data.corpus))}};
  write_file(out / "stats.json", stats.dump(2) + "\n");
  run.record_output("dataset", {{"path", out.string()}, {"stats", stats}});
  std::cout << fmt::format("validated {} chapters, {} plots, {} profiles -> {}\n", data.corpus.chapters.size(),
                           data.annotations.plots.size(), data.annotations.profiles.size(), out.string());
}

void cmd_build_datasets(const BuildOptions& o, const RunConfig& config, RunDirectory& run) {
  const LoadedCorpus data = load_dir(o.data);
  run.record_input("data", o.data);
  const std::size_t n = data.corpus.chapters.size();
  const std::size_t n_train = config.data.train_chapters ? config.data.train_chapters : (2 * n) / 3;
  if (n_train == 0 || n_train >= n)
    throw ConfigError(fmt::format("data.train_chapters must lie in [1, {}) for this corpus", n));
  const SplitSpec spec = SplitSpec::leading(n_train, n);
  const CorpusSplit parts = split(data.corpus, data.annotations, spec);

  const Tokenizer tok = Tokenizer::build(serialize_corpus(data.corpus) + serialize_plots(data.annotations.plots) +
                                         serialize_profiles(data.annotations.profiles) + template_text());
  const fs::path out = run / "datasets";
  fs::create_directories(out / "train");
  fs::create_directories(out / "test");
  write_file(out / "tokenizer.json", tok.to_json().dump() + "\n");
  write_file(out / "split.json", json(spec).dump(2) + "\n");
  save_corpus(out / "corpus", data);

  PlotWindowOptions pw;
  pw.context = config.data.plot_context;
  pw.cross_chapter = config.data.cross_chapter;
  pw.ramp_up = config.data.ramp_up;
  auto build = [&](const CorpusPart& part) {
    return std::vector<std::vector<TaskExample>>{
        build_foundation_dataset(part.corpus, config.data.foundation_window, config.data.foundation_stride),
        build_world_dataset(part.annotations.profiles), build_plot_dataset(part.annotations.plots, pw),
        build_writing_dataset(part.annotations.plots, part.corpus)};
  };
  const auto train_sets = build(parts.train);
  const auto test_sets = build(parts.test);

  json stats = {{"split", spec}, {"tokenizer_vocab", tok.vocab_size()}, {"train", json::object()},
                {"test", json::object()}};
  const std::size_t max_seq_len = config.model.max_seq_len;
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& ex : train_sets[i])
      for (std::size_t c : ex.chapters)
        if (spec.test.contains(c))
          throw DataError(fmt::format("training example in '{}' cites test chapter {}", kDatasetNames[i], c));
    std::size_t truncated = 0;
    for (const auto& ex : train_sets[i]) truncated += serialize_example(ex, tok, max_seq_len).truncated;
    write_dataset(out / "train" / (std::string(kDatasetNames[i]) + ".jsonl"), train_sets[i]);
    stats["train"][kDatasetNames[i]] = {{"examples", train_sets[i].size()}, {"truncated", truncated}};
    if (i == 1) continue;  // profiles are not split by chapter
    write_dataset(out / "test" / (std::string(kDatasetNames[i]) + ".jsonl"), test_sets[i]);
    stats["test"][kDatasetNames[i]] = {{"examples", test_sets[i].size()}};
  }

  std::vector<EvalItem> gold_chapters, gold_plots;
  for (const auto& ch : parts.test.corpus.chapters) gold_chapters.push_back({chapter_id(ch.index), ch.body});
  for (const auto& p : parts.test.annotations.plots) gold_plots.push_back({plot_id(p.chapter, p.index), p.summary});
  write_file(out / "test" / "gold_chapters.jsonl", items_jsonl(gold_chapters));
  write_file(out / "test" / "gold_plots.jsonl", items_jsonl(gold_plots));
  write_file(out / "stats.json", stats.dump(2) + "\n");
  run.record_output("datasets", {{"path", out.string()}, {"stats", stats}});
  std::cout << fmt::format("{} train / {} test chapters -> {}\n", spec.train.size(), spec.test.size(), out.string());
}

void cmd_train(const TrainOptions& o, const RunConfig& config, RunDirectory& run) {
  require_dir(o.datasets, "--datasets");
  run.record_input("datasets", o.datasets);
  const Tokenizer tok = load_tokenizer(o.datasets);
  const ModelConfig mc = model_config(config, tok);
  const Ablation ablation = parse_ablation(o.ablation);
  const bool all = o.stage == "all";
  if (!all && o.stage != "base") parse_task(o.stage);  // ConfigError on unknown names
  if (o.stage == "base" && ablation != Ablation::None) throw ConfigError("--ablation does not apply to --stage base");
  if (!all && o.stage != "base" && ablation == Ablation::NoCurriculum)
    throw ConfigError("the no-curriculum ablation trains every stage at once; use --stage all");
  json report = {{"stage", o.stage}, {"ablation", ablation_name(ablation)}, {"stages", json::array()}};

  std::optional<Transformer> model;
  std::string backbone_hash;
  if (!o.backbone.empty()) {
    require_dir(o.backbone, "--backbone");
    run.record_input("backbone", o.backbone);
    LoadedModel lm = load_model(o.backbone);
    if (!(lm.tokenizer == tok)) throw DataError("the backbone's tokenizer differs from the datasets' tokenizer");
    model.emplace(std::move(lm.model));
    backbone_hash = lm.hash;
  } else if (o.stage == "base" || all) {
    model.emplace(mc, config.model_seed);
    auto data = load_stage(o.datasets, "foundation", tok, mc.max_seq_len);
    TrainerOptions topt;
    topt.out_dir = run.path() / "backbone-train";
    StageReport base = train_backbone(*model, data, config.backbone, topt);
    backbone_hash = save_model(run / "backbone", *model, tok);
    report["stages"].push_back(stage_summary(base));
    report["backbone"] = {{"path", (run / "backbone").string()}, {"sha256", backbone_hash}};
    std::cout << fmt::format("backbone: {} steps, final loss {:.4f} -> {}\n", base.steps,
                             base.log.empty() ? 0.0 : base.log.back().loss, (run / "backbone").string());
  } else {
    throw StagingError(fmt::format("stage '{}' needs a trained backbone; pass --backbone", o.stage));
  }

  if (o.stage != "base") {
    std::optional<AdapterSet> adapters;
    if (!o.resume.empty()) {
      require_dir(o.resume, "--resume");
      run.record_input("resume", o.resume);
      const TensorCheckpoint prior = load_tensors(o.resume);
      const std::string lineage_backbone = prior.meta.value("backbone", std::string());
      if (lineage_backbone != backbone_hash)
        throw StagingError(fmt::format("checkpoint '{}' was trained on a different backbone", o.resume.string()));
      adapters.emplace(AdapterSet::load(o.resume, *model));
    } else {
      AdapterSpec spec = config.adapter;
      if (ablation == Ablation::SingleLoRA) spec.mode = AdapterMode::PlainLoRA;
      adapters.emplace(AdapterSet::attach(*model, spec, config.adapter_seed));
    }
    TrainerOptions topt;
    topt.out_dir = run.path();
    topt.ablation = ablation;
    topt.checkpoint_meta = {{"backbone", backbone_hash}};
    CurriculumTrainer trainer(*model, *adapters, topt);
    if (all) {
      StagePlan plan;
      plan.config = config.train;
      for (std::size_t i = 0; i < 4; ++i) {
        StagePlanEntry e;
        e.stage = kCurriculum[i];
        e.data = load_stage(o.datasets, kDatasetNames[i], tok, mc.max_seq_len);
        e.config = config.stage_config(kCurriculum[i]);
        plan.stages.push_back(std::move(e));
      }
      for (const auto& s : trainer.run_curriculum(plan).stages) report["stages"].push_back(stage_summary(s));
    } else {
      const TaskId stage = parse_task(o.stage);
      const std::size_t i = static_cast<std::size_t>(
          std::find(kCurriculum.begin(), kCurriculum.end(), stage) - kCurriculum.begin());
      auto data = load_stage(o.datasets, kDatasetNames[i], tok, mc.max_seq_len);
      report["stages"].push_back(stage_summary(trainer.run_stage(stage, data, config.stage_config(stage))));
    }
  }
  write_file(run / "train_report.json", report.dump(2) + "\n");
  run.record_output("train", report);
  for (const auto& s : report["stages"])
    std::cout << fmt::format("{:<10} {:>6} steps  final loss {}\n", s["stage"].get<std::string>(),
                             s["steps"].get<std::size_t>(), s["final_loss"].dump());
}

void cmd_generate(const GenerateOptions& o, const RunConfig& config, RunDirectory& run) {
  require_dir(o.backbone, "--backbone");
  require_dir(o.adapters, "--adapters");
  require_dir(o.datasets, "--datasets");
  run.record_input("backbone", o.backbone);
  run.record_input("adapters", o.adapters);
  run.record_input("datasets", o.datasets);

  LoadedModel lm = load_model(o.backbone);
  const TensorCheckpoint ckpt = load_tensors(o.adapters);
  if (ckpt.meta.value("backbone", std::string()) != lm.hash)
    throw StagingError("the adapter checkpoint was trained on a different backbone");
  AdapterSet adapters = AdapterSet::load(o.adapters, lm.model);
  const auto& done = adapters.completed();
  if (std::find(done.begin(), done.end(), TaskId::Writing) == done.end())
    throw StagingError("generation needs a checkpoint whose lineage includes the writing stage");

  const LoadedCorpus data = load_dir(o.datasets / "corpus");
  require_file(o.datasets / "split.json", "split.json");
  const SplitSpec spec = json::parse(read_file(o.datasets / "split.json")).get<SplitSpec>();
  const CorpusSplit test_split = split(data.corpus, data.annotations, spec);
  const CorpusPart& test = test_split.test;
  const std::vector<PlotUnit>& all_plots = data.annotations.plots;

  json chapters = json::array(), plots = json::array();
  std::size_t done_chapters = 0;
  for (const auto& ch : test.corpus.chapters) {
    if (o.limit && done_chapters == o.limit) break;
    std::vector<std::string> seed;
    std::vector<std::size_t> gold;  // plot indices within the chapter
    for (const auto& p : all_plots) {
      if (p.chapter == ch.index) gold.push_back(p.index);
      if (p.chapter < ch.index) seed.push_back(p.summary);
    }
    if (gold.empty()) continue;
    const std::size_t keep = std::min(seed.size(), config.generation.plot_window);
    seed.erase(seed.begin(), seed.end() - static_cast<std::ptrdiff_t>(keep));

    GenerationConfig g = config.generation;
    g.n_plots = gold.size();
    g.seed = config.generation.seed + ch.index;
    const StoryPlan plan = plan_story(lm.model, lm.tokenizer, seed, g);
    const GeneratedChapter story = write_story(lm.model, lm.tokenizer, plan, g);
    chapters.push_back({{"id", chapter_id(ch.index)},
                        {"plan", plan},
                        {"segments", story.segments},
                        {"hit_eos", story.hit_eos},
                        {"text", story.text}});
    for (std::size_t i = 0; i < plan.plots.size(); ++i)
      plots.push_back({{"id", plot_id(ch.index, gold[i])}, {"text", plan.plots[i]}});
    ++done_chapters;
    spdlog::info("generated chapter {} ({} segments)", ch.index, story.segments.size());
  }
  const json doc = {{"chapters", chapters},
                    {"plots", plots},
                    {"provenance",
                     {{"backbone_sha256", lm.hash},
                      {"adapters_sha256", ckpt.blob_sha256},
                      {"lineage", ckpt.meta.value("lineage", json::array())},
                      {"generation", config.generation}}}};
  write_file(run / "story.json", doc.dump(2) + "\n");
  run.record_output("story", {{"path", (run / "story.json").string()}, {"chapters", done_chapters}});
  std::cout << fmt::format("generated {} chapters -> {}\n", done_chapters, (run / "story.json").string());
}

void cmd_evaluate(const EvaluateOptions& o, const RunConfig& config, RunDirectory& run) {
  require_file(o.stories, "--stories");
  if (o.gold.empty()) throw ConfigError("--gold is required");
  run.record_input("stories", o.stories);
  const EvalMode mode = o.mode ? parse_eval_mode(*o.mode) : config.eval.mode;

  fs::path gold = o.gold;
  if (fs::is_directory(gold))
    gold = gold / "test" / (mode == EvalMode::PlotPlanning ? "gold_plots.jsonl" : "gold_chapters.jsonl");
  require_file(gold, "--gold");
  run.record_input("gold", gold);

  json stories;
  try {
    stories = json::parse(read_file(o.stories));
  } catch (const json::exception& e) {
    throw IngestionError(fmt::format("{}: {}", o.stories.string(), e.what()));
  }
  std::vector<EvalItem> candidates;
  for (const auto& it : stories.at(mode == EvalMode::PlotPlanning ? "plots" : "chapters"))
    candidates.push_back({it.at("id").get<std::string>(), it.at("text").get<std::string>()});
  const std::vector<EvalItem> references = read_items_jsonl(gold);

  EvalOptions opt;
  opt.mode = mode;
  opt.token_mode = config.eval.token_mode;
  std::unique_ptr<ChatClient> client;
  if (o.judge || config.eval.judge) {
    client = env_client("JUDGE", config.judge.model, run / "judge_audit.jsonl");
    if (!client) throw ConfigError("judge scoring needs JUDGE_API_URL in the environment");
    opt.judge = config.judge;
  } else if (mode == EvalMode::PlotPlanning) {
    spdlog::warn("plot-planning mode is scored by the judge alone; without --judge the report holds no metrics");
  }
  const json provenance = {{"stories_sha256", content_hashes(o.stories)},
                           {"gold_sha256", content_hashes(gold)},
                           {"generation", stories.value("provenance", json::object())},
                           {"eval", {{"mode", eval_mode_name(mode)}, {"token_mode", token_mode_name(opt.token_mode)}}},
                           {"judge", opt.judge ? json(*opt.judge) : json()}};
  const EvalReport report = evaluate_run(candidates, references, opt, client.get(), provenance);
  write_file(run / "report.json", json(report).dump(2) + "\n");
  write_file(run / "report.txt", report.table());
  run.record_output("report", {{"path", (run / "report.json").string()}, {"means", report.means}});
  std::cout << report.table();
}

void cmd_experiment(const ExperimentOptions& o, RunDirectory& run) {
  const ExperimentConfig config = ExperimentConfig::defaults();
  const AblationConfig ablation = AblationConfig::defaults();
  run.record_output("experiment_config", config);
  const SyntheticSetup setup = prepare_synthetic(config);
  StageReport base;
  const Transformer backbone = train_synthetic_backbone(setup, config, &base);
  json results = {{"backbone", {{"steps", base.steps}, {"final_loss", base.log.empty() ? 0.0 : base.log.back().loss}}}};
  if (!o.skip_curriculum) {
    const CurriculumMetrics m = run_synthetic_curriculum(backbone, setup, config);
    results["curriculum"] = m;
    std::cout << fmt::format(
        "foundation held-out loss {:.3f} -> {:.3f} (ln|V| {:.3f}); traits {}/{}; events {}/{}; markers {}/{}\n",
        m.foundation_before, m.foundation_after(), m.ln_vocab, m.traits.hits, m.traits.total, m.events.hits,
        m.events.total, m.markers.hits, m.markers.total);
  }
  if (o.ablation) {
    const auto rows = run_synthetic_ablation(backbone, setup, config, ablation);
    results["ablation"] = rows;
    for (const auto& r : rows)
      std::cout << fmt::format("seed {}: plot loss curriculum {:.4f} vs joint {:.4f}; combined writer {:.4f} vs single {:.4f}\n",
                               r.seed, r.plot_curriculum, r.plot_no_curriculum, r.combined_writer, r.combined_single);
  }
  write_file(run / "metrics.json", results.dump(2) + "\n");
}

}  // namespace wlab::cli
