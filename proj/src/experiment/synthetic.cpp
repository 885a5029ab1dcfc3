// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/experiment/synthetic.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wlab/corpus/datasets.hpp"
#include "wlab/generate/generation.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

template <typename T>
std::vector<T> evenly_spaced(const std::vector<T>& items, std::size_t count) {
  if (count == 0 || count >= items.size()) return items;
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(items[i * items.size() / count]);
  return out;
}

std::vector<std::string> split_context(const std::string& joined) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = joined.find(kSepChar, start);
    out.push_back(joined.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

GenerationConfig greedy() {
  GenerationConfig g;
  g.temperature = 0.0;
  g.top_k = 1;
  return g;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.backbone.peak_lr = 5e-3;
  c.backbone.warmup_ratio = 0.05;
  c.backbone.epochs_per_stage = 2;
  c.backbone.grad_accum_steps = 2;
  c.backbone.weight_decay = 0.0;
  c.backbone.max_grad_norm = 1.0;
  c.backbone.max_samples_per_stage = 0;
  c.backbone.seed = 1;

  c.stage.peak_lr = 5e-3;
  c.stage.epochs_per_stage = 3;
  c.stage.grad_accum_steps = 2;
  c.stage.weight_decay = 0.0;
  c.stage.max_grad_norm = 1.0;
  c.stage.seed = 1;

  c.world = c.stage;
  c.world.peak_lr = 1e-2;
  c.world.epochs_per_stage = 150;

  c.adapters.rank = 8;
  c.adapters.dropout_p = 0.0;
  for (std::size_t i = 0; i < c.model.n_layers; ++i)
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo", "mlp.w1", "mlp.w2"})
      c.adapters.target_matrices.push_back(fmt::format("blocks.{}.{}", i, w));
  return c;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"corpus_seed", c.corpus_seed},   {"backbone_corpus_seed", c.backbone_corpus_seed},
       {"size", c.size},                 {"train_chapters", c.train_chapters},
       {"model_seed", c.model_seed},     {"adapter_seed", c.adapter_seed},
       {"model", c.model},               {"backbone", c.backbone},
       {"stage", c.stage},               {"world", c.world},
       {"adapters", c.adapters},         {"foundation_window", c.foundation_window},
       {"heldout_items", c.heldout_items}, {"plot_probes", c.plot_probes},
       {"writing_probes", c.writing_probes}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig::defaults();
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("corpus_seed", c.corpus_seed);
  get("backbone_corpus_seed", c.backbone_corpus_seed);
  get("size", c.size);
  get("train_chapters", c.train_chapters);
  get("model_seed", c.model_seed);
  get("adapter_seed", c.adapter_seed);
  get("model", c.model);
  get("backbone", c.backbone);
  get("stage", c.stage);
  get("world", c.world);
  get("adapters", c.adapters);
  get("foundation_window", c.foundation_window);
  get("heldout_items", c.heldout_items);
  get("plot_probes", c.plot_probes);
  get("writing_probes", c.writing_probes);
}

SyntheticSetup prepare_synthetic(const ExperimentConfig& config) {
  SyntheticSetup s;
  s.target = generate_synthetic(SynthConfig::preset(config.size, config.corpus_seed));
  s.backbone_corpus = generate_synthetic(SynthConfig::preset(config.size, config.backbone_corpus_seed));
  s.tokenizer = Tokenizer::build(
      serialize_corpus(s.target.data.corpus) + serialize_profiles(s.target.data.annotations.profiles) +
      serialize_corpus(s.backbone_corpus.data.corpus) +
      serialize_profiles(s.backbone_corpus.data.annotations.profiles) + template_text());
  const std::size_t n = s.target.data.corpus.chapters.size();
  if (config.train_chapters == 0 || config.train_chapters >= n)
    throw ConfigError(fmt::format("train_chapters must lie in [1, {})", n));
  s.parts = split(s.target.data.corpus, s.target.data.annotations,
                  SplitSpec::leading(config.train_chapters, n));
  return s;
}

std::vector<TrainExample> backbone_examples(const SyntheticSetup& setup,
                                            const ExperimentConfig& config) {
  const auto& base = setup.backbone_corpus.data;
  auto examples = build_foundation_dataset(base.corpus, config.foundation_window, config.foundation_window);
  for (auto&& e : build_world_dataset(base.annotations.profiles)) examples.push_back(std::move(e));
  for (auto&& e : build_plot_dataset(base.annotations.plots)) examples.push_back(std::move(e));
  for (auto&& e : build_writing_dataset(base.annotations.plots, base.corpus))
    examples.push_back(std::move(e));
  return encode_examples(examples, setup.tokenizer, config.model.max_seq_len);
}

Transformer train_synthetic_backbone(const SyntheticSetup& setup, const ExperimentConfig& config,
                                     StageReport* report) {
  ModelConfig mc = config.model;
  mc.vocab_size = setup.tokenizer.vocab_size();
  Transformer model(mc, config.model_seed);
  auto r = train_backbone(model, backbone_examples(setup, config), config.backbone);
  if (report) *report = std::move(r);
  return model;
}

Transformer clone_backbone(const Transformer& model) {
  Transformer copy(model.config(), model.parameters());
  copy.set_backbone_trainable(false);
  for (auto& [name, t] : copy.parameters()) t.clear_grad();
  return copy;
}

StageData train_stage_data(const SyntheticSetup& setup, const ExperimentConfig& config) {
  const auto& part = setup.parts.train;
  const auto& tok = setup.tokenizer;
  const std::size_t len = config.model.max_seq_len;
  StageData d;
  d.foundation = encode_examples(
      build_foundation_dataset(part.corpus, config.foundation_window, config.foundation_window), tok, len);
  d.world = encode_examples(build_world_dataset(part.annotations.profiles), tok, len);
  d.plot = encode_examples(build_plot_dataset(part.annotations.plots), tok, len);
  d.writing = encode_examples(build_writing_dataset(part.annotations.plots, part.corpus), tok, len);
  return d;
}

StageData heldout_stage_data(const SyntheticSetup& setup, const ExperimentConfig& config) {
  const auto& part = setup.parts.test;
  const auto& tok = setup.tokenizer;
  const std::size_t len = config.model.max_seq_len;
  const std::size_t k = config.heldout_items;
  StageData d;
  d.foundation = encode_examples(
      evenly_spaced(build_foundation_dataset(part.corpus, config.foundation_window, config.foundation_window), k),
      tok, len);
  d.world = encode_examples(build_world_dataset(setup.parts.train.annotations.profiles), tok, len);
  d.plot = encode_examples(evenly_spaced(build_plot_dataset(part.annotations.plots), k), tok, len);
  d.writing = encode_examples(
      evenly_spaced(build_writing_dataset(part.annotations.plots, part.corpus), k), tok, len);
  return d;
}

void to_json(nlohmann::json& j, const ProbeResult& p) {
  j = {{"hits", p.hits}, {"total", p.total}, {"rate", p.rate()}};
}

ProbeResult probe_traits(const Transformer& model, const SyntheticSetup& setup) {
  const auto& tok = setup.tokenizer;
  ProbeResult r;
  Rng rng(0);
  for (const auto& profile : setup.parts.train.annotations.profiles) {
    auto prompt = prompt_tokens(TaskId::World, kWorldInstruction, profile.name, tok);
    const std::size_t room = model.config().max_seq_len - prompt.size();
    auto out = decode_continuation(model, prompt, TaskId::World, std::min<std::size_t>(room, 160),
                                   greedy().sampling(), rng, tok);
    r.hits += contains_word(out.text, setup.target.truth.traits.at(profile.name));
    ++r.total;
  }
  return r;
}

ProbeResult probe_events(const Transformer& model, const SyntheticSetup& setup,
                         std::size_t probes) {
  const auto& truth = setup.target.truth;
  auto windows = evenly_spaced(build_plot_dataset(setup.parts.test.annotations.plots), probes);
  ProbeResult r;
  Rng rng(0);
  const GenerationConfig g = greedy();
  for (const auto& ex : windows) {
    auto context = split_context(ex.input);
    const std::string last = SynthTruth::event_of(context.back());
    const std::string predicted = SynthTruth::event_of(predict_next_plot(model, setup.tokenizer, context, g, rng));
    r.hits += !predicted.empty() && predicted == truth.successor.at(last);
    ++r.total;
  }
  return r;
}

ProbeResult probe_markers(const Transformer& model, const SyntheticSetup& setup,
                          std::size_t probes) {
  const auto& test = setup.parts.test;
  const auto& truth = setup.target.truth;
  auto items = evenly_spaced(test.annotations.plots, probes);
  ProbeResult r;
  Rng rng(0);
  GenerationConfig g = greedy();
  double mean = 0.0;
  for (const auto& p : test.annotations.plots) mean += static_cast<double>(p.end - p.start);
  mean /= static_cast<double>(test.annotations.plots.size());
  g.max_new_tokens = writing_token_cap(mean);
  for (const auto& p : items) {
    auto out = write_segment(model, setup.tokenizer, p.summary, g, rng);
    r.hits += contains_word(out.text, truth.markers.at(SynthTruth::event_of(p.summary)));
    ++r.total;
  }
  return r;
}

void to_json(nlohmann::json& j, const CurriculumMetrics& m) {
  j = {{"ln_vocab", m.ln_vocab},
       {"foundation_before", m.foundation_before},
       {"foundation_epochs", m.foundation_epochs},
       {"traits", m.traits},
       {"events", m.events},
       {"markers", m.markers},
       {"seconds", m.seconds}};
  auto& stages = j["stages"] = nlohmann::json::array();
  for (const auto& s : m.stages)
    stages.push_back({{"stage", s.stage}, {"examples", s.examples}, {"steps", s.steps},
                      {"final_loss", s.log.empty() ? 0.0 : s.log.back().loss}});
}

CurriculumMetrics run_synthetic_curriculum(const Transformer& backbone,
                                           const SyntheticSetup& setup,
                                           const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Transformer model = clone_backbone(backbone);
  const StageData train = train_stage_data(setup, config);
  const StageData heldout = heldout_stage_data(setup, config);
  AdapterSet adapters = AdapterSet::attach(model, config.adapters, config.adapter_seed);

  CurriculumMetrics m;
  m.ln_vocab = std::log(static_cast<double>(setup.tokenizer.vocab_size()));
  m.foundation_before = heldout_loss(model, heldout.foundation);

  const TrainConfig& fc = config.stage;
  std::size_t selected = train.foundation.size();
  if (fc.max_samples_per_stage > 0) selected = std::min(selected, fc.max_samples_per_stage);
  const std::size_t per_step = fc.examples_per_step();
  const std::size_t steps_per_epoch = (selected + per_step - 1) / per_step;

  TrainerOptions options;
  bool in_foundation = true;
  options.on_step = [&](const StepRecord& rec) {
    if (in_foundation && (rec.step + 1) % steps_per_epoch == 0)
      m.foundation_epochs.push_back(heldout_loss(model, heldout.foundation));
  };
  CurriculumTrainer trainer(model, adapters, options);
  m.stages.push_back(trainer.run_stage(TaskId::Foundation, train.foundation, fc));
  in_foundation = false;
  spdlog::info("foundation held-out loss {:.4f} -> {:.4f}", m.foundation_before, m.foundation_after());

  m.stages.push_back(trainer.run_stage(TaskId::World, train.world, config.world));
  m.traits = probe_traits(model, setup);
  spdlog::info("trait probe {}/{}", m.traits.hits, m.traits.total);

  m.stages.push_back(trainer.run_stage(TaskId::Plot, train.plot, config.stage));
  m.events = probe_events(model, setup, config.plot_probes);
  spdlog::info("event probe {}/{}", m.events.hits, m.events.total);

  m.stages.push_back(trainer.run_stage(TaskId::Writing, train.writing, config.stage));
  m.markers = probe_markers(model, setup, config.writing_probes);
  spdlog::info("marker probe {}/{}", m.markers.hits, m.markers.total);
  m.seconds = elapsed(start);
  return m;
}

AblationConfig AblationConfig::defaults() {
  AblationConfig a;
  a.train = ExperimentConfig::defaults().stage;
  a.train.epochs_per_stage = 2;
  a.train.max_samples_per_stage = 0;
  return a;
}

void to_json(nlohmann::json& j, const AblationSeedResult& r) {
  j = {{"seed", r.seed},
       {"plot_curriculum", r.plot_curriculum},
       {"plot_no_curriculum", r.plot_no_curriculum},
       {"combined_writer", r.combined_writer},
       {"combined_single", r.combined_single},
       {"steps", r.steps}};
}

std::vector<AblationSeedResult> run_synthetic_ablation(const Transformer& backbone,
                                                       const SyntheticSetup& setup,
                                                       const ExperimentConfig& config,
                                                       const AblationConfig& ablation) {
  StageData full = train_stage_data(setup, config);
  const StageData heldout = heldout_stage_data(setup, config);
  // One fixed subset per stage, a whole number of optimizer steps each, so
  // every variant runs exactly the same number of steps.
  const std::size_t per_step = ablation.train.examples_per_step();
  const std::size_t n = ablation.examples_per_stage / per_step * per_step;
  Rng pick(config.corpus_seed);
  for (auto* set : {&full.foundation, &full.plot, &full.writing}) {
    pick.shuffle(*set);
    if (set->size() > n) set->resize(n);
  }
  if (full.world.size() % per_step) full.world.resize(full.world.size() / per_step * per_step);

  auto plan_for = [&](std::uint64_t seed) {
    StagePlan plan;
    plan.config = ablation.train;
    plan.config.seed = seed;
    plan.stages = {{TaskId::Foundation, full.foundation, std::nullopt},
                   {TaskId::World, full.world, std::nullopt},
                   {TaskId::Plot, full.plot, std::nullopt},
                   {TaskId::Writing, full.writing, std::nullopt}};
    return plan;
  };
  auto combined = [&](Transformer& model) {
    return (heldout_loss(model, heldout.world) + heldout_loss(model, heldout.plot) +
            heldout_loss(model, heldout.writing)) / 3.0;
  };
  auto total_steps = [](const CurriculumReport& r) {
    std::size_t s = 0;
    for (const auto& st : r.stages) s += st.steps;
    return s;
  };

  std::vector<AblationSeedResult> results;
  for (std::uint64_t seed : ablation.seeds) {
    AblationSeedResult r;
    r.seed = seed;
    const StagePlan plan = plan_for(seed);
    AdapterSpec writer = config.adapters;
    writer.mode = AdapterMode::WriterLoRA;
    AdapterSpec single = config.adapters;
    single.mode = AdapterMode::PlainLoRA;

    {
      Transformer model = clone_backbone(backbone);
      AdapterSet adapters = AdapterSet::attach(model, writer, seed);
      CurriculumTrainer trainer(model, adapters, {});
      r.steps = total_steps(trainer.run_curriculum(plan));
      r.plot_curriculum = heldout_loss(model, heldout.plot);
      r.combined_writer = combined(model);
    }
    {
      Transformer model = clone_backbone(backbone);
      AdapterSet adapters = AdapterSet::attach(model, writer, seed);
      TrainerOptions options;
      options.ablation = Ablation::NoCurriculum;
      CurriculumTrainer trainer(model, adapters, options);
      const std::size_t steps = total_steps(trainer.run_curriculum(plan));
      if (steps != r.steps)
        throw ContractError(fmt::format("step budgets differ: {} vs {}", steps, r.steps));
      r.plot_no_curriculum = heldout_loss(model, heldout.plot);
    }
    {
      Transformer model = clone_backbone(backbone);
      AdapterSet adapters = AdapterSet::attach(model, single, seed);
      TrainerOptions options;
      options.ablation = Ablation::SingleLoRA;
      CurriculumTrainer trainer(model, adapters, options);
      const std::size_t steps = total_steps(trainer.run_curriculum(plan));
      if (steps != r.steps)
        throw ContractError(fmt::format("step budgets differ: {} vs {}", steps, r.steps));
      r.combined_single = combined(model);
    }
    spdlog::info("ablation seed {}: plot {:.4f} vs {:.4f}, combined {:.4f} vs {:.4f}", seed,
                 r.plot_curriculum, r.plot_no_curriculum, r.combined_writer, r.combined_single);
    results.push_back(r);
  }
  return results;
}

}  // namespace wlab
