// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/adapter/lora.hpp"
#include "wlab/corpus/split.hpp"
#include "wlab/corpus/synth.hpp"
#include "wlab/model/config.hpp"
#include "wlab/model/tokenizer.hpp"
#include "wlab/model/transformer.hpp"
#include "wlab/train/trainer.hpp"

namespace wlab {

/// The desk-scale curriculum experiment on synthetic corpora.
///
/// A backbone is first trained on a corpus generated with a different seed,
/// so it knows the templates but none of the target's names, traits, chain
/// order or marker assignment. The adapter stages must then learn those.
struct ExperimentConfig {
  std::uint64_t corpus_seed = 7;
  std::uint64_t backbone_corpus_seed = 1007;
  std::string size = "small";
  std::size_t train_chapters = 80;
  std::uint64_t model_seed = 1;
  std::uint64_t adapter_seed = 3;
  ModelConfig model;
  TrainConfig backbone;
  TrainConfig stage;
  TrainConfig world;  // the profile set is tiny, so it gets its own epochs and rate
  AdapterSpec adapters;
  std::size_t foundation_window = 128;
  std::size_t heldout_items = 100;
  std::size_t plot_probes = 120;
  std::size_t writing_probes = 60;

  /// Calibrated settings: fits in a few minutes on one core.
  static ExperimentConfig defaults();
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct SyntheticSetup {
  SynthCorpus target;
  SynthCorpus backbone_corpus;
  Tokenizer tokenizer;
  CorpusSplit parts;
};

SyntheticSetup prepare_synthetic(const ExperimentConfig& config);

/// Foundation windows plus all three task datasets of the backbone corpus.
std::vector<TrainExample> backbone_examples(const SyntheticSetup& setup,
                                            const ExperimentConfig& config);
Transformer train_synthetic_backbone(const SyntheticSetup& setup, const ExperimentConfig& config,
                                     StageReport* report = nullptr);
/// Independent copy of a model's parameters, without adapters.
Transformer clone_backbone(const Transformer& model);

struct StageData {
  std::vector<TrainExample> foundation, world, plot, writing;
};

StageData train_stage_data(const SyntheticSetup& setup, const ExperimentConfig& config);
/// Evenly spaced test-chapter examples; world has no held-out names and
/// reuses the profile set.
StageData heldout_stage_data(const SyntheticSetup& setup, const ExperimentConfig& config);

struct ProbeResult {
  std::size_t hits = 0;
  std::size_t total = 0;
  double rate() const { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
};

void to_json(nlohmann::json& j, const ProbeResult& p);

/// Greedy profile for every trained name; hit when it names the planted trait.
ProbeResult probe_traits(const Transformer& model, const SyntheticSetup& setup);
/// Teacher-seeded next-plot prediction on test windows; hit when the predicted
/// event is the planted successor of the last context event.
ProbeResult probe_events(const Transformer& model, const SyntheticSetup& setup,
                         std::size_t probes);
/// Greedy passage for test summaries; hit when it carries the event's marker.
ProbeResult probe_markers(const Transformer& model, const SyntheticSetup& setup,
                          std::size_t probes);

struct CurriculumMetrics {
  double ln_vocab = 0.0;
  double foundation_before = 0.0;
  std::vector<double> foundation_epochs;  // held-out loss after each epoch
  ProbeResult traits, events, markers;
  std::vector<StageReport> stages;
  double seconds = 0.0;

  double foundation_after() const {
    return foundation_epochs.empty() ? foundation_before : foundation_epochs.back();
  }
};

void to_json(nlohmann::json& j, const CurriculumMetrics& m);

/// Runs Foundation → World → Plot → Writing on a copy of `backbone`, probing
/// each downstream stage right after it trains.
CurriculumMetrics run_synthetic_curriculum(const Transformer& backbone,
                                           const SyntheticSetup& setup,
                                           const ExperimentConfig& config);

struct AblationConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::size_t examples_per_stage = 200;  // world keeps all profiles
  TrainConfig train;

  static AblationConfig defaults();
};

struct AblationSeedResult {
  std::uint64_t seed = 0;
  double plot_curriculum = 0.0;
  double plot_no_curriculum = 0.0;
  double combined_writer = 0.0;  // mean held-out loss over world, plot and writing
  double combined_single = 0.0;
  std::size_t steps = 0;  // per variant; equal across variants
};

void to_json(nlohmann::json& j, const AblationSeedResult& r);

/// Curriculum WriterLoRA, NoCurriculum and SingleLoRA with equal step budgets.
std::vector<AblationSeedResult> run_synthetic_ablation(const Transformer& backbone,
                                                       const SyntheticSetup& setup,
                                                       const ExperimentConfig& config,
                                                       const AblationConfig& ablation);

}  // namespace wlab
