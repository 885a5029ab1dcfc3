// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "run_config.hpp"
#include "run_dir.hpp"

namespace wlab::cli {

namespace fs = std::filesystem;

struct SynthOptions {
  std::uint64_t seed = 7;
  std::string size = "small";
};

struct IngestOptions {
  fs::path from;  // directory holding corpus.txt, plots.jsonl, profiles.jsonl
  fs::path corpus, plots, profiles;
  bool segment = false;
};

struct BuildOptions {
  fs::path data;
};

struct TrainOptions {
  fs::path datasets;
  std::string stage = "all";
  std::string ablation = "none";
  fs::path backbone;
  fs::path resume;
};

struct GenerateOptions {
  fs::path backbone;
  fs::path adapters;
  fs::path datasets;
  std::size_t limit = 0;
};

struct EvaluateOptions {
  fs::path stories;
  fs::path gold;
  std::optional<std::string> mode;
  bool judge = false;
};

struct ExperimentOptions {
  bool ablation = false;
  bool skip_curriculum = false;
};

void cmd_synth(const SynthOptions& o, RunDirectory& run);
void cmd_ingest(const IngestOptions& o, RunDirectory& run);
void cmd_build_datasets(const BuildOptions& o, const RunConfig& config, RunDirectory& run);
void cmd_train(const TrainOptions& o, const RunConfig& config, RunDirectory& run);
void cmd_generate(const GenerateOptions& o, const RunConfig& config, RunDirectory& run);
void cmd_evaluate(const EvaluateOptions& o, const RunConfig& config, RunDirectory& run);
void cmd_experiment(const ExperimentOptions& o, RunDirectory& run);

}  // namespace wlab::cli
