// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "app.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "wlab/util/error.hpp"

namespace wlab::cli {
namespace {

using nlohmann::json;

struct Invocation {
  fs::path config_file;
  std::vector<std::string> overrides;
  fs::path runs_root = "runs";
  fs::path out;
  std::string log_level = "info";
  bool show_defaults = false;

  SynthOptions synth;
  IngestOptions ingest;
  BuildOptions build;
  TrainOptions train;
  GenerateOptions generate;
  EvaluateOptions evaluate;
  std::string eval_mode;
  ExperimentOptions experiment;
};

void add_run_options(CLI::App& sub, Invocation& inv) {
  sub.add_option("--config", inv.config_file, "JSON run configuration; flags override it");
  sub.add_option("--set", inv.overrides, "Override one setting, e.g. --set train.peak_lr=1e-3 (repeatable)");
  sub.add_option("--runs", inv.runs_root, "Root under which timestamped run directories are created")
      ->capture_default_str();
  sub.add_option("--out", inv.out, "Exact run directory to write instead of a timestamped one");
  sub.add_option("--log-level", inv.log_level, "trace, debug, info, warn or error")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));
}

std::unique_ptr<CLI::App> build(Invocation& inv) {
  auto app = std::make_unique<CLI::App>("WriterLoRA lab: corpus preparation, curriculum training, generation and evaluation",
                                        "wlab");
  app->set_version_flag("--version", std::string("wlab ") + WLAB_VERSION);
  app->require_subcommand(1);

  auto* synth = app->add_subcommand("synth", "Generate the deterministic synthetic toy corpus");
  synth->add_option("--seed", inv.synth.seed, "Generator seed")->capture_default_str();
  synth->add_option("--size", inv.synth.size, "tiny, small (about 200 KB) or medium")
      ->capture_default_str()
      ->check(CLI::IsMember({"tiny", "small", "medium"}));
  add_run_options(*synth, inv);

  auto* ingest = app->add_subcommand("ingest", "Validate a corpus with its plot and profile sidecars");
  ingest->add_option("--from", inv.ingest.from, "Directory holding corpus.txt, plots.jsonl and profiles.jsonl");
  ingest->add_option("--corpus", inv.ingest.corpus, "Corpus text with chapter headings");
  ingest->add_option("--plots", inv.ingest.plots, "Plot-unit sidecar (JSONL)");
  ingest->add_option("--profiles", inv.ingest.profiles, "Character-profile sidecar (JSONL)");
  ingest->add_flag("--segment", inv.ingest.segment,
                   "Derive plot units with the segmenter service (SEGMENTER_API_URL / SEGMENTER_API_KEY)");
  add_run_options(*ingest, inv);

  auto* build_ds = app->add_subcommand("build-datasets", "Split chapters and build the four task datasets");
  build_ds->add_option("--data", inv.build.data, "Validated dataset directory from ingest")->required();
  add_run_options(*build_ds, inv);

  auto* train = app->add_subcommand("train", "Train the backbone, one curriculum stage, or everything");
  train->add_option("--datasets", inv.train.datasets, "Directory from build-datasets")->required();
  train->add_option("--stage", inv.train.stage, "base, foundation, world, plot, writing or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"base", "foundation", "world", "plot", "writing", "all"}));
  train->add_option("--ablation", inv.train.ablation, "none, no-curriculum, single-lora or unfreeze-a")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "no-curriculum", "single-lora", "unfreeze-a"}));
  train->add_option("--backbone", inv.train.backbone, "Trained backbone directory; stage all trains one if omitted");
  train->add_option("--resume", inv.train.resume, "Adapter checkpoint of the previous stage");
  add_run_options(*train, inv);

  auto* gen = app->add_subcommand("generate", "Plan and write one story per test chapter");
  gen->add_option("--backbone", inv.generate.backbone, "Backbone directory")->required();
  gen->add_option("--adapters", inv.generate.adapters, "Adapter checkpoint that finished the writing stage")
      ->required();
  gen->add_option("--datasets", inv.generate.datasets, "Directory from build-datasets")->required();
  gen->add_option("--limit", inv.generate.limit, "Generate at most this many chapters (0: all)")
      ->capture_default_str();
  add_run_options(*gen, inv);

  auto* ev = app->add_subcommand("evaluate", "Score generated stories against the gold test set");
  ev->add_option("--stories", inv.evaluate.stories, "story.json from generate")->required();
  ev->add_option("--gold", inv.evaluate.gold, "Datasets directory or a JSONL file of {id, text}")->required();
  ev->add_option("--mode", inv.eval_mode, "writing or plot (overrides eval.mode)")
      ->check(CLI::IsMember({"writing", "plot"}));
  ev->add_flag("--judge", inv.evaluate.judge, "Also score the six aspects with the judge (JUDGE_API_URL / JUDGE_API_KEY)");
  add_run_options(*ev, inv);

  auto* exp = app->add_subcommand("experiment", "Run the calibrated synthetic curriculum experiment");
  exp->add_flag("--ablation", inv.experiment.ablation, "Also run the five-seed ablation comparison");
  exp->add_flag("--skip-curriculum", inv.experiment.skip_curriculum, "Skip the curriculum probes");
  add_run_options(*exp, inv);

  auto* cfg = app->add_subcommand("config", "Print the resolved configuration and exit");
  cfg->add_option("--config", inv.config_file, "JSON run configuration");
  cfg->add_option("--set", inv.overrides, "Override one setting (repeatable)");
  cfg->add_flag("--defaults", inv.show_defaults, "Print the defaults, which are also the schema");

  return app;
}

json error_json(const char* kind, const std::string& message, int code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

void setup_logging(const std::string& level, const fs::path& log_file) {
  std::vector<spdlog::sink_ptr> sinks{std::make_shared<spdlog::sinks::stderr_color_sink_mt>()};
  if (!log_file.empty()) sinks.push_back(std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_file.string(), true));
  auto logger = std::make_shared<spdlog::logger>("wlab", sinks.begin(), sinks.end());
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

}  // namespace

std::unique_ptr<CLI::App> make_parser() {
  static Invocation scratch;
  return build(scratch);
}

int run(const std::vector<std::string>& args) {
  Invocation inv;
  auto app = build(inv);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  CLI::App* sub = app->get_subcommands().front();
  const std::string command = sub->get_name();

  std::optional<RunDirectory> run_dir;
  int code = kExitOk;
  json error;
  try {
    if (!inv.eval_mode.empty()) inv.evaluate.mode = inv.eval_mode;
    if (command == "config") {
      std::cout << (inv.show_defaults ? default_config_json() : json(resolve_config(inv.config_file, inv.overrides)))
                       .dump(2)
                << "\n";
      return kExitOk;
    }
    const RunConfig config = resolve_config(inv.config_file, inv.overrides);
    run_dir = RunDirectory::create(inv.runs_root, inv.out, command);
    setup_logging(inv.log_level, run_dir->path() / "log.txt");
    run_dir->record_config(config);
    run_dir->record_args(args);
    if (!inv.config_file.empty()) run_dir->record_input("config", inv.config_file);

    if (command == "synth") cmd_synth(inv.synth, *run_dir);
    else if (command == "ingest") cmd_ingest(inv.ingest, *run_dir);
    else if (command == "build-datasets") cmd_build_datasets(inv.build, config, *run_dir);
    else if (command == "train") cmd_train(inv.train, config, *run_dir);
    else if (command == "generate") cmd_generate(inv.generate, config, *run_dir);
    else if (command == "evaluate") cmd_evaluate(inv.evaluate, config, *run_dir);
    else if (command == "experiment") cmd_experiment(inv.experiment, *run_dir);
  } catch (const ConfigError& e) {
    code = kExitUsage;
    error = error_json(e.kind(), e.what(), code);
  } catch (const StagingError& e) {
    code = kExitStaging;
    error = error_json(e.kind(), e.what(), code);
  } catch (const Error& e) {
    code = kExitRuntime;
    error = error_json(e.kind(), e.what(), code);
  } catch (const std::exception& e) {
    code = kExitRuntime;
    error = error_json("internal", e.what(), code);
  }
  if (!error.is_null()) std::cerr << error.dump() << "\n";
  if (run_dir) {
    run_dir->finish(code, error.is_null() ? json() : error["error"]);
    if (code == kExitOk) std::cout << "run directory: " << run_dir->path().string() << "\n";
  }
  spdlog::set_default_logger(std::make_shared<spdlog::logger>(
      "wlab", std::make_shared<spdlog::sinks::stderr_color_sink_mt>()));
  return code;
}

}  // namespace wlab::cli
