// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "cli/app.hpp"
#include "cli/run_config.hpp"
#include "cli/run_dir.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"

namespace wlab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kTinyConfig = R"({
  "model": {"d_model": 16, "d_ff": 32, "n_heads": 2, "max_seq_len": 192},
  "adapter": {"rank": 2},
  "backbone": {"epochs_per_stage": 1, "max_samples_per_stage": 12, "grad_accum_steps": 2},
  "train": {"epochs_per_stage": 1, "max_samples_per_stage": 6, "grad_accum_steps": 2, "peak_lr": 1e-3},
  "data": {"foundation_window": 96, "foundation_stride": 96},
  "generation": {"max_new_tokens": 12, "plot_max_tokens": 10}
})";

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("wlab_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    write_file(root_ / "tiny.json", kTinyConfig);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path at(const std::string& name) const { return root_ / name; }
  std::string p(const std::string& name) const { return at(name).string(); }

  int wlab(std::vector<std::string> args) const { return run(args); }

  // synth → ingest → build-datasets on the tiny corpus.
  void prepare(const std::string& tag = "") {
    ASSERT_EQ(wlab({"synth", "--size", "tiny", "--out", p("synth" + tag)}), 0);
    ASSERT_EQ(wlab({"ingest", "--from", p("synth" + tag) + "/corpus", "--out", p("ingest" + tag)}), 0);
    ASSERT_EQ(wlab({"build-datasets", "--data", p("ingest" + tag) + "/dataset", "--config", p("tiny.json"), "--out",
                    p("build" + tag)}),
              0);
  }

  fs::path root_;
};

TEST_F(Workspace, SynthIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(wlab({"synth", "--seed", "7", "--size", "small", "--out", p("a")}), 0);
  ASSERT_EQ(wlab({"synth", "--seed", "7", "--size", "small", "--out", p("b")}), 0);
  const json ha = content_hashes(at("a/corpus")), hb = content_hashes(at("b/corpus"));
  EXPECT_EQ(ha, hb);
  EXPECT_EQ(ha.size(), 4u);
  const auto bytes = fs::file_size(at("a/corpus/corpus.txt"));
  EXPECT_GT(bytes, 150'000u);
  EXPECT_LT(bytes, 260'000u);
  ASSERT_EQ(wlab({"synth", "--seed", "8", "--size", "small", "--out", p("c")}), 0);
  EXPECT_NE(content_hashes(at("c/corpus")), ha);
}

TEST_F(Workspace, EndToEndSmoke) {
  prepare();
  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--out", p("train")}), 0);
  for (const char* stage : {"foundation", "world", "plot", "writing"})
    EXPECT_TRUE(fs::is_directory(at("train") / (std::string("stage-") + stage))) << stage;
  ASSERT_EQ(wlab({"generate", "--backbone", p("train/backbone"), "--adapters", p("train/stage-writing"),
                  "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--out", p("gen")}),
            0);
  ASSERT_EQ(wlab({"evaluate", "--stories", p("gen/story.json"), "--gold", p("build/datasets"), "--out", p("eval")}),
            0);
  const json report = json::parse(read_file(at("eval/report.json")));
  EXPECT_EQ(report["mode"], "writing");
  EXPECT_EQ(report["items"].size(), 4u);
  EXPECT_TRUE(report["means"].contains("rouge1.f1"));
  EXPECT_TRUE(report["provenance"].contains("stories_sha256"));

  for (const char* dir : {"synth", "ingest", "build", "train", "gen", "eval"}) {
    const json run_json = json::parse(read_file(at(dir) / "run.json"));
    EXPECT_EQ(run_json["status"], "ok") << dir;
    EXPECT_EQ(run_json["version"], WLAB_VERSION) << dir;
    EXPECT_TRUE(fs::exists(at(dir) / "config.json")) << dir;
  }
  const json train_run = json::parse(read_file(at("train/run.json")));
  EXPECT_TRUE(train_run["inputs"]["datasets"]["sha256"].contains("tokenizer.json"));
}

TEST_F(Workspace, SameInputsAndSeedsGiveIdenticalLossLogs) {
  prepare();
  for (const char* out : {"t1", "t2"})
    ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--out", p(out)}), 0);
  const json r1 = json::parse(read_file(at("t1/run.json"))), r2 = json::parse(read_file(at("t2/run.json")));
  EXPECT_EQ(r1["inputs"]["datasets"]["sha256"], r2["inputs"]["datasets"]["sha256"]);
  EXPECT_EQ(r1["config_sha256"], r2["config_sha256"]);
  EXPECT_EQ(read_file(at("t1/loss_log.jsonl")), read_file(at("t2/loss_log.jsonl")));
  EXPECT_EQ(read_file(at("t1/backbone-train/loss_log.jsonl")), read_file(at("t2/backbone-train/loss_log.jsonl")));

  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--set", "train.seed=9",
                  "--out", p("t3")}),
            0);
  EXPECT_NE(read_file(at("t1/loss_log.jsonl")), read_file(at("t3/loss_log.jsonl")));
}

TEST_F(Workspace, StageOrderViolationsExitWithStagingCode) {
  prepare();
  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "base", "--config", p("tiny.json"), "--out",
                  p("base")}),
            0);
  EXPECT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "plot", "--backbone", p("base/backbone"),
                  "--config", p("tiny.json"), "--out", p("plot")}),
            kExitStaging);
  const json err = json::parse(read_file(at("plot/error.json")));
  EXPECT_EQ(err["kind"], "staging");
  EXPECT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "world", "--config", p("tiny.json"), "--out",
                  p("nobackbone")}),
            kExitStaging);

  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "foundation", "--backbone",
                  p("base/backbone"), "--config", p("tiny.json"), "--out", p("fdn")}),
            0);
  EXPECT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "plot", "--backbone", p("base/backbone"),
                  "--resume", p("fdn/stage-foundation"), "--config", p("tiny.json"), "--out", p("skip")}),
            kExitStaging);
  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--stage", "world", "--backbone", p("base/backbone"),
                  "--resume", p("fdn/stage-foundation"), "--config", p("tiny.json"), "--out", p("world")}),
            0);
  EXPECT_EQ(wlab({"generate", "--backbone", p("base/backbone"), "--adapters", p("world/stage-world"), "--datasets",
                  p("build/datasets"), "--config", p("tiny.json"), "--out", p("gen")}),
            kExitStaging);
}

TEST_F(Workspace, UsageAndConfigErrorsExitWithTwo) {
  EXPECT_EQ(wlab({}), kExitUsage);
  EXPECT_EQ(wlab({"synth", "--no-such-flag"}), kExitUsage);
  EXPECT_EQ(wlab({"synth", "--size", "huge"}), kExitUsage);
  EXPECT_EQ(wlab({"train"}), kExitUsage);
  EXPECT_EQ(wlab({"build-datasets", "--data", p("missing"), "--out", p("x")}), kExitUsage);
  EXPECT_EQ(wlab({"synth", "--set", "train.bogus=1", "--out", p("y")}), kExitUsage);
  EXPECT_EQ(wlab({"synth", "--set", "train.epochs_per_stage=-1", "--out", p("y")}), kExitUsage);
  EXPECT_EQ(wlab({"synth", "--config", p("nope.json"), "--out", p("y")}), kExitUsage);
  write_file(at("secret.json"), R"({"judge": {"api_key": "sk-1"}})");
  EXPECT_EQ(wlab({"synth", "--config", p("secret.json"), "--out", p("y")}), kExitUsage);
  EXPECT_EQ(wlab({"--help"}), kExitOk);
  EXPECT_EQ(wlab({"--version"}), kExitOk);
}

TEST(RunConfigResolution, FlagsOverrideFileOverrideDefaults) {
  const fs::path file = fs::temp_directory_path() / "wlab_cfg_precedence.json";
  write_file(file, R"({"train": {"peak_lr": 0.002, "epochs_per_stage": 5}, "stages": {"world": {"peak_lr": 0.01}}})");
  const RunConfig c = resolve_config(file, {"train.epochs_per_stage=7", "eval.mode=plot"});
  fs::remove(file);
  EXPECT_DOUBLE_EQ(c.train.peak_lr, 0.002);
  EXPECT_EQ(c.train.epochs_per_stage, 7u);
  EXPECT_EQ(c.train.grad_accum_steps, TrainConfig{}.grad_accum_steps);
  EXPECT_DOUBLE_EQ(c.stage_config(TaskId::World).peak_lr, 0.01);
  EXPECT_EQ(c.stage_config(TaskId::World).epochs_per_stage, 7u);
  EXPECT_DOUBLE_EQ(c.stage_config(TaskId::Plot).peak_lr, 0.002);
  EXPECT_EQ(c.eval.mode, EvalMode::PlotPlanning);
  EXPECT_THROW(resolve_config({}, {"stages.epilogue.peak_lr=1"}), ConfigError);
  EXPECT_THROW(resolve_config({}, {"adapter.rank=0"}), ConfigError);
  EXPECT_THROW(resolve_config({}, {"novalue"}), ConfigError);
}

TEST(RunConfigResolution, ResolvedConfigRoundTrips) {
  const RunConfig c = resolve_config({}, {});
  const json j = c;
  EXPECT_EQ(j, json(resolve_config({}, {})));
  for (const auto& [section, _] : j.items())
    EXPECT_TRUE(default_config_json().contains(section)) << section;
  EXPECT_FALSE(j.dump().find("api_key") != std::string::npos);
}

TEST(Help, EveryFlagIsDocumented) {
  auto app = make_parser();
  const std::string top = app->help();
  for (const auto* sub : app->get_subcommands({})) {
    EXPECT_NE(top.find(sub->get_name()), std::string::npos) << sub->get_name();
    const std::string help = sub->help();
    for (const auto* opt : sub->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h,--help") continue;
      for (const auto& name : opt->get_lnames()) {
        EXPECT_NE(help.find("--" + name), std::string::npos) << sub->get_name() << " --" << name;
      }
      EXPECT_FALSE(opt->get_description().empty()) << sub->get_name() << " " << opt->get_name();
    }
  }
}

TEST_F(Workspace, JudgeSecretsNeverReachArtifacts) {
  prepare();
  ASSERT_EQ(wlab({"train", "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--out", p("train")}), 0);
  ASSERT_EQ(wlab({"generate", "--backbone", p("train/backbone"), "--adapters", p("train/stage-writing"),
                  "--datasets", p("build/datasets"), "--config", p("tiny.json"), "--out", p("gen")}),
            0);

  const std::string secret = "sk-never-write-me-0123";
  httplib::Server server;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    // A misbehaving endpoint that echoes the key back must not leak it either.
    const std::string content = R"({"Language Style Analysis": 2, "Expression Analysis": 3, )"
                                R"("Sentence Length and Complexity Analysis": 4, "Main Storyline Analysis": 2, )"
                                R"("Character Behavior and Motivation Analysis": 1, "Emotion and Conflict Analysis": 3})";
    json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
                  {"echo", req.get_header_value("Authorization")}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  setenv("JUDGE_API_URL", url.c_str(), 1);
  setenv("JUDGE_API_KEY", secret.c_str(), 1);
  const int code = wlab({"evaluate", "--stories", p("gen/story.json"), "--gold", p("build/datasets"), "--judge",
                         "--set", "judge.base_delay_ms=0", "--out", p("eval")});
  unsetenv("JUDGE_API_URL");
  unsetenv("JUDGE_API_KEY");
  server.stop();
  thread.join();

  ASSERT_EQ(code, 0);
  EXPECT_EQ(seen_auth, "Bearer " + secret);
  const json report = json::parse(read_file(at("eval/report.json")));
  EXPECT_EQ(report["judged"], 4);
  EXPECT_DOUBLE_EQ(report["means"]["SLC"].get<double>(), 4.0);
  ASSERT_TRUE(fs::exists(at("eval/judge_audit.jsonl")));
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    EXPECT_EQ(read_file(entry.path()).find(secret), std::string::npos) << entry.path();
  }
}

}  // namespace
}  // namespace wlab::cli
