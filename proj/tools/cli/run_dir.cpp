// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_dir.hpp"

#include <chrono>
#include <ctime>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "wlab/util/error.hpp"
#include "wlab/util/hash.hpp"
#include "wlab/util/io.hpp"

namespace wlab::cli {
namespace fs = std::filesystem;

namespace {

std::string utc_stamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  return fmt::format(fmt::runtime(format), tm);
}

}  // namespace

nlohmann::json content_hashes(const fs::path& input) {
  if (fs::is_regular_file(input)) return sha256_file(input);
  if (!fs::is_directory(input)) throw IoError(fmt::format("'{}' does not exist", input.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(input))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  nlohmann::json out = nlohmann::json::object();
  for (const auto& f : files) out[fs::relative(f, input).generic_string()] = sha256_file(f);
  return out;
}

RunDirectory RunDirectory::create(const fs::path& root, const fs::path& explicit_dir, const std::string& command) {
  RunDirectory rd;
  if (!explicit_dir.empty()) {
    rd.path_ = explicit_dir;
  } else {
    const std::string base = utc_stamp("{:%Y%m%d-%H%M%S}") + "-" + command;
    rd.path_ = root / base;
    for (int n = 2; fs::exists(rd.path_); ++n) rd.path_ = root / fmt::format("{}-{}", base, n);
  }
  fs::create_directories(rd.path_);
  rd.run_ = {{"tool", "wlab"},
             {"version", WLAB_VERSION},
             {"command", command},
             {"started_at", utc_stamp("{:%Y-%m-%dT%H:%M:%SZ}")},
             {"inputs", nlohmann::json::object()},
             {"outputs", nlohmann::json::object()}};
  return rd;
}

void RunDirectory::record_config(const nlohmann::json& config) {
  write_file(path_ / "config.json", config.dump(2) + "\n");
  run_["config_sha256"] = sha256_file(path_ / "config.json");
}

void RunDirectory::record_args(const std::vector<std::string>& args) { run_["args"] = args; }

void RunDirectory::record_input(const std::string& role, const fs::path& input) {
  run_["inputs"][role] = {{"path", input.string()}, {"sha256", content_hashes(input)}};
}

void RunDirectory::record_output(const std::string& role, const nlohmann::json& value) {
  run_["outputs"][role] = value;
}

void RunDirectory::finish(int exit_code, const nlohmann::json& error) {
  run_["finished_at"] = utc_stamp("{:%Y-%m-%dT%H:%M:%SZ}");
  run_["exit_code"] = exit_code;
  run_["status"] = exit_code == 0 ? "ok" : "failed";
  if (!error.is_null()) {
    run_["error"] = error;
    write_file(path_ / "error.json", error.dump(2) + "\n");
  }
  write_file(path_ / "run.json", run_.dump(2) + "\n");
}

}  // namespace wlab::cli
