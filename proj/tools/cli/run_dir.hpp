// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace wlab::cli {

/// sha256 of a file, or of every file under a directory keyed by relative path.
nlohmann::json content_hashes(const std::filesystem::path& input);

/// One subcommand's output directory. Holds config.json (the resolved config),
/// run.json (tool version, command line, input hashes, outcome) and whatever
/// the command writes.
class RunDirectory {
 public:
  /// `explicit_dir` wins; otherwise `<root>/<UTC timestamp>-<command>`, with a
  /// numeric suffix on collision.
  static RunDirectory create(const std::filesystem::path& root, const std::filesystem::path& explicit_dir,
                             const std::string& command);

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  void record_config(const nlohmann::json& config);
  void record_args(const std::vector<std::string>& args);
  void record_input(const std::string& role, const std::filesystem::path& input);
  void record_output(const std::string& role, const nlohmann::json& value);
  /// Writes run.json with the final status; an error adds error.json too.
  void finish(int exit_code, const nlohmann::json& error = nullptr);

 private:
  std::filesystem::path path_;
  nlohmann::json run_;
};

}  // namespace wlab::cli
