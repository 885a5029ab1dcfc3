// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace wlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStaging = 3;

/// Runs one invocation; `args` excludes the program name. Errors are printed
/// to stderr as one JSON line and mapped to the exit codes above.
int run(const std::vector<std::string>& args);

/// The parser without side effects, for help and documentation checks.
std::unique_ptr<CLI::App> make_parser();

}  // namespace wlab::cli
