// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/app.hpp"

int main(int argc, char** argv) {
  return wlab::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
