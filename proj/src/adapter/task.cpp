// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/adapter/task.hpp"

#include <fmt/format.h>

#include "wlab/util/error.hpp"

namespace wlab {

std::string_view task_name(TaskId task) {
  switch (task) {
    case TaskId::Foundation:
      return "foundation";
    case TaskId::World:
      return "world";
    case TaskId::Plot:
      return "plot";
    case TaskId::Writing:
      return "writing";
  }
  return "unknown";
}

TaskId parse_task(std::string_view name) {
  if (name == "foundation") return TaskId::Foundation;
  if (name == "world") return TaskId::World;
  if (name == "plot") return TaskId::Plot;
  if (name == "writing" || name == "write") return TaskId::Writing;
  throw ConfigError(fmt::format("unknown task '{}'", name));
}

double GatingWeights::alpha(TaskId task) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i] == task) return alphas[i];
  return 0.0;
}

}  // namespace wlab
