// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "wlab/autodiff/tape.hpp"

namespace wlab {

class Rng;

/// Curriculum tasks in training order. Comparison follows the curriculum.
enum class TaskId : std::uint8_t { Foundation = 0, World = 1, Plot = 2, Writing = 3 };

inline constexpr std::array<TaskId, 4> kCurriculum = {TaskId::Foundation, TaskId::World,
                                                      TaskId::Plot, TaskId::Writing};
inline constexpr std::array<TaskId, 3> kDownstreamTasks = {TaskId::World, TaskId::Plot,
                                                           TaskId::Writing};

std::string_view task_name(TaskId task);
/// Accepts "foundation", "world", "plot", "writing" (also "write"). ConfigError otherwise.
TaskId parse_task(std::string_view name);

/// Softmax task weights over the enabled task set.
struct GatingWeights {
  std::vector<TaskId> tasks;
  std::vector<double> alphas;

  double alpha(TaskId task) const;
};

/// Per-forward settings threaded from the caller down to every adapter.
struct AdapterContext {
  TaskId active = TaskId::Foundation;
  bool training = false;
  Rng* rng = nullptr;  // dropout source, required when training
  /// Instrumentation: called once per adapter forward with the gating used.
  std::function<void(TaskId active, const GatingWeights&)> on_gating;
};

/// A low-rank update attached to one backbone weight W₀ [d×k].
class AdapterLayer {
 public:
  virtual ~AdapterLayer() = default;

  /// ΔW·x for input rows x [T×k]; returns [T×d].
  virtual Var delta(Tape& tape, Var x, const AdapterContext& ctx) = 0;
  /// Same contribution for a single row, added into `out` [d]. Inference only.
  virtual void delta_row(std::span<const double> x, std::span<double> out,
                         const AdapterContext& ctx) const = 0;
};

}  // namespace wlab
