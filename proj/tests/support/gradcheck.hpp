// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Finite-difference oracle. Independent of the backward rules: it only ever
// evaluates forward values.

#include <functional>
#include <string>
#include <vector>

#include "wlab/autodiff/tape.hpp"

namespace wlab::testing {

/// Builds a scalar loss from leaf Vars of the given inputs.
using LossBuilder = std::function<Var(Tape&, std::vector<Var>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;  // worst over inputs
  std::size_t evaluations = 0;
};

/// Central differences with step h on every element of every input, compared
/// against Tape::backward. Per input, error = ‖a − n‖₂ / max(‖a‖₂ + ‖n‖₂, 1e-10).
GradCheckResult check_gradients(std::vector<Tensor> inputs, const LossBuilder& build,
                                double h = 1e-5);

struct GradCase {
  std::string name;
  /// Produces one random instance (inputs + loss builder) from a seed.
  std::function<std::pair<std::vector<Tensor>, LossBuilder>(std::uint64_t seed)> make;
};

/// Every differentiable op in the library, each wrapped into a scalar loss by a
/// random linear functional.
std::vector<GradCase> all_grad_cases();

}  // namespace wlab::testing
