// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "wlab/autodiff/tensor.hpp"

namespace wlab {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::uint32_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool needs_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Append-only record of one forward computation.
///
/// Nodes are stored in creation order, so every node's inputs precede it and a
/// reverse sweep is a valid topological traversal. Gradients are propagated only
/// through nodes that transitively depend on a leaf with `requires_grad`.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records a parameter by reference. `param` must outlive the tape; its
  /// `requires_grad` flag is sampled now.
  Var leaf(Tensor& param);
  Var leaf(const Tensor& param);
  Var constant(Tensor value);

  /// Records an op output. The node needs a gradient iff any input does; when
  /// none do, `backward_fn` is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward_fn);

  /// Reverse sweep from a scalar loss. Leaves that require grad receive their
  /// gradient via Tensor::accumulate_grad. A second call throws until reset().
  void backward(Var loss);
  void reset();

  std::size_t size() const noexcept { return nodes_.size(); }
  bool backward_done() const noexcept { return backward_done_; }

  const Tensor& value(std::uint32_t id) const { return node_value(nodes_.at(id)); }
  bool needs_grad(std::uint32_t id) const { return nodes_.at(id).needs_grad; }
  /// Gradient flowing into node `id` (zeros if nothing reached it yet).
  std::span<const double> grad(std::uint32_t id);
  /// Mutable gradient accumulator for an input; allocated on first use.
  std::span<double> grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* leaf = nullptr;
    bool needs_grad = false;
    std::vector<double> grad;
    BackwardFn backward;
  };

  static const Tensor& node_value(const Node& node) {
    return node.external ? *node.external : node.owned;
  }
  Var push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace wlab
