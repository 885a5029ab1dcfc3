// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/autodiff/tape.hpp"

#include <fmt/format.h>

#include "wlab/util/error.hpp"

namespace wlab {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an empty Var");
  return tape_->value(id_);
}

bool Var::needs_grad() const { return tape_ && tape_->needs_grad(id_); }

Var Tape::push(Node node) {
  if (nodes_.size() >= UINT32_MAX) throw LengthError("tape node limit reached");
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::leaf(Tensor& param) {
  Node node;
  node.external = &param;
  node.leaf = &param;
  node.needs_grad = param.requires_grad();
  return push(std::move(node));
}

Var Tape::leaf(const Tensor& param) {
  Node node;
  node.external = &param;
  return push(std::move(node));
}

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  return push(std::move(node));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward_fn) {
  Node node;
  node.owned = std::move(value);
  for (const Var& input : inputs) {
    if (input.tape() != this) throw ContractError("op input recorded on a different tape");
    if (input.id() >= nodes_.size()) throw ContractError("op input does not precede output");
    node.needs_grad = node.needs_grad || nodes_[input.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward_fn);
  return push(std::move(node));
}

std::span<const double> Tape::grad(std::uint32_t id) { return grad_buffer(id); }

std::span<double> Tape::grad_buffer(std::uint32_t id) {
  Node& node = nodes_.at(id);
  if (node.grad.empty()) node.grad.assign(node_value(node).numel(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  if (backward_done_) throw ContractError("backward() called twice on the same tape without reset()");
  if (loss.tape() != this) throw ContractError("loss was not recorded on this tape");
  const Tensor& out = value(loss.id());
  if (out.numel() != 1) {
    throw ShapeError(fmt::format("backward() needs a scalar loss, got shape {}",
                                 shape_str(out.shape())));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].needs_grad) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, static_cast<std::uint32_t>(id));
    if (node.leaf) node.leaf->accumulate_grad(node.grad);
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace wlab
