// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "wlab/autodiff/tape.hpp"

namespace wlab {

class Rng;

using TokenId = std::uint32_t;

// Elementwise; operands must have identical shapes.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

/// x[rows×n] + bias[n] broadcast over rows.
Var add_row(Var x, Var bias);

Var sum(Var a);
Var mean(Var a);
Var reshape(Var a, Shape shape);
/// Same value, cut off from the gradient graph.
Var detach(Var a);

/// a[m×n] · b[n×p]
Var matmul(Var a, Var b);
/// a[m×n] · b[p×n]ᵀ, the layout of `x · Wᵀ` with W stored as [out×in].
Var matmul_nt(Var a, Var b);
/// x · Wᵀ (+ bias). `bias` may be an empty Var.
Var linear(Var x, Var weight, Var bias = {});

/// Softmax of a vector, or of each row of a matrix. Max-subtracted.
Var softmax(Var v);

/// −log softmax(logits)[target] for a single logit vector.
Var cross_entropy(Var logits, TokenId target);
/// Mean of per-row cross-entropies over rows whose mask is set; 0 when none is.
Var masked_cross_entropy(Var logits, std::span<const TokenId> targets,
                         std::span<const std::uint8_t> mask);

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var gelu(Var x);

/// Rows of `table` selected by `ids`; backward scatter-adds into the table.
Var embedding(Var table, std::span<const TokenId> ids);

/// Multi-head causal self-attention over q, k, v of shape [T×d]; head h uses
/// columns [h·d/H, (h+1)·d/H). Position i attends to positions 0..=i.
Var causal_attention(Var q, Var k, Var v, std::size_t n_heads);

/// Inverted dropout. Returns `x` itself when not training or p == 0.
Var dropout(Var x, double p, Rng& rng, bool training);

}  // namespace wlab
