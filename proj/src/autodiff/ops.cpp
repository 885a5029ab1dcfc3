// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/autodiff/ops.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wlab/kernels/kernels.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", op, shape_str(a.shape()),
                                     shape_str(b.shape())));
  }
}

void require_rank2(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw DimensionError(fmt::format("{}: expected matrices, got {} and {}", op,
                                     shape_str(a.shape()), shape_str(b.shape())));
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("add", av, bv);
  Tensor out = av;
  out.set_requires_grad(false);
  out.clear_grad();
  auto o = out.values();
  auto bs = bv.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bs[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    if (t.needs_grad(ia)) axpy(1.0, g, t.grad_buffer(ia));
    if (t.needs_grad(ib)) axpy(1.0, g, t.grad_buffer(ib));
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("mul", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(ib);
    if (t.needs_grad(ia)) {
      auto ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    }
    if (t.needs_grad(ib)) {
      auto gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
    }
  });
}

Var scale(Var a, double factor) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * factor;
  const auto ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, factor](Tape& t, std::uint32_t self) {
    axpy(factor, t.grad(self), t.grad_buffer(ia));
  });
}

Var add_row(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 2 || bv.rank() != 1 || bv.numel() != xv.cols()) {
    throw DimensionError(fmt::format("add_row: cannot broadcast {} over rows of {}",
                                     shape_str(bv.shape()), shape_str(xv.shape())));
  }
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] + bv[c];
  const auto ix = x.id(), ib = bias.id();
  return x.tape()->record(std::move(out), {x, bias},
                          [ix, ib, rows, cols](Tape& t, std::uint32_t self) {
                            auto g = t.grad(self);
                            if (t.needs_grad(ix)) axpy(1.0, g, t.grad_buffer(ix));
                            if (t.needs_grad(ib)) {
                              auto gb = t.grad_buffer(ib);
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
                            }
                          });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  const double total = std::accumulate(av.values().begin(), av.values().end(), 0.0);
  const auto ia = a.id();
  return a.tape()->record(Tensor::scalar(total), {a}, [ia](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (double& x : t.grad_buffer(ia)) x += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().numel();
  if (n == 0) throw DomainError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var reshape(Var a, Shape shape) {
  const Tensor& av = a.value();
  if (shape_numel(shape) != av.numel()) {
    throw ShapeError(fmt::format("reshape: {} to {}", shape_str(av.shape()), shape_str(shape)));
  }
  Tensor out(std::move(shape), std::vector<double>(av.values().begin(), av.values().end()));
  const auto ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia](Tape& t, std::uint32_t self) {
    axpy(1.0, t.grad(self), t.grad_buffer(ia));
  });
}

Var detach(Var a) {
  Tensor copy(a.value().shape(),
              std::vector<double>(a.value().values().begin(), a.value().values().end()));
  return a.tape()->constant(std::move(copy));
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul", av, bv);
  if (av.dim(1) != bv.dim(0)) {
    throw DimensionError(fmt::format("matmul: inner dimensions differ for {} · {}",
                                     shape_str(av.shape()), shape_str(bv.shape())));
  }
  const std::size_t m = av.dim(0), n = av.dim(1), p = bv.dim(1);
  Tensor out(Shape{m, p});
  kernels::gemm_nn({m, n, p}, av.values(), bv.values(), out.values());
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib, m, n, p](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    // dA = dC · Bᵀ, dB = Aᵀ · dC
    if (t.needs_grad(ia)) kernels::gemm_nt({m, p, n}, g, t.value(ib).values(), t.grad_buffer(ia));
    if (t.needs_grad(ib)) kernels::gemm_tn({n, m, p}, t.value(ia).values(), g, t.grad_buffer(ib));
  });
}

Var matmul_nt(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul_nt", av, bv);
  if (av.dim(1) != bv.dim(1)) {
    throw DimensionError(fmt::format("matmul_nt: inner dimensions differ for {} · {}ᵀ",
                                     shape_str(av.shape()), shape_str(bv.shape())));
  }
  const std::size_t m = av.dim(0), n = av.dim(1), p = bv.dim(0);
  Tensor out(Shape{m, p});
  kernels::gemm_nt({m, n, p}, av.values(), bv.values(), out.values());
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib, m, n, p](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    // dA = dC · B, dB = dCᵀ · A
    if (t.needs_grad(ia)) kernels::gemm_nn({m, p, n}, g, t.value(ib).values(), t.grad_buffer(ia));
    if (t.needs_grad(ib)) kernels::gemm_tn({p, m, n}, g, t.value(ia).values(), t.grad_buffer(ib));
  });
}

Var linear(Var x, Var weight, Var bias) {
  Var y = matmul_nt(x, weight);
  return bias.valid() ? add_row(y, bias) : y;
}

Var softmax(Var v) {
  const Tensor& vv = v.value();
  if (vv.numel() == 0) throw DomainError("softmax of an empty vector");
  if (vv.rank() > 2) throw DimensionError("softmax: rank > 2 unsupported: " + shape_str(vv.shape()));
  const std::size_t rows = vv.rank() == 2 ? vv.dim(0) : 1;
  const std::size_t cols = vv.rank() == 0 ? 1 : vv.cols();
  Tensor out = Tensor(vv.shape(), std::vector<double>(vv.values().begin(), vv.values().end()));
  kernels::softmax_rows(rows, cols, out.values());
  const auto iv = v.id();
  return v.tape()->record(std::move(out), {v}, [iv, rows, cols](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    const auto y = t.value(self).values();
    auto gv = t.grad_buffer(iv);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t off = r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[off + c] * y[off + c];
      for (std::size_t c = 0; c < cols; ++c) gv[off + c] += y[off + c] * (g[off + c] - dot);
    }
  });
}

namespace {

// Row log-softmax probabilities and loss for one target.
double row_cross_entropy(const double* logits, std::size_t cols, TokenId target,
                         double* probs_out) {
  const double peak = *std::max_element(logits, logits + cols);
  double total = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    probs_out[c] = std::exp(logits[c] - peak);
    total += probs_out[c];
  }
  const double inv = 1.0 / total;
  for (std::size_t c = 0; c < cols; ++c) probs_out[c] *= inv;
  return std::log(total) - (logits[target] - peak);
}

}  // namespace

Var cross_entropy(Var logits, TokenId target) {
  const Tensor& lv = logits.value();
  if (lv.numel() == 0) throw DomainError("cross_entropy over an empty vocabulary");
  if (lv.rank() == 2 && lv.dim(0) != 1) {
    throw DimensionError("cross_entropy expects a single logit row, got " + shape_str(lv.shape()));
  }
  const std::size_t vocab = lv.numel();
  if (target >= vocab) {
    throw IndexError(fmt::format("cross_entropy: target {} outside vocabulary of {}", target, vocab));
  }
  std::vector<double> probs(vocab);
  const double loss = row_cross_entropy(lv.values().data(), vocab, target, probs.data());
  const auto il = logits.id();
  return logits.tape()->record(
      Tensor::scalar(loss), {logits},
      [il, target, probs = std::move(probs)](Tape& t, std::uint32_t self) {
        const double g = t.grad(self)[0];
        auto gl = t.grad_buffer(il);
        for (std::size_t c = 0; c < probs.size(); ++c) gl[c] += g * probs[c];
        gl[target] -= g;
      });
}

Var masked_cross_entropy(Var logits, std::span<const TokenId> targets,
                         std::span<const std::uint8_t> mask) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2) throw DimensionError("masked_cross_entropy expects [T×V] logits");
  const std::size_t rows = lv.dim(0), vocab = lv.dim(1);
  if (targets.size() != rows || mask.size() != rows) {
    throw DimensionError(fmt::format("masked_cross_entropy: {} rows, {} targets, {} mask entries",
                                     rows, targets.size(), mask.size()));
  }
  std::vector<double> probs(rows * vocab, 0.0);
  std::size_t counted = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    if (targets[r] >= vocab) {
      throw IndexError(fmt::format("masked_cross_entropy: target {} at row {} outside vocabulary of {}",
                                   targets[r], r, vocab));
    }
    total += row_cross_entropy(lv.values().data() + r * vocab, vocab, targets[r],
                               probs.data() + r * vocab);
    ++counted;
  }
  const double inv = counted ? 1.0 / static_cast<double>(counted) : 0.0;
  std::vector<TokenId> kept(targets.begin(), targets.end());
  std::vector<std::uint8_t> kept_mask(mask.begin(), mask.end());
  const auto il = logits.id();
  return logits.tape()->record(
      Tensor::scalar(total * inv), {logits},
      [il, rows, vocab, inv, probs = std::move(probs), kept = std::move(kept),
       kept_mask = std::move(kept_mask)](Tape& t, std::uint32_t self) {
        const double g = t.grad(self)[0] * inv;
        if (g == 0.0) return;
        auto gl = t.grad_buffer(il);
        for (std::size_t r = 0; r < rows; ++r) {
          if (!kept_mask[r]) continue;
          double* row = gl.data() + r * vocab;
          const double* p = probs.data() + r * vocab;
          for (std::size_t c = 0; c < vocab; ++c) row[c] += g * p[c];
          row[kept[r]] -= g;
        }
      });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = x.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  const std::size_t cols = xv.cols();
  const std::size_t rows = xv.numel() / std::max<std::size_t>(cols, 1);
  if (gv.numel() != cols || bv.numel() != cols) {
    throw DimensionError(fmt::format("layer_norm: gain {} / bias {} for rows of width {}",
                                     shape_str(gv.shape()), shape_str(bv.shape()), cols));
  }
  Tensor out(xv.shape());
  std::vector<double> xhat(xv.numel());
  std::vector<double> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.values().data() + r * cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += row[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(cols);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (row[c] - mu) * rstd[r];
      xhat[r * cols + c] = h;
      out[r * cols + c] = h * gv[c] + bv[c];
    }
  }
  const auto ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape()->record(
      std::move(out), {x, gamma, beta},
      [ix, ig, ib, rows, cols, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t,
                                                                                 std::uint32_t self) {
        auto g = t.grad(self);
        const Tensor& gain = t.value(ig);
        if (t.needs_grad(ig)) {
          auto gg = t.grad_buffer(ig);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gg[c] += g[r * cols + c] * xhat[r * cols + c];
        }
        if (t.needs_grad(ib)) {
          auto gb = t.grad_buffer(ib);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        }
        if (t.needs_grad(ix)) {
          auto gx = t.grad_buffer(ix);
          const double inv_n = 1.0 / static_cast<double>(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gain[c];
              mean_d += d;
              mean_dx += d * xhat[r * cols + c];
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gain[c];
              gx[r * cols + c] += rstd[r] * (d - mean_d - xhat[r * cols + c] * mean_dx);
            }
          }
        }
      });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    const double v = xv[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  const auto ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    const Tensor& xv = t.value(ix);
    auto gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double dinner = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      gx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner);
    }
  });
}

Var embedding(Var table, std::span<const TokenId> ids) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw DimensionError("embedding table must be a matrix");
  const std::size_t vocab = tv.dim(0), width = tv.dim(1);
  Tensor out(Shape{ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) {
      throw IndexError(fmt::format("embedding: id {} outside table of {}", ids[r], vocab));
    }
    std::copy_n(tv.values().data() + ids[r] * width, width, out.values().data() + r * width);
  }
  std::vector<TokenId> kept(ids.begin(), ids.end());
  const auto it = table.id();
  return table.tape()->record(std::move(out), {table},
                              [it, width, kept = std::move(kept)](Tape& t, std::uint32_t self) {
                                auto g = t.grad(self);
                                auto gt = t.grad_buffer(it);
                                for (std::size_t r = 0; r < kept.size(); ++r) {
                                  double* dst = gt.data() + kept[r] * width;
                                  const double* src = g.data() + r * width;
                                  for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
                                }
                              });
}

namespace {

void gather_head(const Tensor& x, std::size_t head, std::size_t head_dim, std::vector<double>& out) {
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  out.resize(rows * head_dim);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.values().data() + r * cols + head * head_dim, head_dim,
                out.data() + r * head_dim);
}

void scatter_head_add(std::span<const double> src, std::size_t head, std::size_t head_dim,
                      std::size_t rows, std::size_t cols, std::span<double> dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < head_dim; ++c)
      dst[r * cols + head * head_dim + c] += src[r * head_dim + c];
}

}  // namespace

Var causal_attention(Var q, Var k, Var v, std::size_t n_heads) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  if (qv.rank() != 2 || qv.shape() != kv.shape() || qv.shape() != vv.shape()) {
    throw DimensionError(fmt::format("causal_attention: q {} k {} v {}", shape_str(qv.shape()),
                                     shape_str(kv.shape()), shape_str(vv.shape())));
  }
  const std::size_t steps = qv.dim(0), width = qv.dim(1);
  if (n_heads == 0 || width % n_heads != 0) {
    throw DimensionError(fmt::format("causal_attention: width {} not divisible into {} heads",
                                     width, n_heads));
  }
  const std::size_t head_dim = width / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor out(Shape{steps, width});
  // Attention probabilities per head, [H×T×T], kept for backward.
  std::vector<double> probs(n_heads * steps * steps, 0.0);
  std::vector<double> qh, kh, vh, oh(steps * head_dim);
  for (std::size_t h = 0; h < n_heads; ++h) {
    gather_head(qv, h, head_dim, qh);
    gather_head(kv, h, head_dim, kh);
    gather_head(vv, h, head_dim, vh);
    std::span<double> p(probs.data() + h * steps * steps, steps * steps);
    kernels::gemm_nt({steps, head_dim, steps}, qh, kh, p);
    for (std::size_t i = 0; i < steps; ++i) {
      for (std::size_t j = 0; j <= i; ++j) p[i * steps + j] *= inv_sqrt;
      for (std::size_t j = i + 1; j < steps; ++j)
        p[i * steps + j] = -std::numeric_limits<double>::infinity();
    }
    kernels::softmax_rows(steps, steps, p);
    std::fill(oh.begin(), oh.end(), 0.0);
    kernels::gemm_nn({steps, steps, head_dim}, p, vh, oh);
    scatter_head_add(oh, h, head_dim, steps, width, out.values());
  }
  const auto iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape()->record(
      std::move(out), {q, k, v},
      [iq, ik, iv, steps, width, n_heads, head_dim, inv_sqrt,
       probs = std::move(probs)](Tape& t, std::uint32_t self) {
        auto g = t.grad(self);
        std::vector<double> qh, kh, vh, goh(steps * head_dim), dp(steps * steps),
            tmp(steps * head_dim);
        Tensor g_tensor(Shape{steps, width}, std::vector<double>(g.begin(), g.end()));
        for (std::size_t h = 0; h < n_heads; ++h) {
          gather_head(t.value(iq), h, head_dim, qh);
          gather_head(t.value(ik), h, head_dim, kh);
          gather_head(t.value(iv), h, head_dim, vh);
          gather_head(g_tensor, h, head_dim, goh);
          std::span<const double> p(probs.data() + h * steps * steps, steps * steps);
          if (t.needs_grad(iv)) {
            std::fill(tmp.begin(), tmp.end(), 0.0);
            kernels::gemm_tn({steps, steps, head_dim}, p, goh, tmp);  // Pᵀ · dO
            scatter_head_add(tmp, h, head_dim, steps, width, t.grad_buffer(iv));
          }
          if (!t.needs_grad(iq) && !t.needs_grad(ik)) continue;
          std::fill(dp.begin(), dp.end(), 0.0);
          kernels::gemm_nt({steps, head_dim, steps}, goh, vh, dp);  // dO · Vᵀ
          for (std::size_t i = 0; i < steps; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j <= i; ++j) dot += p[i * steps + j] * dp[i * steps + j];
            for (std::size_t j = 0; j <= i; ++j)
              dp[i * steps + j] = p[i * steps + j] * (dp[i * steps + j] - dot) * inv_sqrt;
            for (std::size_t j = i + 1; j < steps; ++j) dp[i * steps + j] = 0.0;
          }
          if (t.needs_grad(iq)) {
            std::fill(tmp.begin(), tmp.end(), 0.0);
            kernels::gemm_nn({steps, steps, head_dim}, dp, kh, tmp);
            scatter_head_add(tmp, h, head_dim, steps, width, t.grad_buffer(iq));
          }
          if (t.needs_grad(ik)) {
            std::fill(tmp.begin(), tmp.end(), 0.0);
            kernels::gemm_tn({steps, steps, head_dim}, dp, qh, tmp);
            scatter_head_add(tmp, h, head_dim, steps, width, t.grad_buffer(ik));
          }
        }
      });
}

Var dropout(Var x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw DomainError(fmt::format("dropout probability {} not in [0, 1)", p));
  if (!training || p == 0.0) return x;
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(xv.numel());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    mask[i] = rng.uniform() >= p ? keep_scale : 0.0;
    out[i] = xv[i] * mask[i];
  }
  const auto ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, mask = std::move(mask)](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

}  // namespace wlab
