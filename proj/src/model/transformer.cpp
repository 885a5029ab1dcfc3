// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/model/transformer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

constexpr double kInitStd = 0.02;
constexpr double kLayerNormEps = 1e-5;

std::string block(std::size_t i, std::string_view leaf) { return fmt::format("blocks.{}.{}", i, leaf); }

struct ParamSpec {
  std::string name;
  Shape shape;
  enum class Init { kNormal, kZero, kOne } init;
};

std::vector<ParamSpec> parameter_layout(const ModelConfig& c) {
  using I = ParamSpec::Init;
  const std::size_t d = c.d_model, f = c.d_ff;
  std::vector<ParamSpec> specs{{"tok_emb", {c.vocab_size, d}, I::kNormal},
                               {"pos_emb", {c.max_seq_len, d}, I::kNormal}};
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    specs.push_back({block(i, "ln1.gain"), {d}, I::kOne});
    specs.push_back({block(i, "ln1.bias"), {d}, I::kZero});
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) {
      specs.push_back({block(i, w), {d, d}, I::kNormal});
    }
    for (const char* b : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) {
      specs.push_back({block(i, b), {d}, I::kZero});
    }
    specs.push_back({block(i, "ln2.gain"), {d}, I::kOne});
    specs.push_back({block(i, "ln2.bias"), {d}, I::kZero});
    specs.push_back({block(i, "mlp.w1"), {f, d}, I::kNormal});
    specs.push_back({block(i, "mlp.b1"), {f}, I::kZero});
    specs.push_back({block(i, "mlp.w2"), {d, f}, I::kNormal});
    specs.push_back({block(i, "mlp.b2"), {d}, I::kZero});
  }
  specs.push_back({"ln_f.gain", {d}, I::kOne});
  specs.push_back({"ln_f.bias", {d}, I::kZero});
  specs.push_back({"lm_head", {c.vocab_size, d}, I::kNormal});
  return specs;
}

}  // namespace

Transformer::Transformer(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  for (const ParamSpec& spec : parameter_layout(config_)) {
    Tensor t(spec.shape);
    switch (spec.init) {
      case ParamSpec::Init::kNormal:
        for (double& x : t.values()) x = rng.normal(0.0, kInitStd);
        break;
      case ParamSpec::Init::kOne:
        std::fill(t.values().begin(), t.values().end(), 1.0);
        break;
      case ParamSpec::Init::kZero:
        break;
    }
    params_.emplace(spec.name, std::move(t));
  }
}

Transformer::Transformer(ModelConfig config, ParameterMap parameters)
    : config_(config), params_(std::move(parameters)) {
  config_.validate();
  check_parameters();
}

void Transformer::check_parameters() const {
  const auto layout = parameter_layout(config_);
  if (layout.size() != params_.size()) {
    throw ConfigError(fmt::format("model expects {} parameters, got {}", layout.size(), params_.size()));
  }
  for (const ParamSpec& spec : layout) {
    auto it = params_.find(spec.name);
    if (it == params_.end()) throw ConfigError("missing model parameter " + spec.name);
    if (it->second.shape() != spec.shape) {
      throw ConfigError(fmt::format("parameter {} has shape {}, expected {}", spec.name,
                                    shape_str(it->second.shape()), shape_str(spec.shape)));
    }
  }
}

Tensor& Transformer::parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown model parameter " + name);
  return it->second;
}

const Tensor& Transformer::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown model parameter " + name);
  return it->second;
}

std::vector<std::string> Transformer::adaptable_weights() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < config_.n_layers; ++i)
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo", "mlp.w1", "mlp.w2"})
      names.push_back(block(i, w));
  return names;
}

std::vector<std::string> Transformer::default_targets() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    names.push_back(block(i, "attn.wq"));
    names.push_back(block(i, "attn.wv"));
  }
  return names;
}

void Transformer::attach_adapter(const std::string& weight, std::shared_ptr<AdapterLayer> layer) {
  const auto names = adaptable_weights();
  if (std::find(names.begin(), names.end(), weight) == names.end()) {
    throw ConfigError(fmt::format("'{}' is not an adaptable weight of this model", weight));
  }
  if (adapters_.contains(weight)) {
    throw ContractError(fmt::format("weight '{}' already carries an adapter", weight));
  }
  adapters_.emplace(weight, std::move(layer));
}

const AdapterLayer* Transformer::adapter(const std::string& weight) const {
  auto it = adapters_.find(weight);
  return it == adapters_.end() ? nullptr : it->second.get();
}

void Transformer::set_backbone_trainable(bool trainable) {
  for (auto& [name, t] : params_) t.set_requires_grad(trainable);
}

Var Transformer::project(Tape& tape, Var x, const std::string& weight, const std::string& bias,
                         const AdapterContext& ctx) {
  Var y = linear(x, tape.leaf(params_.at(weight)), tape.leaf(params_.at(bias)));
  auto it = adapters_.find(weight);
  if (it == adapters_.end()) return y;
  return add(y, it->second->delta(tape, x, ctx));
}

Var Transformer::forward(Tape& tape, std::span<const TokenId> ids, const AdapterContext& ctx) {
  if (ids.empty()) throw LengthError("forward on an empty sequence");
  if (ids.size() > config_.max_seq_len) {
    throw LengthError(fmt::format("sequence of {} tokens exceeds max_seq_len {}", ids.size(),
                                  config_.max_seq_len));
  }
  if (ctx.training && config_.dropout_p > 0.0 && !ctx.rng) {
    throw ContractError("training forward with dropout needs an rng");
  }
  std::vector<TokenId> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  Var x = add(embedding(tape.leaf(params_.at("tok_emb")), ids),
              embedding(tape.leaf(params_.at("pos_emb")), positions));
  auto drop = [&](Var v) {
    return ctx.training && config_.dropout_p > 0.0 ? dropout(v, config_.dropout_p, *ctx.rng, true) : v;
  };
  x = drop(x);
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    Var h = layer_norm(x, tape.leaf(params_.at(block(i, "ln1.gain"))),
                       tape.leaf(params_.at(block(i, "ln1.bias"))), kLayerNormEps);
    Var q = project(tape, h, block(i, "attn.wq"), block(i, "attn.bq"), ctx);
    Var k = project(tape, h, block(i, "attn.wk"), block(i, "attn.bk"), ctx);
    Var v = project(tape, h, block(i, "attn.wv"), block(i, "attn.bv"), ctx);
    Var attn = causal_attention(q, k, v, config_.n_heads);
    x = add(x, drop(project(tape, attn, block(i, "attn.wo"), block(i, "attn.bo"), ctx)));
    Var h2 = layer_norm(x, tape.leaf(params_.at(block(i, "ln2.gain"))),
                        tape.leaf(params_.at(block(i, "ln2.bias"))), kLayerNormEps);
    Var f = gelu(project(tape, h2, block(i, "mlp.w1"), block(i, "mlp.b1"), ctx));
    x = add(x, drop(project(tape, f, block(i, "mlp.w2"), block(i, "mlp.b2"), ctx)));
  }
  Var out = layer_norm(x, tape.leaf(params_.at("ln_f.gain")), tape.leaf(params_.at("ln_f.bias")),
                       kLayerNormEps);
  return matmul_nt(out, tape.leaf(params_.at("lm_head")));
}

Tensor Transformer::logits(std::span<const TokenId> ids, const AdapterContext& ctx) {
  AdapterContext eval = ctx;
  eval.training = false;
  Tape tape;
  return forward(tape, ids, eval).value();
}

// ---------------------------------------------------------------------------

namespace {

void layer_norm_row(std::span<const double> x, const Tensor& gain, const Tensor& bias,
                    std::span<double> out) {
  const std::size_t n = x.size();
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= static_cast<double>(n);
  const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
  for (std::size_t c = 0; c < n; ++c) out[c] = (x[c] - mu) * rstd * gain[c] + bias[c];
}

double gelu_scalar(double v) {
  return 0.5 * v * (1.0 + std::tanh(0.7978845608028654 * (v + 0.044715 * v * v * v)));
}

}  // namespace

DecodeSession::DecodeSession(const Transformer& model, AdapterContext ctx)
    : model_(model), ctx_(std::move(ctx)), keys_(model.config().n_layers), values_(model.config().n_layers) {
  ctx_.training = false;
}

void DecodeSession::linear_row(std::span<const double> x, const std::string& weight,
                               const std::string& bias, std::span<double> out) const {
  const Tensor& w = model_.params_.at(weight);
  const Tensor& b = model_.params_.at(bias);
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* wr = w.values().data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += x[c] * wr[c];
    out[r] = acc + b[r];
  }
  if (const AdapterLayer* adapter = model_.adapter(weight)) adapter->delta_row(x, out, ctx_);
}

std::vector<double> DecodeSession::step(TokenId id) {
  const ModelConfig& c = model_.config();
  if (position_ >= c.max_seq_len) {
    throw LengthError(fmt::format("decode position {} reaches max_seq_len {}", position_, c.max_seq_len));
  }
  if (id >= c.vocab_size) throw IndexError(fmt::format("token id {} outside vocabulary", id));
  const std::size_t d = c.d_model, heads = c.n_heads, hd = d / heads;
  const auto& p = model_.params_;
  std::vector<double> x(d), h(d), q(d), k(d), v(d), attn(d), o(d), f(c.d_ff), f2(d);
  const Tensor& tok = p.at("tok_emb");
  const Tensor& pos = p.at("pos_emb");
  for (std::size_t j = 0; j < d; ++j) x[j] = tok.at(id, j) + pos.at(position_, j);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t steps = position_ + 1;
  std::vector<double> scores(steps);
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    layer_norm_row(x, p.at(block(i, "ln1.gain")), p.at(block(i, "ln1.bias")), h);
    linear_row(h, block(i, "attn.wq"), block(i, "attn.bq"), q);
    linear_row(h, block(i, "attn.wk"), block(i, "attn.bk"), k);
    linear_row(h, block(i, "attn.wv"), block(i, "attn.bv"), v);
    keys_[i].insert(keys_[i].end(), k.begin(), k.end());
    values_[i].insert(values_[i].end(), v.begin(), v.end());
    for (std::size_t head = 0; head < heads; ++head) {
      const std::size_t off = head * hd;
      double peak = -INFINITY;
      for (std::size_t t = 0; t < steps; ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < hd; ++j) s += q[off + j] * keys_[i][t * d + off + j];
        scores[t] = s * inv_sqrt;
        peak = std::max(peak, scores[t]);
      }
      double total = 0.0;
      for (std::size_t t = 0; t < steps; ++t) {
        scores[t] = std::exp(scores[t] - peak);
        total += scores[t];
      }
      for (std::size_t j = 0; j < hd; ++j) attn[off + j] = 0.0;
      for (std::size_t t = 0; t < steps; ++t) {
        const double w = scores[t] / total;
        for (std::size_t j = 0; j < hd; ++j) attn[off + j] += w * values_[i][t * d + off + j];
      }
    }
    linear_row(attn, block(i, "attn.wo"), block(i, "attn.bo"), o);
    for (std::size_t j = 0; j < d; ++j) x[j] += o[j];
    layer_norm_row(x, p.at(block(i, "ln2.gain")), p.at(block(i, "ln2.bias")), h);
    linear_row(h, block(i, "mlp.w1"), block(i, "mlp.b1"), f);
    for (double& val : f) val = gelu_scalar(val);
    linear_row(f, block(i, "mlp.w2"), block(i, "mlp.b2"), f2);
    for (std::size_t j = 0; j < d; ++j) x[j] += f2[j];
  }
  layer_norm_row(x, p.at("ln_f.gain"), p.at("ln_f.bias"), h);
  const Tensor& head = p.at("lm_head");
  std::vector<double> logits(c.vocab_size);
  for (std::size_t r = 0; r < c.vocab_size; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += h[j] * head.at(r, j);
    logits[r] = acc;
  }
  ++position_;
  return logits;
}

}  // namespace wlab
