// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/train/optim.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "wlab/util/error.hpp"

namespace wlab {

void TrainConfig::validate() const {
  if (!(peak_lr >= 0.0)) throw ConfigError("peak_lr must be non-negative");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0))
    throw ConfigError("warmup_ratio must lie in [0, 1)");
  if (epochs_per_stage < 1) throw ConfigError("epochs_per_stage must be at least 1");
  if (grad_accum_steps < 1) throw ConfigError("grad_accum_steps must be at least 1");
  if (micro_batch_size < 1) throw ConfigError("micro_batch_size must be at least 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (max_grad_norm && !(*max_grad_norm > 0.0)) throw ConfigError("max_grad_norm must be positive");
  if (max_steps && *max_steps == 0) throw ConfigError("max_steps must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"peak_lr", c.peak_lr},
       {"warmup_ratio", c.warmup_ratio},
       {"epochs_per_stage", c.epochs_per_stage},
       {"grad_accum_steps", c.grad_accum_steps},
       {"micro_batch_size", c.micro_batch_size},
       {"weight_decay", c.weight_decay},
       {"betas", {c.beta1, c.beta2}},
       {"eps", c.eps},
       {"max_grad_norm", c.max_grad_norm ? nlohmann::json(*c.max_grad_norm) : nlohmann::json()},
       {"seed", c.seed},
       {"max_samples_per_stage", c.max_samples_per_stage},
       {"max_steps", c.max_steps ? nlohmann::json(*c.max_steps) : nlohmann::json()},
       {"shared_schedule", c.shared_schedule}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.peak_lr = j.value("peak_lr", d.peak_lr);
  c.warmup_ratio = j.value("warmup_ratio", d.warmup_ratio);
  c.epochs_per_stage = j.value("epochs_per_stage", d.epochs_per_stage);
  c.grad_accum_steps = j.value("grad_accum_steps", d.grad_accum_steps);
  c.micro_batch_size = j.value("micro_batch_size", d.micro_batch_size);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  if (j.contains("betas")) {
    c.beta1 = j["betas"].at(0).get<double>();
    c.beta2 = j["betas"].at(1).get<double>();
  }
  c.eps = j.value("eps", d.eps);
  c.max_grad_norm.reset();
  if (j.contains("max_grad_norm") && !j["max_grad_norm"].is_null())
    c.max_grad_norm = j["max_grad_norm"].get<double>();
  c.seed = j.value("seed", d.seed);
  c.max_samples_per_stage = j.value("max_samples_per_stage", d.max_samples_per_stage);
  c.max_steps.reset();
  if (j.contains("max_steps") && !j["max_steps"].is_null())
    c.max_steps = j["max_steps"].get<std::size_t>();
  c.shared_schedule = j.value("shared_schedule", d.shared_schedule);
}

std::size_t warmup_steps(std::size_t total, const TrainConfig& config) {
  return static_cast<std::size_t>(std::ceil(config.warmup_ratio * static_cast<double>(total)));
}

double lr_at(double step, std::size_t total, const TrainConfig& config) {
  if (total == 0) throw ConfigError("schedule needs at least one step");
  const auto t = static_cast<double>(total);
  const auto warmup = static_cast<double>(warmup_steps(total, config));
  if (step >= t || step < 0.0) return 0.0;
  if (step < warmup) return config.peak_lr * step / warmup;
  const double progress = (step - warmup) / (t - warmup);
  return config.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(const TrainConfig& config)
    : beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.eps),
      weight_decay_(config.weight_decay) {}

void AdamW::step(const std::vector<NamedTensor>& params, double lr) {
  for (const auto& p : params) {
    for (double g : p.tensor->grad()) {
      if (!std::isfinite(g)) {
        throw TrainingError(fmt::format("non-finite gradient in parameter '{}' at optimizer step {}",
                                        p.name, t_ + 1));
      }
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& p : params) {
    auto values = p.tensor->values();
    auto grad = p.tensor->grad();
    auto& st = state_[p.tensor];
    if (st.m.empty()) {
      st.m.assign(values.size(), 0.0);
      st.v.assign(values.size(), 0.0);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
      st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = st.m[i] / bc1;
      const double v_hat = st.v[i] / bc2;
      values[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps_) + weight_decay_ * values[i]);
    }
  }
}

double grad_norm(const std::vector<NamedTensor>& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor->grad()) sq += g * g;
  return std::sqrt(sq);
}

double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / (norm + 1e-12);
    for (const auto& p : params)
      if (p.tensor->has_grad())
        for (double& g : p.tensor->mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace wlab
