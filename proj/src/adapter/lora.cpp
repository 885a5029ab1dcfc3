// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "wlab/adapter/lora.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wlab/autodiff/ops.hpp"
#include "wlab/model/checkpoint.hpp"
#include "wlab/model/transformer.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {

namespace {

Tensor gaussian(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

// out[d] += s · B_eff[d×r] · (A[r×k] · x[k])
void low_rank_row(const Tensor& a, std::span<const double> b_eff, double s,
                  std::span<const double> x, std::span<double> out) {
  const std::size_t r = a.dim(0), k = a.dim(1), d = out.size();
  std::vector<double> z(r, 0.0);
  const auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += av[i * k + j] * x[j];
    z[i] = acc;
  }
  for (std::size_t o = 0; o < d; ++o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += b_eff[o * r + i] * z[i];
    out[o] += s * acc;
  }
}

Var maybe_dropout(Var x, double p, bool training, Rng* rng) {
  if (!training || p == 0.0) return x;
  if (rng == nullptr) throw ContractError("adapter dropout in training mode needs an Rng");
  return dropout(x, p, *rng, training);
}

}  // namespace

std::string_view mode_name(AdapterMode mode) {
  switch (mode) {
    case AdapterMode::PlainLoRA:
      return "plain";
    case AdapterMode::WriterLoRA:
      return "writerlora";
    case AdapterMode::MoELoRA:
      return "moelora";
  }
  return "unknown";
}

AdapterMode parse_mode(std::string_view name) {
  if (name == "plain" || name == "lora") return AdapterMode::PlainLoRA;
  if (name == "writerlora") return AdapterMode::WriterLoRA;
  if (name == "moelora" || name == "moe") return AdapterMode::MoELoRA;
  throw ConfigError(fmt::format("unknown adapter mode '{}'", name));
}

void AdapterSpec::validate(std::size_t d, std::size_t k) const {
  if (rank < 1) throw ConfigError("adapter rank must be at least 1");
  if (2 * rank > std::min(d, k)) {
    throw ConfigError(fmt::format("adapter rank {} exceeds min(d, k)/2 for a [{}x{}] weight", rank,
                                  d, k));
  }
  if (!(scaling > 0.0) || !std::isfinite(scaling))
    throw ConfigError("adapter scaling must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0))
    throw ConfigError("adapter dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("adapter init_std must be positive");
}

void to_json(nlohmann::json& j, const AdapterSpec& s) {
  j = {{"rank", s.rank},
       {"scaling", s.scaling},
       {"dropout_p", s.dropout_p},
       {"target_matrices", s.target_matrices},
       {"mode", std::string(mode_name(s.mode))},
       {"init_std", s.init_std}};
}

void from_json(const nlohmann::json& j, AdapterSpec& s) {
  AdapterSpec d;
  s.rank = j.value("rank", d.rank);
  s.scaling = j.value("scaling", d.scaling);
  s.dropout_p = j.value("dropout_p", d.dropout_p);
  s.target_matrices = j.value("target_matrices", d.target_matrices);
  s.mode = parse_mode(j.value("mode", std::string(mode_name(d.mode))));
  s.init_std = j.value("init_std", d.init_std);
}

GatingWeights forward_gating(std::span<const TaskId> enabled, TaskId active) {
  GatingWeights g;
  g.tasks.assign(enabled.begin(), enabled.end());
  if (enabled.empty()) return g;
  // softmax of a one-hot (or all-zero) pre-weight vector
  const double e = std::exp(1.0);
  double total = 0.0;
  for (TaskId t : enabled) {
    const double w = t == active ? e : 1.0;
    g.alphas.push_back(w);
    total += w;
  }
  for (double& a : g.alphas) a /= total;
  return g;
}

GatingWeights gating_weights(std::span<const TaskId> enabled, TaskId active) {
  if (enabled.empty()) throw ContractError("gating over an empty task set");
  if (std::find(enabled.begin(), enabled.end(), active) == enabled.end()) {
    throw ContractError(fmt::format("active task '{}' is not enabled", task_name(active)));
  }
  return forward_gating(enabled, active);
}

std::size_t param_count(const AdapterSpec& spec, std::size_t d, std::size_t k,
                        std::size_t n_tasks) {
  const std::size_t r = spec.rank;
  switch (spec.mode) {
    case AdapterMode::WriterLoRA:
      return r * k + (1 + n_tasks) * d * r;
    case AdapterMode::PlainLoRA:
      return r * k + d * r;
    case AdapterMode::MoELoRA:
      return n_tasks * (r * k + d * r);
  }
  return 0;
}

std::string AdapterTensorRef::key() const {
  return fmt::format("{}/{}/{}", target, role, task_name(task));
}

// WriterLoraLayer ------------------------------------------------------------

WriterLoraLayer::WriterLoraLayer(const Tensor& base, std::size_t rank, double scaling,
                                 double dropout_p, double init_std, Rng& rng, bool allow_tasks)
    : base_(&base),
      scaling_(scaling),
      dropout_p_(dropout_p),
      allow_tasks_(allow_tasks),
      a_fdn_(gaussian({rank, base.dim(1)}, init_std, rng)),
      b_fdn_(Shape{base.dim(0), rank}) {
  if (base.rank() != 2) throw ShapeError("adapter base weight must be a matrix");
}

Tensor& WriterLoraLayer::task_b(TaskId task) {
  auto it = task_b_.find(task);
  if (it == task_b_.end())
    throw ContractError(fmt::format("task '{}' is not enabled", task_name(task)));
  return it->second;
}

const Tensor& WriterLoraLayer::task_b(TaskId task) const {
  return const_cast<WriterLoraLayer*>(this)->task_b(task);
}

void WriterLoraLayer::enable(TaskId task) {
  if (!allow_tasks_) throw ContractError("plain LoRA layers carry no task branches");
  if (task == TaskId::Foundation) throw ContractError("the foundation branch is always present");
  if (task_b_.count(task)) {
    throw ContractError(fmt::format("task '{}' is already enabled", task_name(task)));
  }
  if (!enabled_.empty() && enabled_.back() > task) {
    throw StagingError(fmt::format("task '{}' enabled after a later task", task_name(task)));
  }
  task_b_.emplace(task, Tensor(Shape{out_dim(), rank()}));
  enabled_.push_back(task);
}

void WriterLoraLayer::check_gating(const GatingWeights& gating) const {
  if (gating.tasks != enabled_ || gating.alphas.size() != enabled_.size()) {
    throw ContractError("gating weights must cover exactly the enabled tasks");
  }
}

Var WriterLoraLayer::delta_with(Tape& tape, Var x, const GatingWeights& gating, bool training,
                                Rng* rng) {
  check_gating(gating);
  Var xd = maybe_dropout(x, dropout_p_, training, rng);
  Var z = matmul_nt(xd, tape.leaf(a_fdn_));  // [T×r]
  Var b_eff = tape.leaf(b_fdn_);
  for (std::size_t i = 0; i < enabled_.size(); ++i) {
    b_eff = add(b_eff, scale(tape.leaf(task_b_.at(enabled_[i])), gating.alphas[i]));
  }
  Var out = matmul_nt(z, b_eff);  // [T×d]
  return scaling_ == 1.0 ? out : scale(out, scaling_);
}

Var WriterLoraLayer::delta(Tape& tape, Var x, const AdapterContext& ctx) {
  GatingWeights g = forward_gating(enabled_, ctx.active);
  if (ctx.on_gating) ctx.on_gating(ctx.active, g);
  return delta_with(tape, x, g, ctx.training, ctx.rng);
}

void WriterLoraLayer::delta_row(std::span<const double> x, std::span<double> out,
                                const AdapterContext& ctx) const {
  GatingWeights g = forward_gating(enabled_, ctx.active);
  if (ctx.on_gating) ctx.on_gating(ctx.active, g);
  std::vector<double> b_eff(b_fdn_.values().begin(), b_fdn_.values().end());
  for (std::size_t i = 0; i < enabled_.size(); ++i) {
    const auto bt = task_b_.at(enabled_[i]).values();
    for (std::size_t j = 0; j < b_eff.size(); ++j) b_eff[j] += g.alphas[i] * bt[j];
  }
  low_rank_row(a_fdn_, b_eff, scaling_, x, out);
}

std::vector<AdapterTensorRef> WriterLoraLayer::tensors(const std::string& target) {
  std::vector<AdapterTensorRef> out;
  out.push_back({target, 'A', TaskId::Foundation, &a_fdn_});
  out.push_back({target, 'B', TaskId::Foundation, &b_fdn_});
  for (TaskId t : enabled_) out.push_back({target, 'B', t, &task_b_.at(t)});
  return out;
}

Tensor forward_adapted(WriterLoraLayer& layer, const Tensor& x, TaskId active,
                       const GatingWeights& gating) {
  if (x.numel() != layer.in_dim()) {
    throw DimensionError(fmt::format("adapter input has {} values, expected {}", x.numel(),
                                     layer.in_dim()));
  }
  const auto& en = layer.enabled();
  if (active != TaskId::Foundation && std::find(en.begin(), en.end(), active) == en.end()) {
    throw ContractError(fmt::format("active task '{}' is not enabled", task_name(active)));
  }
  Tape tape;
  Var xv = tape.constant(Tensor({1, layer.in_dim()}, std::vector<double>(x.values().begin(),
                                                                        x.values().end())));
  Var base = matmul_nt(xv, tape.leaf(layer.base()));
  Var h = add(base, layer.delta_with(tape, xv, gating, false, nullptr));
  return Tensor({layer.out_dim()}, std::vector<double>(h.value().values().begin(),
                                                       h.value().values().end()));
}

// MoeLoraLayer ---------------------------------------------------------------

MoeLoraLayer::MoeLoraLayer(const Tensor& base, std::size_t rank, double scaling, double dropout_p,
                           double init_std, Rng& rng, std::vector<TaskId> experts)
    : base_(&base), scaling_(scaling), dropout_p_(dropout_p), experts_(std::move(experts)) {
  if (experts_.empty()) throw ConfigError("MoE adapter needs at least one expert");
  for (TaskId t : experts_) {
    a_.emplace(t, gaussian({rank, base.dim(1)}, init_std, rng));
    b_.emplace(t, Tensor(Shape{base.dim(0), rank}));
  }
}

Tensor& MoeLoraLayer::expert_a(TaskId task) {
  auto it = a_.find(task);
  if (it == a_.end()) throw ContractError(fmt::format("no expert for '{}'", task_name(task)));
  return it->second;
}

Tensor& MoeLoraLayer::expert_b(TaskId task) {
  auto it = b_.find(task);
  if (it == b_.end()) throw ContractError(fmt::format("no expert for '{}'", task_name(task)));
  return it->second;
}

Var MoeLoraLayer::delta_with(Tape& tape, Var x, const GatingWeights& router, bool training,
                             Rng* rng) {
  if (router.tasks != experts_ || router.alphas.size() != experts_.size()) {
    throw ContractError("router weights must cover exactly the experts");
  }
  Var xd = maybe_dropout(x, dropout_p_, training, rng);
  Var out;
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    Var z = matmul_nt(xd, tape.leaf(a_.at(experts_[i])));
    Var term = scale(matmul_nt(z, tape.leaf(b_.at(experts_[i]))), scaling_ * router.alphas[i]);
    out = out.valid() ? add(out, term) : term;
  }
  return out;
}

Var MoeLoraLayer::delta(Tape& tape, Var x, const AdapterContext& ctx) {
  GatingWeights g = forward_gating(experts_, ctx.active);
  if (ctx.on_gating) ctx.on_gating(ctx.active, g);
  return delta_with(tape, x, g, ctx.training, ctx.rng);
}

void MoeLoraLayer::delta_row(std::span<const double> x, std::span<double> out,
                             const AdapterContext& ctx) const {
  GatingWeights g = forward_gating(experts_, ctx.active);
  if (ctx.on_gating) ctx.on_gating(ctx.active, g);
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    low_rank_row(a_.at(experts_[i]), b_.at(experts_[i]).values(), scaling_ * g.alphas[i], x, out);
  }
}

std::vector<AdapterTensorRef> MoeLoraLayer::tensors(const std::string& target) {
  std::vector<AdapterTensorRef> out;
  for (TaskId t : experts_) {
    out.push_back({target, 'A', t, &a_.at(t)});
    out.push_back({target, 'B', t, &b_.at(t)});
  }
  return out;
}

Tensor moelora_forward(MoeLoraLayer& layer, const Tensor& x, const GatingWeights& router) {
  const std::size_t k = layer.base().dim(1), d = layer.base().dim(0);
  if (x.numel() != k) {
    throw DimensionError(fmt::format("adapter input has {} values, expected {}", x.numel(), k));
  }
  Tape tape;
  Var xv = tape.constant(Tensor({1, k}, std::vector<double>(x.values().begin(), x.values().end())));
  Var h = add(matmul_nt(xv, tape.leaf(layer.base())),
              layer.delta_with(tape, xv, router, false, nullptr));
  return Tensor({d}, std::vector<double>(h.value().values().begin(), h.value().values().end()));
}

// AdapterSet -----------------------------------------------------------------

AdapterSet AdapterSet::attach(Transformer& model, const AdapterSpec& spec, std::uint64_t seed) {
  AdapterSet set;
  set.spec_ = spec;
  set.targets_ = spec.target_matrices.empty() ? model.default_targets() : spec.target_matrices;
  set.spec_.target_matrices = set.targets_;
  const auto adaptable = model.adaptable_weights();
  for (const auto& target : set.targets_) {
    if (std::find(adaptable.begin(), adaptable.end(), target) == adaptable.end()) {
      throw ConfigError(fmt::format("'{}' is not an adaptable weight", target));
    }
    if (model.adapter(target) != nullptr) {
      throw ContractError(fmt::format("'{}' already carries an adapter", target));
    }
    const Tensor& w = model.parameter(target);
    spec.validate(w.dim(0), w.dim(1));
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < set.targets_.size(); ++i) {
    const std::string& target = set.targets_[i];
    const Tensor& w = model.parameter(target);
    Rng layer_rng = rng.fork(i + 1);
    if (spec.mode == AdapterMode::MoELoRA) {
      auto layer = std::make_shared<MoeLoraLayer>(w, spec.rank, spec.scaling, spec.dropout_p,
                                                  spec.init_std, layer_rng);
      model.attach_adapter(target, layer);
      set.moe_layers_.emplace(target, std::move(layer));
    } else {
      auto layer = std::make_shared<WriterLoraLayer>(w, spec.rank, spec.scaling, spec.dropout_p,
                                                     spec.init_std, layer_rng,
                                                     spec.mode == AdapterMode::WriterLoRA);
      model.attach_adapter(target, layer);
      set.writer_layers_.emplace(target, std::move(layer));
    }
  }
  model.set_backbone_trainable(false);
  return set;
}

std::vector<TaskId> AdapterSet::enabled() const {
  if (writer_layers_.empty()) return {};
  return writer_layers_.begin()->second->enabled();
}

bool AdapterSet::is_enabled(TaskId task) const {
  const auto en = enabled();
  return std::find(en.begin(), en.end(), task) != en.end();
}

void AdapterSet::enable(TaskId task) {
  if (spec_.mode != AdapterMode::WriterLoRA) return;
  for (auto& [name, layer] : writer_layers_) layer->enable(task);
}

WriterLoraLayer* AdapterSet::writer_layer(const std::string& target) {
  auto it = writer_layers_.find(target);
  return it == writer_layers_.end() ? nullptr : it->second.get();
}

MoeLoraLayer* AdapterSet::moe_layer(const std::string& target) {
  auto it = moe_layers_.find(target);
  return it == moe_layers_.end() ? nullptr : it->second.get();
}

std::vector<AdapterTensorRef> AdapterSet::tensors() {
  std::vector<AdapterTensorRef> out;
  for (const auto& target : targets_) {
    auto refs = writer_layers_.count(target) ? writer_layers_.at(target)->tensors(target)
                                             : moe_layers_.at(target)->tensors(target);
    out.insert(out.end(), refs.begin(), refs.end());
  }
  return out;
}

std::vector<AdapterTensorRef> AdapterSet::trainable_set(TaskId stage, TrainAblation ablation,
                                                        const FreezePolicy& policy) {
  auto all = tensors();
  if (ablation == TrainAblation::Joint || spec_.mode == AdapterMode::PlainLoRA) return all;

  if (spec_.mode == AdapterMode::MoELoRA) {
    if (stage == TaskId::Foundation) return all;
    std::vector<AdapterTensorRef> out;
    for (const auto& ref : all)
      if (ref.task == stage) out.push_back(ref);
    return out;
  }

  if (stage != TaskId::Foundation) {
    for (TaskId t : kDownstreamTasks) {
      if (t > stage) break;
      if (!is_enabled(t)) {
        throw StagingError(fmt::format("stage '{}' requested before task '{}' is attached",
                                       task_name(stage), task_name(t)));
      }
    }
  }
  std::vector<AdapterTensorRef> out;
  for (const auto& ref : all) {
    bool train = false;
    if (stage == TaskId::Foundation) {
      train = ref.task == TaskId::Foundation;
    } else if (ref.role == 'A') {
      train = ablation == TrainAblation::UnfreezeA;
    } else if (ref.task == stage) {
      train = true;
    } else if (ref.task == TaskId::Foundation) {
      train = policy.train_fdn_b_downstream;
    } else if (ref.task < stage) {
      train = policy.train_prior_task_b;
    }
    if (train) out.push_back(ref);
  }
  return out;
}

void AdapterSet::apply_trainable(const std::vector<AdapterTensorRef>& set, Transformer& model) {
  model.set_backbone_trainable(false);
  for (auto& ref : tensors()) ref.tensor->set_requires_grad(false);
  for (const auto& ref : set) ref.tensor->set_requires_grad(true);
}

void AdapterSet::mark_completed(TaskId stage) {
  if (std::find(completed_.begin(), completed_.end(), stage) == completed_.end())
    completed_.push_back(stage);
}

std::size_t AdapterSet::parameter_count() {
  std::size_t n = 0;
  for (const auto& ref : tensors()) n += ref.tensor->numel();
  return n;
}

std::string AdapterSet::save(const std::filesystem::path& dir, const nlohmann::json& meta) {
  std::vector<StoredTensor> stored;
  for (const auto& ref : tensors()) {
    stored.push_back({ref.key(), *ref.tensor,
                      {{"target", ref.target},
                       {"role", std::string(1, ref.role)},
                       {"task", std::string(task_name(ref.task))}}});
  }
  nlohmann::json m = meta;
  m["kind"] = "adapters";
  m["spec"] = spec_;
  nlohmann::json lineage = nlohmann::json::array();
  for (TaskId t : completed_) lineage.push_back(std::string(task_name(t)));
  m["lineage"] = lineage;
  nlohmann::json en = nlohmann::json::array();
  for (TaskId t : enabled()) en.push_back(std::string(task_name(t)));
  m["enabled"] = en;
  return save_tensors(dir, stored, m);
}

AdapterSet AdapterSet::load(const std::filesystem::path& dir, Transformer& model) {
  TensorCheckpoint ckpt = load_tensors(dir);
  if (ckpt.meta.value("kind", std::string()) != "adapters") {
    throw IngestionError(fmt::format("{} is not an adapter checkpoint", dir.string()));
  }
  const AdapterSpec spec = ckpt.meta.at("spec").get<AdapterSpec>();
  AdapterSet set = attach(model, spec, 0);
  for (const auto& name : ckpt.meta.at("enabled")) set.enable(parse_task(name.get<std::string>()));
  for (const auto& name : ckpt.meta.at("lineage"))
    set.completed_.push_back(parse_task(name.get<std::string>()));

  std::map<std::string, const Tensor*> by_key;
  for (const auto& st : ckpt.tensors) by_key[st.key] = &st.tensor;
  auto refs = set.tensors();
  if (refs.size() != by_key.size()) {
    throw IngestionError(fmt::format("adapter checkpoint has {} tensors, expected {}",
                                     by_key.size(), refs.size()));
  }
  for (auto& ref : refs) {
    auto it = by_key.find(ref.key());
    if (it == by_key.end()) throw IngestionError(fmt::format("missing tensor '{}'", ref.key()));
    if (it->second->shape() != ref.tensor->shape()) {
      throw IngestionError(fmt::format("tensor '{}' has shape {}, expected {}", ref.key(),
                                       shape_str(it->second->shape()),
                                       shape_str(ref.tensor->shape())));
    }
    std::copy(it->second->values().begin(), it->second->values().end(),
              ref.tensor->values().begin());
  }
  return set;
}

}  // namespace wlab
