// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "wlab/adapter/lora.hpp"
#include "wlab/model/transformer.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 16;
  c.d_ff = 32;
  c.vocab_size = 20;
  c.max_seq_len = 24;
  return c;
}

AdapterSpec small_spec(AdapterMode mode = AdapterMode::WriterLoRA) {
  AdapterSpec s;
  s.rank = 4;
  s.dropout_p = 0.0;
  s.mode = mode;
  return s;
}

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal();
  return t;
}

void fill_random(Tensor& t, Rng& rng) {
  for (double& v : t.values()) v = rng.normal();
}

Tensor scalar_matrix(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

// Brute-force h' for one row, straight from the update rule.
std::vector<double> reference_output(WriterLoraLayer& layer, const Tensor& x,
                                     const GatingWeights& g) {
  const std::size_t d = layer.out_dim(), k = layer.in_dim(), r = layer.rank();
  std::vector<double> ax(r, 0.0), out(d, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < k; ++j) ax[i] += layer.a_fdn().at(i, j) * x.values()[j];
  for (std::size_t o = 0; o < d; ++o) {
    for (std::size_t j = 0; j < k; ++j) out[o] += layer.base().at(o, j) * x.values()[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      double b = layer.b_fdn().at(o, i);
      for (TaskId t : layer.enabled()) b += g.alpha(t) * layer.task_b(t).at(o, i);
      acc += b * ax[i];
    }
    out[o] += layer.scaling() * acc;
  }
  return out;
}

TEST(Gating, SingletonIsOne) {
  std::vector<TaskId> en = {TaskId::World};
  EXPECT_DOUBLE_EQ(gating_weights(en, TaskId::World).alpha(TaskId::World), 1.0);
}

TEST(Gating, TwoTasksActivePlot) {
  std::vector<TaskId> en = {TaskId::World, TaskId::Plot};
  auto g = gating_weights(en, TaskId::Plot);
  EXPECT_NEAR(g.alphas[0], 0.2689, 1e-4);
  EXPECT_NEAR(g.alphas[1], 0.7311, 1e-4);
}

TEST(Gating, ThreeTasksActivePlotAndWriting) {
  std::vector<TaskId> en(kDownstreamTasks.begin(), kDownstreamTasks.end());
  auto plot = gating_weights(en, TaskId::Plot);
  EXPECT_NEAR(plot.alphas[0], 0.2119, 1e-4);
  EXPECT_NEAR(plot.alphas[1], 0.5761, 1e-4);
  EXPECT_NEAR(plot.alphas[2], 0.2119, 1e-4);
  auto writing = gating_weights(en, TaskId::Writing);
  EXPECT_NEAR(writing.alphas[0], 0.2119, 1e-4);
  EXPECT_NEAR(writing.alphas[1], 0.2119, 1e-4);
  EXPECT_NEAR(writing.alphas[2], 0.5761, 1e-4);
}

TEST(Gating, ActiveNotEnabledIsContractError) {
  std::vector<TaskId> en = {TaskId::World};
  EXPECT_THROW(gating_weights(en, TaskId::Plot), ContractError);
  EXPECT_THROW(gating_weights({}, TaskId::World), ContractError);
}

TEST(Gating, PropertiesOverAllSubsets) {
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<TaskId> en;
    for (unsigned b = 0; b < 3; ++b)
      if (mask & (1u << b)) en.push_back(kDownstreamTasks[b]);
    for (TaskId active : en) {
      auto g = gating_weights(en, active);
      double total = 0.0;
      for (std::size_t i = 0; i < en.size(); ++i) {
        EXPECT_GT(g.alphas[i], 0.0);
        total += g.alphas[i];
        if (en[i] != active && en.size() > 1) EXPECT_LT(g.alphas[i], g.alpha(active));
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      // shift invariance: softmax(w + c) has the same argmax and values
      for (double c : {-3.0, 0.5, 7.0}) {
        double z = 0.0;
        std::vector<double> shifted;
        for (TaskId t : en) shifted.push_back(std::exp((t == active ? 1.0 : 0.0) + c));
        for (double v : shifted) z += v;
        for (std::size_t i = 0; i < en.size(); ++i)
          EXPECT_NEAR(shifted[i] / z, g.alphas[i], 1e-12);
      }
    }
  }
}

TEST(ForwardAdapted, ScalarExample) {
  Tensor w0 = scalar_matrix(2.0);
  Rng rng(0);
  WriterLoraLayer layer(w0, 1, 1.0, 0.0, 0.02, rng);
  layer.a_fdn().values()[0] = 1.0;
  layer.b_fdn().values()[0] = 0.5;
  layer.enable(TaskId::World);
  layer.task_b(TaskId::World).values()[0] = 1.0;
  std::vector<TaskId> en = {TaskId::World};
  Tensor h = forward_adapted(layer, Tensor({1}, std::vector<double>{1.0}), TaskId::World,
                             gating_weights(en, TaskId::World));
  EXPECT_DOUBLE_EQ(h.values()[0], 3.5);
}

TEST(ForwardAdapted, ZeroBIsExactlyBase) {
  Rng rng(1);
  Tensor w0 = random_tensor({12, 10}, rng);
  WriterLoraLayer layer(w0, 3, 1.0, 0.0, 0.02, rng);
  for (TaskId t : kDownstreamTasks) layer.enable(t);
  Tensor x = random_tensor({10}, rng);
  auto g = gating_weights(layer.enabled(), TaskId::Plot);
  Tensor h = forward_adapted(layer, x, TaskId::Plot, g);
  Tape tape;
  Var base = matmul_nt(tape.constant(Tensor({1, 10}, std::vector<double>(x.values().begin(),
                                                                         x.values().end()))),
                       tape.leaf(w0));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(h.values()[i], base.value().values()[i]);
}

TEST(ForwardAdapted, MatchesBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor w0 = random_tensor({9, 7}, rng);
    WriterLoraLayer layer(w0, 2, 0.5 + rng.uniform(), 0.0, 0.3, rng);
    fill_random(layer.b_fdn(), rng);
    const std::size_t n_tasks = rng.below(4);
    for (std::size_t t = 0; t < n_tasks; ++t) {
      layer.enable(kDownstreamTasks[t]);
      fill_random(layer.task_b(kDownstreamTasks[t]), rng);
    }
    TaskId active = n_tasks == 0 ? TaskId::Foundation : kDownstreamTasks[rng.below(n_tasks)];
    auto g = forward_gating(layer.enabled(), active);
    Tensor x = random_tensor({7}, rng);
    Tensor h = forward_adapted(layer, x, active, g);
    auto ref = reference_output(layer, x, g);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(h.values()[i], ref[i], 1e-12);
  }
}

TEST(ForwardAdapted, GatingMismatchIsContractError) {
  Rng rng(3);
  Tensor w0 = random_tensor({4, 4}, rng);
  WriterLoraLayer layer(w0, 1, 1.0, 0.0, 0.02, rng);
  layer.enable(TaskId::World);
  layer.enable(TaskId::Plot);
  Tensor x = random_tensor({4}, rng);
  std::vector<TaskId> only_world = {TaskId::World};
  EXPECT_THROW(forward_adapted(layer, x, TaskId::World, gating_weights(only_world, TaskId::World)),
               ContractError);
  EXPECT_THROW(forward_adapted(layer, x, TaskId::Writing,
                               forward_gating(layer.enabled(), TaskId::Writing)),
               ContractError);
}

TEST(ForwardAdapted, EmptyEnabledEqualsPlainLora) {
  Rng rng(4);
  Tensor w0 = random_tensor({6, 8}, rng);
  Rng r1(10), r2(10);
  WriterLoraLayer writer(w0, 2, 1.0, 0.0, 0.02, r1, true);
  WriterLoraLayer plain(w0, 2, 1.0, 0.0, 0.02, r2, false);
  fill_random(writer.b_fdn(), rng);
  plain.b_fdn() = writer.b_fdn();
  Tensor x = random_tensor({8}, rng);
  Tensor a = forward_adapted(writer, x, TaskId::Foundation, {});
  Tensor b = forward_adapted(plain, x, TaskId::Foundation, {});
  EXPECT_TRUE(a.bitwise_equal(b));
  EXPECT_THROW(plain.enable(TaskId::World), ContractError);
}

TEST(ForwardAdapted, SharedACoupling) {
  Rng rng(5);
  Tensor w0 = random_tensor({6, 6}, rng);
  WriterLoraLayer layer(w0, 2, 1.0, 0.0, 0.2, rng);
  fill_random(layer.b_fdn(), rng);
  layer.enable(TaskId::World);
  fill_random(layer.task_b(TaskId::World), rng);
  Tensor x = random_tensor({6}, rng);
  auto g = gating_weights(layer.enabled(), TaskId::World);
  Tensor before = forward_adapted(layer, x, TaskId::World, g);

  // perturbing A moves the foundation branch and the task branch
  layer.a_fdn().values()[0] += 0.5;
  EXPECT_FALSE(forward_adapted(layer, x, TaskId::World, g).bitwise_equal(before));
  Tensor saved_b = layer.b_fdn();
  layer.b_fdn() = Tensor(saved_b.shape());
  Tensor task_only = forward_adapted(layer, x, TaskId::World, g);
  layer.a_fdn().values()[0] -= 0.5;
  EXPECT_FALSE(forward_adapted(layer, x, TaskId::World, g).bitwise_equal(task_only));
  layer.b_fdn() = saved_b;

  // perturbing B_world matters once World is enabled
  layer.task_b(TaskId::World).values()[0] += 0.5;
  EXPECT_FALSE(forward_adapted(layer, x, TaskId::World, g).bitwise_equal(before));
}

TEST(Attach, ZeroInitIdentityOnLogits) {
  Transformer base(tiny_config(), 21), adapted(tiny_config(), 21);
  AdapterSet set = AdapterSet::attach(adapted, small_spec(), 5);
  for (TaskId t : kDownstreamTasks) set.enable(t);
  std::vector<TokenId> ids = {1, 4, 9, 12, 7, 3};
  for (TaskId active : kCurriculum) {
    AdapterContext ctx;
    ctx.active = active;
    EXPECT_TRUE(adapted.logits(ids, ctx).bitwise_equal(base.logits(ids)));
  }
}

TEST(Attach, BackboneFrozenAndInitialisation) {
  Transformer model(tiny_config(), 22);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  for (const auto& [name, t] : model.parameters()) EXPECT_FALSE(t.requires_grad()) << name;
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& ref : set.tensors()) {
    for (double v : ref.tensor->values()) {
      if (ref.role == 'B') {
        EXPECT_EQ(v, 0.0);
      } else {
        sq += v * v;
        ++n;
      }
    }
  }
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(n)), 0.02, 0.004);
}

TEST(Attach, TwiceIsError) {
  Transformer model(tiny_config(), 23);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  EXPECT_THROW(AdapterSet::attach(model, small_spec(), 6), ContractError);
}

TEST(Attach, UnknownTargetAndBadSpec) {
  Transformer model(tiny_config(), 24);
  AdapterSpec spec = small_spec();
  spec.target_matrices = {"blocks.0.attn.wz"};
  EXPECT_THROW(AdapterSet::attach(model, spec, 1), ConfigError);
  spec = small_spec();
  spec.rank = 9;
  EXPECT_THROW(AdapterSet::attach(model, spec, 1), ConfigError);
  spec = small_spec();
  spec.scaling = 0.0;
  EXPECT_THROW(AdapterSet::attach(model, spec, 1), ConfigError);
  EXPECT_FALSE(model.has_adapters());
}

TEST(Attach, PlainModeHasOnePairPerTarget) {
  Transformer model(tiny_config(), 25);
  AdapterSet set = AdapterSet::attach(model, small_spec(AdapterMode::PlainLoRA), 5);
  set.enable(TaskId::World);  // no-op for plain adapters
  auto refs = set.tensors();
  EXPECT_EQ(refs.size(), 2 * set.targets().size());
  for (const auto& target : set.targets()) {
    auto n = std::count_if(refs.begin(), refs.end(),
                           [&](const AdapterTensorRef& r) { return r.target == target; });
    EXPECT_EQ(n, 2);
  }
}

TEST(TrainableSet, CurriculumStages) {
  Transformer model(tiny_config(), 26);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  auto roles = [](const std::vector<AdapterTensorRef>& refs) {
    std::set<std::pair<char, TaskId>> out;
    for (const auto& r : refs) out.insert({r.role, r.task});
    return out;
  };
  using Roles = std::set<std::pair<char, TaskId>>;
  EXPECT_EQ(roles(set.trainable_set(TaskId::Foundation, TrainAblation::None)),
            (Roles{{'A', TaskId::Foundation}, {'B', TaskId::Foundation}}));
  EXPECT_THROW(set.trainable_set(TaskId::World, TrainAblation::None), StagingError);
  set.enable(TaskId::World);
  EXPECT_EQ(roles(set.trainable_set(TaskId::World, TrainAblation::None)),
            (Roles{{'B', TaskId::World}}));
  EXPECT_THROW(set.trainable_set(TaskId::Writing, TrainAblation::None), StagingError);
  set.enable(TaskId::Plot);
  EXPECT_EQ(roles(set.trainable_set(TaskId::Plot, TrainAblation::None)),
            (Roles{{'B', TaskId::Plot}}));
  EXPECT_EQ(roles(set.trainable_set(TaskId::Plot, TrainAblation::UnfreezeA)),
            (Roles{{'A', TaskId::Foundation}, {'B', TaskId::Plot}}));
  FreezePolicy open{true, true};
  EXPECT_EQ(roles(set.trainable_set(TaskId::Plot, TrainAblation::None, open)),
            (Roles{{'B', TaskId::Foundation}, {'B', TaskId::World}, {'B', TaskId::Plot}}));
  set.enable(TaskId::Writing);
  EXPECT_EQ(roles(set.trainable_set(TaskId::Writing, TrainAblation::Joint)),
            (Roles{{'A', TaskId::Foundation},
                   {'B', TaskId::Foundation},
                   {'B', TaskId::World},
                   {'B', TaskId::Plot},
                   {'B', TaskId::Writing}}));
  EXPECT_THROW(set.enable(TaskId::World), ContractError);
}

TEST(TrainableSet, ApplySetsRequiresGradOnExactlyTheSet) {
  Transformer model(tiny_config(), 27);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  set.enable(TaskId::World);
  auto train = set.trainable_set(TaskId::World, TrainAblation::None);
  set.apply_trainable(train, model);
  for (const auto& ref : set.tensors())
    EXPECT_EQ(ref.tensor->requires_grad(), ref.role == 'B' && ref.task == TaskId::World)
        << ref.key();
}

TEST(GradientFlow, WorldStageTouchesOnlyBWorld) {
  Transformer model(tiny_config(), 28);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  set.enable(TaskId::World);
  set.apply_trainable(set.trainable_set(TaskId::World, TrainAblation::None), model);
  std::vector<TokenId> ids = {1, 4, 9, 12, 7, 3, 8};
  std::vector<TokenId> targets = {4, 9, 12, 7, 3, 8, 2};
  std::vector<std::uint8_t> mask(7, 1);
  Tape tape;
  AdapterContext ctx;
  ctx.active = TaskId::World;
  tape.backward(masked_cross_entropy(model.forward(tape, ids, ctx), targets, mask));
  for (const auto& ref : set.tensors()) {
    const bool expect_grad = ref.role == 'B' && ref.task == TaskId::World;
    double norm = 0.0;
    if (ref.tensor->has_grad())
      for (double g : ref.tensor->grad()) norm += g * g;
    if (expect_grad) {
      EXPECT_GT(norm, 0.0) << ref.key();
    } else {
      EXPECT_EQ(norm, 0.0) << ref.key();
    }
  }
  for (const auto& [name, t] : model.parameters()) EXPECT_FALSE(t.has_grad()) << name;
}

TEST(GradientFlow, GatingHookSeesActiveTask) {
  Transformer model(tiny_config(), 29);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  set.enable(TaskId::World);
  set.enable(TaskId::Plot);
  int calls = 0;
  AdapterContext ctx;
  ctx.active = TaskId::Plot;
  ctx.on_gating = [&](TaskId active, const GatingWeights& g) {
    ++calls;
    EXPECT_EQ(active, TaskId::Plot);
    EXPECT_NEAR(g.alpha(TaskId::Plot), 0.7311, 1e-4);
  };
  std::vector<TokenId> ids = {1, 4, 9};
  model.logits(ids, ctx);
  EXPECT_EQ(calls, static_cast<int>(set.targets().size()));
}

TEST(ParamCount, Examples) {
  AdapterSpec spec;
  spec.rank = 8;
  EXPECT_EQ(param_count(spec, 64, 64, 3), 2560u);
  spec.mode = AdapterMode::PlainLoRA;
  EXPECT_EQ(param_count(spec, 64, 64, 3), 1024u);
  spec.mode = AdapterMode::WriterLoRA;
  AdapterSpec plain = spec;
  plain.mode = AdapterMode::PlainLoRA;
  EXPECT_EQ(param_count(spec, 64, 48, 0), param_count(plain, 64, 48, 0));
  spec.mode = AdapterMode::MoELoRA;
  EXPECT_EQ(param_count(spec, 64, 64, 3), 3072u);
}

TEST(ParamCount, MatchesAttachedTensors) {
  for (AdapterMode mode : {AdapterMode::PlainLoRA, AdapterMode::WriterLoRA, AdapterMode::MoELoRA}) {
    Transformer model(tiny_config(), 30);
    AdapterSpec spec = small_spec(mode);
    AdapterSet set = AdapterSet::attach(model, spec, 5);
    for (TaskId t : kDownstreamTasks) set.enable(t);
    std::size_t expected = 0;
    for (const auto& target : set.targets()) {
      const Tensor& w = model.parameter(target);
      expected += param_count(spec, w.dim(0), w.dim(1), 3);
    }
    EXPECT_EQ(set.parameter_count(), expected) << mode_name(mode);
  }
}

TEST(MoeLora, ZeroExpertsGiveBase) {
  Rng rng(6);
  Tensor w0 = random_tensor({5, 6}, rng);
  MoeLoraLayer layer(w0, 2, 1.0, 0.0, 0.02, rng);
  Tensor x = random_tensor({6}, rng);
  Tensor h = moelora_forward(layer, x, forward_gating(layer.experts(), TaskId::Plot));
  for (std::size_t i = 0; i < 5; ++i) {
    double ref = 0.0;
    for (std::size_t j = 0; j < 6; ++j) ref += w0.at(i, j) * x.values()[j];
    EXPECT_NEAR(h.values()[i], ref, 1e-14);
  }
}

TEST(MoeLora, SingleExpertEqualsPlainLora) {
  Rng rng(7);
  Tensor w0 = random_tensor({5, 6}, rng);
  Rng r1(3), r2(3);
  MoeLoraLayer moe(w0, 2, 1.0, 0.0, 0.2, r1, {TaskId::World});
  WriterLoraLayer plain(w0, 2, 1.0, 0.0, 0.2, r2, false);
  fill_random(plain.b_fdn(), rng);
  moe.expert_b(TaskId::World) = plain.b_fdn();
  Tensor x = random_tensor({6}, rng);
  Tensor a = moelora_forward(moe, x, GatingWeights{{TaskId::World}, {1.0}});
  Tensor b = forward_adapted(plain, x, TaskId::Foundation, {});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-14);
}

TEST(MoeLora, ScalarThreeExpertArithmetic) {
  Tensor w0 = scalar_matrix(1.0);
  Rng rng(8);
  MoeLoraLayer layer(w0, 1, 1.0, 0.0, 0.02, rng);
  const double a[3] = {1.0, 2.0, -1.0}, b[3] = {0.5, 0.25, 2.0};
  for (int e = 0; e < 3; ++e) {
    layer.expert_a(kDownstreamTasks[e]).values()[0] = a[e];
    layer.expert_b(kDownstreamTasks[e]).values()[0] = b[e];
  }
  GatingWeights g{{TaskId::World, TaskId::Plot, TaskId::Writing}, {0.2, 0.3, 0.5}};
  // 3·1 + (0.2·0.5·1 + 0.3·0.25·2 + 0.5·2·(−1))·3 = 3 + (0.1 + 0.15 − 1)·3 = 0.75
  Tensor h = moelora_forward(layer, Tensor({1}, std::vector<double>{3.0}), g);
  EXPECT_NEAR(h.values()[0], 0.75, 1e-14);
  GatingWeights wrong{{TaskId::World}, {1.0}};
  EXPECT_THROW(moelora_forward(layer, Tensor({1}, std::vector<double>{3.0}), wrong),
               ContractError);
}

TEST(MoeLora, StageTrainsOwnExpert) {
  Transformer model(tiny_config(), 31);
  AdapterSet set = AdapterSet::attach(model, small_spec(AdapterMode::MoELoRA), 5);
  for (const auto& ref : set.trainable_set(TaskId::Plot, TrainAblation::None))
    EXPECT_EQ(ref.task, TaskId::Plot);
  EXPECT_EQ(set.trainable_set(TaskId::Foundation, TrainAblation::None).size(),
            set.tensors().size());
}

TEST(AdapterCheckpoint, RoundTripPreservesTensorsAndLineage) {
  auto dir = std::filesystem::temp_directory_path() / "wlab_adapter_ckpt";
  std::filesystem::remove_all(dir);
  Transformer model(tiny_config(), 32);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  set.enable(TaskId::World);
  set.enable(TaskId::Plot);
  Rng rng(9);
  for (auto& ref : set.tensors()) fill_random(*ref.tensor, rng);
  set.mark_completed(TaskId::Foundation);
  set.mark_completed(TaskId::World);
  const std::string hash = set.save(dir, {{"stage", "world"}});

  Transformer other(tiny_config(), 32);
  AdapterSet loaded = AdapterSet::load(dir, other);
  EXPECT_EQ(loaded.enabled(), set.enabled());
  EXPECT_EQ(loaded.completed(), set.completed());
  auto a = set.tensors(), b = loaded.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key(), b[i].key());
    EXPECT_TRUE(a[i].tensor->bitwise_equal(*b[i].tensor));
  }
  std::vector<TokenId> ids = {1, 5, 8};
  AdapterContext ctx;
  ctx.active = TaskId::Plot;
  EXPECT_TRUE(model.logits(ids, ctx).bitwise_equal(other.logits(ids, ctx)));
  auto dir2 = dir.string() + "_again";
  std::filesystem::remove_all(dir2);
  EXPECT_EQ(loaded.save(dir2, {{"stage", "world"}}), hash);
}

TEST(AdapterDecode, SessionMatchesForwardWithAdapters) {
  Transformer model(tiny_config(), 33);
  AdapterSet set = AdapterSet::attach(model, small_spec(), 5);
  for (TaskId t : kDownstreamTasks) set.enable(t);
  Rng rng(10);
  for (auto& ref : set.tensors()) fill_random(*ref.tensor, rng);
  std::vector<TokenId> ids = {1, 4, 9, 12, 7, 3, 8, 15};
  AdapterContext ctx;
  ctx.active = TaskId::Writing;
  Tensor full = model.logits(ids, ctx);
  DecodeSession session(model, ctx);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto row = session.step(ids[i]);
    for (std::size_t v = 0; v < 20; ++v) EXPECT_NEAR(row[v], full.at(i, v), 1e-9);
  }
}

}  // namespace
}  // namespace wlab
