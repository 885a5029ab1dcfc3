// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <gtest/gtest.h>

#include "wlab/model/checkpoint.hpp"
#include "wlab/model/sampling.hpp"
#include "wlab/model/tokenizer.hpp"
#include "wlab/model/transformer.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/io.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

ModelConfig tiny_config(std::size_t vocab) {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 16;
  c.d_ff = 32;
  c.vocab_size = vocab;
  c.max_seq_len = 24;
  return c;
}

std::vector<TokenId> random_ids(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(rng.below(vocab));
  return ids;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wlab_model_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Tokenizer, AbcHasThreeCharactersPlusSpecials) {
  Tokenizer tok = Tokenizer::build("abc");
  EXPECT_EQ(tok.vocab_size(), 10u);
  EXPECT_EQ(tok.codepoints().size(), 3u);
}

TEST(Tokenizer, DeduplicatesCharacters) {
  EXPECT_EQ(Tokenizer::build("aaa").vocab_size(), kNumSpecials + 1);
}

TEST(Tokenizer, DeterministicIdAssignment) {
  const std::string text = "the quick brown fox, 狐狸 jumps";
  Tokenizer a = Tokenizer::build(text), b = Tokenizer::build(text);
  EXPECT_EQ(a.encode(text), b.encode(text));
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Tokenizer, EmptyCorpusIsIngestionError) {
  EXPECT_THROW(Tokenizer::build(""), IngestionError);
}

TEST(Tokenizer, UnknownCharacterIsDataError) {
  EXPECT_THROW(Tokenizer::build("abc").encode("abd"), DataError);
}

TEST(Tokenizer, EncodeDecodeRoundTrip) {
  const std::string text = "Hello, 世界!\nline two";
  Tokenizer tok = Tokenizer::build(text);
  EXPECT_EQ(tok.decode(tok.encode(text)), text);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenId> ids(rng.below(30));
    for (auto& id : ids)
      id = static_cast<TokenId>(kNumSpecials + rng.below(tok.vocab_size() - kNumSpecials));
    EXPECT_EQ(tok.encode(tok.decode(ids)), ids);
  }
}

TEST(Tokenizer, SepAndTaskTags) {
  Tokenizer tok = Tokenizer::build("ab");
  std::string text = std::string("a") + kSepChar + "b";
  auto ids = tok.encode(text);
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[1], kSep);
  EXPECT_EQ(tok.decode(ids), text);
  EXPECT_EQ(Tokenizer::task_tag(TaskId::Writing), kTaskWrite);
}

TEST(Tokenizer, JsonRoundTrip) {
  Tokenizer tok = Tokenizer::build("xyz 中");
  EXPECT_EQ(Tokenizer::from_json(tok.to_json()), tok);
}

TEST(Transformer, OutputShapeAndDeterminism) {
  Transformer model(tiny_config(20), 3);
  Rng rng(1);
  auto ids = random_ids(10, 20, rng);
  Tensor a = model.logits(ids), b = model.logits(ids);
  EXPECT_EQ(a.shape(), (Shape{10, 20}));
  EXPECT_TRUE(a.bitwise_equal(b));
}

TEST(Transformer, CausalUnderSuffixPerturbation) {
  Transformer model(tiny_config(20), 4);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    auto ids = random_ids(n, 20, rng);
    const std::size_t j = 1 + rng.below(n - 1);
    auto perturbed = ids;
    perturbed[j] = static_cast<TokenId>((ids[j] + 1 + rng.below(19)) % 20);
    Tensor a = model.logits(ids), b = model.logits(perturbed);
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t v = 0; v < 20; ++v) ASSERT_EQ(a.at(i, v), b.at(i, v));
  }
}

TEST(Transformer, RejectsEmptyAndOverlongInput) {
  Transformer model(tiny_config(20), 4);
  EXPECT_THROW(model.logits(std::vector<TokenId>{}), LengthError);
  EXPECT_THROW(model.logits(std::vector<TokenId>(25, 1)), LengthError);
}

TEST(Transformer, DecodeSessionMatchesFullForward) {
  Transformer model(tiny_config(20), 6);
  Rng rng(3);
  auto ids = random_ids(16, 20, rng);
  Tensor full = model.logits(ids);
  DecodeSession session(model, {});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto row = session.step(ids[i]);
    for (std::size_t v = 0; v < 20; ++v) EXPECT_NEAR(row[v], full.at(i, v), 1e-9);
  }
}

TEST(Transformer, ConfigValidation) {
  ModelConfig c = tiny_config(20);
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(20);
  c.dropout_p = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Transformer, MaskedPositionsContributeNoGradient) {
  Transformer model(tiny_config(20), 7);
  model.set_backbone_trainable(true);
  Rng rng(4);
  auto ids = random_ids(12, 20, rng);
  std::vector<TokenId> targets(ids.begin() + 1, ids.end());
  std::vector<std::uint8_t> mask = {0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1};
  auto gradients = [&](const std::vector<TokenId>& tgt) {
    for (auto& [name, t] : model.parameters()) t.zero_grad();
    Tape tape;
    std::span<const TokenId> inputs(ids.data(), ids.size() - 1);
    Var loss = masked_cross_entropy(model.forward(tape, inputs, {}), tgt, mask);
    tape.backward(loss);
    std::map<std::string, std::vector<double>> out;
    for (auto& [name, t] : model.parameters())
      out[name].assign(t.grad().begin(), t.grad().end());
    return out;
  };
  auto base = gradients(targets);
  auto permuted = targets;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) permuted[i] = static_cast<TokenId>((permuted[i] + 7) % 20);
  EXPECT_EQ(base, gradients(permuted));
}

TEST(Sampling, GreedyArgmax) {
  Rng rng(0);
  std::vector<double> logits = {0, 5, 1};
  EXPECT_EQ(sample_next(logits, {}, rng), 1u);
}

TEST(Sampling, GreedyTieBreaksToLowestId) {
  Rng rng(0);
  std::vector<double> logits = {2, 2, 0};
  EXPECT_EQ(sample_next(logits, {}, rng), 0u);
}

TEST(Sampling, TopKOneIsGreedyAtAnyTemperature) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(12);
    for (double& v : logits) v = rng.normal();
    const TokenId greedy = sample_next(logits, {}, rng);
    EXPECT_EQ(sample_next(logits, {0.5 + rng.uniform() * 3, 1}, rng), greedy);
  }
}

TEST(Sampling, TopKZeroIsConfigError) {
  Rng rng(0);
  std::vector<double> logits = {1, 2};
  EXPECT_THROW(sample_next(logits, {1.0, 0}, rng), ConfigError);
}

TEST(Sampling, TopKRestrictsSupport) {
  Rng rng(11);
  std::vector<double> logits = {0.0, 3.0, 2.9, -1.0, 2.8};
  for (int i = 0; i < 200; ++i) {
    TokenId id = sample_next(logits, {1.0, 2}, rng);
    EXPECT_TRUE(id == 1 || id == 2);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Tokenizer tok = Tokenizer::build("hello world");
  Transformer model(tiny_config(tok.vocab_size()), 8);
  auto dir1 = scratch_dir("a"), dir2 = scratch_dir("b");
  const std::string h1 = save_model(dir1, model, tok);
  LoadedModel loaded = load_model(dir1);
  EXPECT_EQ(loaded.hash, h1);
  EXPECT_EQ(loaded.tokenizer, tok);
  const std::string h2 = save_model(dir2, loaded.model, loaded.tokenizer);
  EXPECT_EQ(h1, h2);
  EXPECT_EQ(read_file(dir1 / "tensors.bin"), read_file(dir2 / "tensors.bin"));
  std::vector<TokenId> ids = {1, 8, 9, 10};
  EXPECT_TRUE(model.logits(ids).bitwise_equal(loaded.model.logits(ids)));
}

TEST(Checkpoint, CorruptedBlobIsDetected) {
  Tokenizer tok = Tokenizer::build("hello");
  Transformer model(tiny_config(tok.vocab_size()), 8);
  auto dir = scratch_dir("corrupt");
  save_model(dir, model, tok);
  std::string blob = read_file(dir / "tensors.bin");
  blob[blob.size() / 2] ^= 0x01;
  write_file(dir / "tensors.bin", blob);
  EXPECT_THROW(load_model(dir), IngestionError);
}

}  // namespace
}  // namespace wlab
