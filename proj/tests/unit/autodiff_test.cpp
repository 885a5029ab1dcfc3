// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "wlab/autodiff/ops.hpp"
#include "wlab/util/error.hpp"
#include "wlab/util/rng.hpp"

namespace wlab {
namespace {

Tensor run(const std::function<Var(Tape&)>& f) {
  Tape tape;
  return f(tape).value();
}

TEST(MatmulTest, IdentityLeavesMatrixUnchanged) {
  Tensor out = run([](Tape& t) {
    return matmul(t.constant(Tensor::matrix({{1, 0}, {0, 1}})),
                  t.constant(Tensor::matrix({{3, 4}, {5, 6}})));
  });
  EXPECT_TRUE(out.bitwise_equal(Tensor::matrix({{3, 4}, {5, 6}})));
}

TEST(MatmulTest, RowTimesColumn) {
  Tensor out = run([](Tape& t) {
    return matmul(t.constant(Tensor::matrix({{1, 2}})), t.constant(Tensor::matrix({{3}, {4}})));
  });
  ASSERT_EQ(out.shape(), (Shape{1, 1}));
  EXPECT_EQ(out[0], 11.0);
}

TEST(MatmulTest, ZeroMatrixAnnihilates) {
  Rng rng(3);
  Tensor b(Shape{4, 3});
  for (double& x : b.values()) x = rng.normal();
  Tensor out = run([&](Tape& t) { return matmul(t.constant(Tensor(Shape{2, 4})), t.constant(b)); });
  for (double x : out.values()) EXPECT_EQ(x, 0.0);
}

TEST(MatmulTest, ShapeMismatchNamesBothShapes) {
  Tape t;
  try {
    matmul(t.constant(Tensor(Shape{2, 3})), t.constant(Tensor(Shape{4, 5})));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[4x5]"), std::string::npos);
  }
}

TEST(MatmulTest, AssociativeOnRandomTriples) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto rnd = [&](std::size_t r, std::size_t c) {
      Tensor x(Shape{r, c});
      for (double& v : x.values()) v = rng.normal();
      return x;
    };
    Tensor a = rnd(3, 4), b = rnd(4, 2), c = rnd(2, 5);
    Tape t;
    Var va = t.constant(a), vb = t.constant(b), vc = t.constant(c);
    const Tensor left = matmul(matmul(va, vb), vc).value();
    const Tensor right = matmul(va, matmul(vb, vc)).value();
    for (std::size_t i = 0; i < left.numel(); ++i) {
      EXPECT_LE(std::abs(left[i] - right[i]), 1e-10 * std::max(1.0, std::abs(left[i])));
    }
  }
}

TEST(SoftmaxTest, SymmetricInputsGiveUniform) {
  Tensor out = run([](Tape& t) { return softmax(t.constant(Tensor::vector({0, 0}))); });
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.5);
}

TEST(SoftmaxTest, ActiveEntryDominates) {
  Tensor out = run([](Tape& t) { return softmax(t.constant(Tensor::vector({1, 0, 0}))); });
  // e / (e + 2), 1 / (e + 2)
  EXPECT_NEAR(out[0], 0.5761, 1e-4);
  EXPECT_NEAR(out[1], 0.2119, 1e-4);
  EXPECT_NEAR(out[2], 0.2119, 1e-4);
}

TEST(SoftmaxTest, SingletonIsOne) {
  for (double x : {-1e3, -2.5, 0.0, 7.0, 1e3}) {
    Tensor out = run([x](Tape& t) { return softmax(t.constant(Tensor::vector({x}))); });
    EXPECT_EQ(out[0], 1.0);
  }
}

TEST(SoftmaxTest, EmptyIsDomainError) {
  Tape t;
  EXPECT_THROW(softmax(t.constant(Tensor(Shape{0}))), DomainError);
}

TEST(SoftmaxTest, SumsToOneAndPermutationEquivariant) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(9);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(0.0, 5.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<double> pv(n);
    for (std::size_t i = 0; i < n; ++i) pv[i] = v[perm[i]];
    Tensor y = run([&](Tape& t) { return softmax(t.constant(Tensor(Shape{n}, v))); });
    Tensor py = run([&](Tape& t) { return softmax(t.constant(Tensor(Shape{n}, pv))); });
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += y[i];
      EXPECT_GT(y[i], 0.0);
      EXPECT_NEAR(py[i], y[perm[i]], 1e-15);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(CrossEntropyTest, UniformLogitsGiveLogV) {
  Tensor out = run([](Tape& t) { return cross_entropy(t.constant(Tensor::vector({0, 0, 0, 0})), 2); });
  EXPECT_NEAR(out.item(), std::log(4.0), 1e-12);
}

TEST(CrossEntropyTest, LargeMarginIsNearZero) {
  Tensor out = run([](Tape& t) { return cross_entropy(t.constant(Tensor::vector({0, 100, 0, 0})), 1); });
  EXPECT_LT(out.item(), 1e-10);
}

TEST(CrossEntropyTest, SingleClassIsExactlyZero) {
  Tensor out = run([](Tape& t) { return cross_entropy(t.constant(Tensor::vector({3.7})), 0); });
  EXPECT_EQ(out.item(), 0.0);
}

TEST(CrossEntropyTest, TargetOutOfRange) {
  Tape t;
  EXPECT_THROW(cross_entropy(t.constant(Tensor::vector({1, 2})), 2), IndexError);
}

TEST(CrossEntropyTest, GradientIsSoftmaxMinusOneHot) {
  Tensor logits = Tensor::vector({0.5, -1.0, 2.0});
  logits.set_requires_grad(true);
  Tape t;
  t.backward(cross_entropy(t.leaf(logits), 2));
  Tape ref;
  const Tensor p = softmax(ref.constant(Tensor::vector({0.5, -1.0, 2.0}))).value();
  EXPECT_NEAR(logits.grad()[0], p[0], 1e-15);
  EXPECT_NEAR(logits.grad()[1], p[1], 1e-15);
  EXPECT_NEAR(logits.grad()[2], p[2] - 1.0, 1e-15);
}

TEST(BackwardTest, SumGivesOnes) {
  Tensor x(Shape{2, 3}, 0.25);
  x.set_requires_grad(true);
  Tape t;
  t.backward(sum(t.leaf(x)));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(BackwardTest, SquareAtThree) {
  Tensor x = Tensor::scalar(3.0);
  x.set_requires_grad(true);
  Tape t;
  Var v = t.leaf(x);
  t.backward(mul(v, v));
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(BackwardTest, DetachedTensorHasNoGrad) {
  Tensor x = Tensor::vector({1, 2});
  Tensor frozen = Tensor::vector({3, 4});
  x.set_requires_grad(true);
  Tape t;
  Var a = t.leaf(x);
  Var b = t.leaf(frozen);
  t.backward(sum(mul(add(a, detach(a)), b)));
  EXPECT_FALSE(frozen.has_grad());
  EXPECT_EQ(x.grad()[0], 3.0);
  EXPECT_EQ(x.grad()[1], 4.0);
}

TEST(BackwardTest, SecondCallIsAnError) {
  Tensor x = Tensor::scalar(1.0);
  x.set_requires_grad(true);
  Tape t;
  Var loss = mul(t.leaf(x), t.leaf(x));
  t.backward(loss);
  EXPECT_THROW(t.backward(loss), ContractError);
  t.reset();
  Var again = mul(t.leaf(x), t.leaf(x));
  EXPECT_NO_THROW(t.backward(again));
  EXPECT_EQ(x.grad()[0], 4.0);  // accumulated across the two sweeps
}

TEST(BackwardTest, NonScalarLossRejected) {
  Tensor x = Tensor::vector({1, 2});
  x.set_requires_grad(true);
  Tape t;
  EXPECT_THROW(t.backward(t.leaf(x)), ShapeError);
}

TEST(BackwardTest, TapeIsTopologicallyOrdered) {
  Tensor x = Tensor::vector({1, 2});
  Tape t;
  Var a = t.leaf(x);
  Var b = scale(a, 2.0);
  Var c = add(a, b);
  EXPECT_LT(a.id(), b.id());
  EXPECT_LT(b.id(), c.id());
  Tape other;
  EXPECT_THROW(add(a, other.constant(x)), ContractError);
}

TEST(DropoutTest, EvalModeIsBitExactIdentity) {
  Rng rng(1);
  Tensor x(Shape{3, 3});
  for (double& v : x.values()) v = rng.normal();
  Tape t;
  Var in = t.constant(x);
  Var out = dropout(in, 0.5, rng, false);
  EXPECT_EQ(out.id(), in.id());
  EXPECT_TRUE(out.value().bitwise_equal(x));
}

TEST(DropoutTest, TrainModeUsesInvertedScaling) {
  Rng rng(2);
  Tensor x(Shape{4000}, 1.0);
  Tape t;
  const Tensor y = dropout(t.constant(x), 0.25, rng, true).value();
  double total = 0.0;
  for (double v : y.values()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15);
    total += v;
  }
  EXPECT_NEAR(total / 4000.0, 1.0, 0.05);
}

TEST(AttentionTest, FirstPositionCopiesItsValue) {
  Rng rng(4);
  Tensor q(Shape{3, 4}), k(Shape{3, 4}), v(Shape{3, 4});
  for (Tensor* m : {&q, &k, &v})
    for (double& x : m->values()) x = rng.normal();
  Tape t;
  const Tensor out = causal_attention(t.constant(q), t.constant(k), t.constant(v), 2).value();
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out.at(0, c), v.at(0, c), 1e-15);
}

TEST(EmbeddingTest, OutOfRangeId) {
  Tape t;
  std::vector<TokenId> ids{0, 5};
  EXPECT_THROW(embedding(t.constant(Tensor(Shape{3, 2})), ids), IndexError);
}

class GradCheckTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradCheckTest, MatchesCentralDifferences) {
  const auto cases = testing::all_grad_cases();
  const auto& gc = cases.at(GetParam());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [inputs, build] = gc.make(1000 + seed);
    const auto result = testing::check_gradients(std::move(inputs), build, 1e-5);
    EXPECT_LE(result.max_relative_error, 1e-4) << gc.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradCheckTest,
                         ::testing::Range<std::size_t>(0, testing::all_grad_cases().size()),
                         [](const auto& info) { return testing::all_grad_cases()[info.param].name; });

}  // namespace
}  // namespace wlab
