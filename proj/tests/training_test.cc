// Copyright 2026 The PCsInit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcsinit/training.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "pcsinit/data.h"
#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "test_util.h"

namespace pcsinit {
namespace {

using testing::RandomMatrix;

std::pair<Dataset, Dataset> BlobSplits(std::size_t n, std::size_t p, std::uint64_t seed) {
  const Dataset ds = MakeSynthetic(SyntheticKind::kGaussianBlobs, n, p, 3, {}, seed);
  return Split(ds, 0.7, seed + 1);
}

TrainConfig ShortConfig(Variant v, std::size_t frozen, std::size_t total) {
  TrainConfig c;
  c.variant = v;
  c.n_frozen = frozen;
  c.n_total = total;
  c.seed = 42;
  return c;
}

TEST(CrossEntropyTest, UniformLogitsGiveLogTwo) {
  const std::vector<std::size_t> labels{1};
  const LossAndGradient r = CrossEntropy(Matrix(1, 2), labels);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(r.gradient(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(r.gradient(0, 1), -0.5, 1e-15);
}

TEST(CrossEntropyTest, StableForHugeLogits) {
  const std::vector<std::size_t> labels{0, 1};
  const LossAndGradient r =
      CrossEntropy(Matrix::FromRows({{1000, -1000}, {1000, -1000}}), labels);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 0.5 * 2000.0, 1e-9);
  const LossAndGradient ok = CrossEntropy(Matrix::FromRows({{1000, -1000}}),
                                          std::vector<std::size_t>{0});
  EXPECT_NEAR(ok.loss, 0.0, 1e-300);
}

TEST(CrossEntropyTest, GradientMatchesFiniteDifferences) {
  Matrix z = RandomMatrix(5, 3, 1);
  const std::vector<std::size_t> labels{0, 2, 1, 1, 0};
  const LossAndGradient r = CrossEntropy(z, labels);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < z.values().size(); ++i) {
    const double saved = z.values()[i];
    z.values()[i] = saved + eps;
    const double plus = CrossEntropy(z, labels).loss;
    z.values()[i] = saved - eps;
    const double minus = CrossEntropy(z, labels).loss;
    z.values()[i] = saved;
    EXPECT_NEAR((plus - minus) / (2 * eps), r.gradient.values()[i], 1e-5);
  }
}

TEST(CrossEntropyTest, LabelOutOfRangeThrows) {
  EXPECT_THROW(CrossEntropy(Matrix(1, 2), std::vector<std::size_t>{2}), ContractError);
  EXPECT_THROW(CrossEntropy(Matrix(2, 2), std::vector<std::size_t>{0}), ContractError);
}

TEST(AdamTest, FirstStepClosedForm) {
  std::vector<double> w{0.0};
  const std::vector<double> g{0.5};
  AdamSlot slot;
  AdamConfig cfg;
  AdamUpdate(w, g, slot, cfg);
  // m_hat = g, v_hat = g^2: step = lr g / (|g| + eps).
  EXPECT_NEAR(w[0], -1e-3 * 0.5 / (0.5 + 1e-8), 1e-18);
  EXPECT_EQ(slot.t, 1u);
}

TEST(AdamTest, ZeroGradientOnlyDecaysMoments) {
  std::vector<double> w{1.0, -2.0};
  AdamSlot slot;
  AdamConfig cfg;
  AdamUpdate(w, std::vector<double>{0.3, -0.1}, slot, cfg);
  const std::vector<double> after_first = w;
  const std::vector<double> m = slot.m;
  AdamUpdate(w, std::vector<double>{0.0, 0.0}, slot, cfg);
  EXPECT_NEAR(slot.m[0], 0.9 * m[0], 1e-18);
  // Bias-corrected momentum still moves the parameters.
  EXPECT_NE(w, after_first);
  AdamSlot fresh;
  std::vector<double> still{1.0};
  AdamUpdate(still, std::vector<double>{0.0}, fresh, cfg);
  EXPECT_EQ(still[0], 1.0);
}

TEST(AdamTest, MinimizesQuadratic) {
  std::vector<double> w{1.0};
  AdamSlot slot;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  for (int i = 0; i < 100; ++i) AdamUpdate(w, std::vector<double>{2.0 * w[0]}, slot, cfg);
  EXPECT_LT(std::abs(w[0]), 0.5);
}

TEST(AdamTest, ShapeMismatchThrows) {
  std::vector<double> w{1.0, 2.0};
  AdamSlot slot;
  EXPECT_THROW(AdamUpdate(w, std::vector<double>{1.0}, slot, {}), ContractError);
  AdamUpdate(w, std::vector<double>{1.0, 1.0}, slot, {});
  std::vector<double> longer{1.0, 2.0, 3.0};
  EXPECT_THROW(AdamUpdate(longer, std::vector<double>{1.0, 1.0, 1.0}, slot, {}),
               ContractError);
}

TEST(AdamStepTest, FrozenLayerUntouchedAndMomentsDeferred) {
  Mlp net = Build(std::vector<LayerSpec>{{4, 3, Activation::kRelu, HeInit{1}},
                                         {3, 2, Activation::kIdentity, HeInit{2}}},
                  5);
  SetFrozen(net, 0, true);
  const Mlp before = net;
  const Matrix x = RandomMatrix(8, 4, 6);
  const Gradients g = Backward(net, Forward(net, x), RandomMatrix(8, 2, 7));
  AdamState state;
  AdamStep(state, net, g, {});
  EXPECT_EQ(net.layer(0).weights, before.layer(0).weights);
  EXPECT_EQ(net.layer(0).bias, before.layer(0).bias);
  EXPECT_NE(net.layer(1).weights, before.layer(1).weights);
  EXPECT_FALSE(state.layers[0].has_value());
  ASSERT_TRUE(state.layers[1].has_value());

  SetFrozen(net, 0, false);
  AdamStep(state, net, Backward(net, Forward(net, x), RandomMatrix(8, 2, 7)), {});
  ASSERT_TRUE(state.layers[0].has_value());
  EXPECT_EQ(state.layers[0]->weights.t, 1u);
  EXPECT_EQ(state.layers[1]->weights.t, 2u);
  EXPECT_NE(net.layer(0).weights, before.layer(0).weights);
}

TEST(EvaluateTest, ConstantLogitsFavoringClassZero) {
  Layer l;
  l.weights = Matrix(2, 3);
  l.bias = {1.0, 0.0};
  l.activation = Activation::kIdentity;
  const Mlp net({l});
  const std::vector<std::size_t> labels(4, 0);
  const Evaluation e = Evaluate(net, RandomMatrix(4, 3, 8), labels);
  EXPECT_EQ(e.accuracy, 1.0);
  const Evaluation again = Evaluate(net, RandomMatrix(4, 3, 8), labels);
  EXPECT_EQ(e.loss, again.loss);
}

TEST(EvaluateTest, RandomLabelsNearChance) {
  const Mlp net = Build(std::vector<LayerSpec>{{5, 8, Activation::kRelu, HeInit{1}},
                                               {8, 2, Activation::kIdentity, HeInit{2}}},
                        9);
  std::mt19937_64 rng(10);
  std::vector<std::size_t> labels(10000);
  for (auto& y : labels) y = rng() % 2;
  const Evaluation e = Evaluate(net, RandomMatrix(10000, 5, 11), labels);
  EXPECT_GE(e.accuracy, 0.45);
  EXPECT_LE(e.accuracy, 0.55);
}

TEST(EpochOrderTest, PermutationDependingOnSeedAndEpoch) {
  const auto a = EpochOrder(50, 1, 0);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(a, EpochOrder(50, 1, 0));
  EXPECT_NE(a, EpochOrder(50, 1, 1));
  EXPECT_NE(a, EpochOrder(50, 2, 0));
}

TEST(ValidateTest, RejectsInconsistentConfigs) {
  TrainConfig c;
  c.n_frozen = 10;
  c.n_total = 5;
  EXPECT_THROW(Validate(c), ContractError);
  c = TrainConfig{};
  c.adam.learning_rate = 0.0;
  EXPECT_THROW(Validate(c), ContractError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(Validate(c), ContractError);
  c = TrainConfig{};
  c.n_layers = 1;
  EXPECT_THROW(Validate(c), ContractError);
  EXPECT_NO_THROW(Validate(TrainConfig{}));
}

TEST(VariantTest, NamesRoundTrip) {
  for (Variant v : kAllVariants) EXPECT_EQ(ParseVariant(ToString(v)), v);
  EXPECT_FALSE(ParseVariant("pcsinit-act").has_value());
  EXPECT_EQ(ParseBaselineInit("xavier"), BaselineInit::kXavier);
}

TEST(ArchitectureTest, SharedUpperLayers) {
  const auto [train, test] = BlobSplits(200, 10, 12);
  const PcaModel pca = Fit(train.features, ComponentSelection::VarianceThreshold(0.95));
  const std::size_t r = pca.n_components();
  TrainConfig c;
  const auto pcs = ArchitectureFor(Variant::kPcsInit, 10, r, 3, c, &pca);
  const auto act = ArchitectureFor(Variant::kPcsInitAct, 10, r, 3, c, &pca);
  const auto pnn = ArchitectureFor(Variant::kPcaNn, 10, r, 3, c, &pca);
  const auto plain = ArchitectureFor(Variant::kPlainNn, 10, r, 3, c, &pca);
  ASSERT_EQ(pcs.size(), 5u);
  ASSERT_EQ(pnn.size(), 4u);
  EXPECT_EQ(pcs[0].activation, Activation::kIdentity);
  EXPECT_EQ(act[0].activation, Activation::kRelu);
  EXPECT_EQ(plain[0].activation, Activation::kRelu);
  const Mlp a = Build(pcs, 7);
  const Mlp b = Build(pnn, 7);
  const Mlp d = Build(plain, 7);
  for (std::size_t l = 1; l < 5; ++l) {
    EXPECT_EQ(a.layer(l).weights, b.layer(l - 1).weights);
    EXPECT_EQ(a.layer(l).weights, d.layer(l).weights);
  }
  EXPECT_EQ(a.out_dim(), 3u);
  EXPECT_EQ(b.in_dim(), r);
}

TEST(TrainTest, RecordShapeAndPhases) {
  const auto [train, test] = BlobSplits(150, 8, 13);
  const TrainResult r = Train(ShortConfig(Variant::kPcsInit, 3, 8), train, test);
  ASSERT_EQ(r.record.epochs.size(), 8u);
  for (const auto& m : r.record.epochs) {
    EXPECT_EQ(m.phase, m.epoch <= 3 ? Phase::kFrozen : Phase::kUnfrozen);
    EXPECT_GE(m.train_acc, 0.0);
    EXPECT_LE(m.train_acc, 1.0);
  }
  EXPECT_EQ(r.record.epochs.front().epoch, 1u);
  EXPECT_EQ(r.record.n_components, r.pca->n_components());
  const TrainResult plain = Train(ShortConfig(Variant::kPlainNn, 3, 8), train, test);
  for (const auto& m : plain.record.epochs) EXPECT_EQ(m.phase, Phase::kUnfrozen);
}

TEST(TrainTest, FrozenThroughoutKeepsPrincipalComponents) {
  const auto [train, test] = BlobSplits(150, 8, 14);
  const TrainResult r = Train(ShortConfig(Variant::kPcsInit, 6, 6), train, test);
  EXPECT_EQ(r.net.layer(0).weights, Transpose(r.pca->components));
  for (double b : r.net.layer(0).bias) EXPECT_EQ(b, 0.0);
}

TEST(TrainTest, FirstLayerMovesAfterUnfreezing) {
  const auto [train, test] = BlobSplits(150, 8, 15);
  const TrainResult r = Train(ShortConfig(Variant::kPcsInitAct, 2, 5), train, test);
  EXPECT_NE(r.net.layer(0).weights, Transpose(r.pca->components));
}

TEST(TrainTest, FrozenPcsInitMatchesPcaNn) {
  for (std::uint64_t seed : {16u, 17u, 18u}) {
    const auto [train, test] = BlobSplits(240, 12, seed);
    const TrainResult a = Train(ShortConfig(Variant::kPcsInit, 25, 25), train, test);
    const TrainResult b = Train(ShortConfig(Variant::kPcaNn, 25, 25), train, test);
    ASSERT_EQ(a.record.epochs.size(), b.record.epochs.size());
    for (std::size_t e = 0; e < a.record.epochs.size(); ++e) {
      const auto& x = a.record.epochs[e];
      const auto& y = b.record.epochs[e];
      EXPECT_NEAR(x.train_loss, y.train_loss, 1e-5 * std::abs(y.train_loss));
      EXPECT_NEAR(x.test_loss, y.test_loss, 1e-5 * std::abs(y.test_loss));
    }
    // Identical predicted classes on the test split.
    const Matrix pa = Predict(a.net, test.features);
    const Matrix pb = Predict(b.net, Project(*b.pca, test.features));
    for (std::size_t i = 0; i < pa.rows(); ++i) {
      auto ra = pa.row(i);
      auto rb = pb.row(i);
      EXPECT_EQ(std::max_element(ra.begin(), ra.end()) - ra.begin(),
                std::max_element(rb.begin(), rb.end()) - rb.begin());
    }
  }
}

TEST(TrainTest, DeterministicRecords) {
  const auto [train, test] = BlobSplits(150, 8, 19);
  for (Variant v : kAllVariants) {
    const TrainResult a = Train(ShortConfig(v, 2, 5), train, test);
    const TrainResult b = Train(ShortConfig(v, 2, 5), train, test);
    EXPECT_TRUE(SameOutcome(a.record, b.record)) << ToString(v);
    EXPECT_EQ(a.net, b.net);
  }
}

TEST(TrainTest, SubsetVariantFitsOnFewerRows) {
  const auto [train, test] = BlobSplits(200, 8, 20);
  const TrainResult r = Train(ShortConfig(Variant::kPcsInitSub, 1, 2), train, test);
  EXPECT_EQ(r.pca->n_fitted, 28u);  // ceil(0.2 * 140)
}

TEST(TrainTest, UnfreezingDoesNotHurtTrainingLoss) {
  // Mean final train loss with unfreezing vs. frozen throughout, 10 seeds.
  double unfrozen = 0.0, frozen = 0.0;
  std::vector<double> diffs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto [train, test] = BlobSplits(150, 8, 100 + s);
    TrainConfig c = ShortConfig(Variant::kPcsInit, 5, 30);
    c.seed = s;
    const double a = Train(c, train, test).record.epochs.back().train_loss;
    c.n_frozen = 30;
    const double b = Train(c, train, test).record.epochs.back().train_loss;
    unfrozen += a / 10;
    frozen += b / 10;
    diffs.push_back(a - b);
  }
  double var = 0.0;
  for (double d : diffs) var += (d - (unfrozen - frozen)) * (d - (unfrozen - frozen));
  const double se = std::sqrt(var / 9.0) / std::sqrt(10.0);
  EXPECT_LE(unfrozen, frozen + se);
}

TEST(TrainTest, RejectsBadInputs) {
  const auto [train, test] = BlobSplits(100, 6, 21);
  EXPECT_THROW(Train(ShortConfig(Variant::kPcsInit, 5, 2), train, test), ContractError);
  Dataset narrow = test;
  narrow.features = Matrix(test.n_rows(), 5);
  EXPECT_THROW(Train(ShortConfig(Variant::kPcsInit, 1, 2), train, narrow), ContractError);
}

}  // namespace
}  // namespace pcsinit
