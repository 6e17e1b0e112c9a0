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

#include "pcsinit/theory.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "pcsinit/data.h"
#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "pcsinit/training.h"
#include "test_util.h"

namespace pcsinit {
namespace {

using testing::NaiveMatMul;
using testing::NaiveTranspose;
using testing::RandomMatrix;

Matrix Orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return HouseholderQr(RandomMatrix(rows, cols, seed)).q;
}

Mlp PcsInitNet(const Matrix& x, Activation first, std::uint64_t seed) {
  const PcaModel m = Fit(x, ComponentSelection::VarianceThreshold(0.95));
  TrainConfig c;
  c.n_layers = 4;
  auto specs = ArchitectureFor(first == Activation::kRelu ? Variant::kPcsInitAct
                                                          : Variant::kPcsInit,
                               x.cols(), m.n_components(), 3, c, &m);
  return Build(specs, seed);
}

TEST(ConditioningTest, IsotropicDataGivesUnitKappa) {
  const Matrix x = Orthonormal(40, 6, 1);
  const TheoremReport r = CheckConditioning(x, ComponentSelection::VarianceThreshold(0.95));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("kappa_full"), 1.0, 1e-9);
  EXPECT_NEAR(r.quantity("kappa_reduced"), 1.0, 1e-9);
  EXPECT_EQ(r.id, TheoremId::kConditioning);
}

TEST(ConditioningTest, ConstructedSpectrum) {
  // X = Q diag(sqrt(lambda)) P^T, so X^T X has eigenvalues lambda.
  const std::vector<double> lambda{100, 10, 1, 0.01};
  Matrix d(4, 4);
  for (std::size_t i = 0; i < 4; ++i) d(i, i) = std::sqrt(lambda[i]);
  const Matrix x = NaiveMatMul(NaiveMatMul(Orthonormal(30, 4, 2), d),
                               NaiveTranspose(Orthonormal(4, 4, 3)));
  const TheoremReport r = CheckConditioning(x, ComponentSelection::FixedCount(3));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("kappa_full") / 1e4, 1.0, 1e-8);
  EXPECT_NEAR(r.quantity("kappa_reduced") / 100.0, 1.0, 1e-8);
  EXPECT_NEAR(r.quantity("lambda_1"), 100.0, 1e-9);
  EXPECT_NEAR(r.quantity("lambda_r"), 1.0, 1e-9);
}

TEST(ConditioningTest, RandomMatricesAlwaysPass) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TheoremReport r =
        CheckConditioning(RandomMatrix(50, 20, seed), ComponentSelection::VarianceThreshold(0.95));
    EXPECT_TRUE(r.pass) << "seed " << seed;
    EXPECT_LE(r.quantity("kappa_reduced"), r.quantity("kappa_full"));
  }
}

TEST(ConditioningTest, ScaleCovariant) {
  const Matrix x = RandomMatrix(30, 8, 4);
  Matrix scaled = x;
  for (double& v : scaled.values()) v *= 7.5;
  const auto sel = ComponentSelection::VarianceThreshold(0.9);
  const TheoremReport a = CheckConditioning(x, sel);
  const TheoremReport b = CheckConditioning(scaled, sel);
  EXPECT_NEAR(b.quantity("kappa_full") / a.quantity("kappa_full"), 1.0, 1e-9);
  EXPECT_NEAR(b.quantity("kappa_reduced") / a.quantity("kappa_reduced"), 1.0, 1e-9);
}

TEST(ConditioningTest, RankDeficientData) {
  const Matrix x = NaiveMatMul(RandomMatrix(20, 3, 5), RandomMatrix(3, 10, 6));
  const TheoremReport r = CheckConditioning(x, ComponentSelection::VarianceThreshold(1.0));
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(std::isfinite(r.quantity("kappa_full")));
}

TEST(LipschitzTest, IdentityFirstLayer) {
  const Mlp net = PcsInitNet(RandomMatrix(80, 10, 7), Activation::kIdentity, 1);
  const TheoremReport r = CheckLipschitz(net, 1000, 2);
  EXPECT_EQ(r.id, TheoremId::kLipschitzLinear);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("sigma_max"), 1.0, 1e-6);
  EXPECT_LE(r.quantity("sup_ratio"), 1.0 + 1e-6);
  EXPECT_EQ(r.trials, 1000u);
}

TEST(LipschitzTest, ReluFirstLayer) {
  const Mlp net = PcsInitNet(RandomMatrix(80, 10, 8), Activation::kRelu, 3);
  const TheoremReport r = CheckLipschitz(net, 1000, 4);
  EXPECT_EQ(r.id, TheoremId::kLipschitzAct);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.quantity("sup_ratio"), 1.0 + 1e-6);
}

TEST(LipschitzTest, ScaledLayerReachesItsNorm) {
  Mlp net = PcsInitNet(RandomMatrix(80, 10, 9), Activation::kIdentity, 5);
  for (double& w : net.layer(0).weights.values()) w *= 3.0;
  // Still tagged as principal components: sigma_max = 3 fails that check.
  EXPECT_FALSE(CheckLipschitz(net, 200, 6).pass);
  net.layer(0).init_kind = InitKind::kHe;
  const TheoremReport r = CheckLipschitz(net, 200, 6);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("sup_ratio"), 3.0, 1e-3);
}

PcaModel ModelWith(const Matrix& components) {
  PcaModel m;
  m.components = components;
  m.eigenvalues.assign(components.cols(), 1.0);
  m.explained_variance_ratio.assign(components.cols(), 0.1);
  m.mean.assign(components.rows(), 0.0);
  m.scale.assign(components.rows(), 1.0);
  m.n_fitted = 2;
  return m;
}

TEST(NoiseDistributionTest, ZeroSigmaIsExactlyZero) {
  const TheoremReport r = CheckNoiseDistribution(ModelWith(Orthonormal(5, 2, 10)), 0.0,
                                                 10000, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.quantity("max_cov_gap"), 0.0);
}

TEST(NoiseDistributionTest, SquareOrthonormalGivesIdentityCovariance) {
  const TheoremReport r = CheckNoiseDistribution(ModelWith(Orthonormal(2, 2, 11)), 1.0,
                                                 100000, 2);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.quantity("max_cov_gap"), 0.05);
  EXPECT_EQ(r.id, TheoremId::kNoiseDistribution);
}

TEST(NoiseDistributionTest, NonOrthonormalComponentsUseGram) {
  // sigma^2 W^T W is checked whatever W is.
  Matrix w = RandomMatrix(4, 2, 12);
  const TheoremReport r = CheckNoiseDistribution(ModelWith(w), 0.7, 50000, 3);
  EXPECT_TRUE(r.pass);
}

TEST(NoiseDistributionTest, NeedsEnoughSamples) {
  EXPECT_THROW(CheckNoiseDistribution(ModelWith(Orthonormal(3, 2, 13)), 1.0, 100, 1),
               ContractError);
}

TEST(NoiseNormTest, ContractionWhenReduced) {
  const TheoremReport r = CheckNoiseNorm(ModelWith(Orthonormal(10, 3, 14)), 1.0, 5000, 4);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.quantity("max_ratio"), 1.0 + 1e-12);
  EXPECT_GT(r.quantity("equality_max_gap"), 0.0);
  EXPECT_NEAR(r.quantity("mean_ratio"), std::sqrt(0.3), 0.05);
}

TEST(NoiseNormTest, EqualityWhenSquare) {
  const TheoremReport r = CheckNoiseNorm(ModelWith(Orthonormal(4, 4, 15)), 2.0, 2000, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.quantity("equality_max_gap"), 1e-12);
}

TEST(LayerNoiseBoundTest, IdentityNetworkIsTight) {
  std::vector<Layer> layers(3);
  for (Layer& l : layers) {
    l.weights = Matrix::Identity(5);
    l.bias.assign(5, 0.0);
    l.activation = Activation::kIdentity;
  }
  const TheoremReport r = CheckLayerNoiseBound(Mlp(layers), 0.5, 200, 6);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("max_tightness"), 1.0, 1e-6);
}

TEST(LayerNoiseBoundTest, PrincipalComponentsFirstFactorIsOne) {
  const Mlp net = PcsInitNet(RandomMatrix(60, 9, 16), Activation::kIdentity, 7);
  const TheoremReport r = CheckLayerNoiseBound(net, 1.0, 300, 8);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.quantity("first_layer_norm"), 1.0, 1e-6);
  EXPECT_LE(r.quantity("max_tightness"), 1.0 + 1e-6);
}

TEST(LayerNoiseBoundTest, RandomReluNetNeverViolates) {
  const Mlp net = Build(std::vector<LayerSpec>{{7, 6, Activation::kRelu, HeInit{1}},
                                               {6, 6, Activation::kRelu, HeInit{2}},
                                               {6, 5, Activation::kRelu, HeInit{3}},
                                               {5, 3, Activation::kIdentity, HeInit{4}}},
                        9);
  const TheoremReport r = CheckLayerNoiseBound(net, 1.0, 1000, 10);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.quantity("violations"), 0.0);
  EXPECT_LE(r.quantity("max_tightness"), 1.0);
}

TEST(TheorySuiteTest, SixPassingReports) {
  const Dataset ds = MakeSynthetic(SyntheticKind::kGaussianBlobs, 200, 12, 3, {}, 11);
  const auto [train, test] = Split(ds, 0.7, 12);
  TheorySuiteConfig c;
  c.conditioning_draws = 5;
  c.noise_samples = 20000;
  c.lipschitz_pairs = 200;
  c.bound_samples = 200;
  c.n_classes = 3;
  const auto reports = RunTheorySuite(train.features, c);
  ASSERT_EQ(reports.size(), 6u);
  const TheoremId ids[] = {TheoremId::kConditioning,      TheoremId::kLipschitzLinear,
                           TheoremId::kLipschitzAct,      TheoremId::kNoiseDistribution,
                           TheoremId::kNoiseNorm,         TheoremId::kLayerNoiseBound};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(reports[i].id, ids[i]);
    EXPECT_TRUE(reports[i].pass) << ToString(reports[i].id);
  }
  EXPECT_EQ(reports[0].trials, 5u);

  c.noise_sigma = 0.0;
  for (const auto& r : RunTheorySuite(train.features, c)) EXPECT_TRUE(r.pass);
}

}  // namespace
}  // namespace pcsinit
