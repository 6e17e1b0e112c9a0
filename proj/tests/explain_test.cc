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

#include "pcsinit/explain.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "pcsinit/network.h"
#include "pcsinit/pca.h"
#include "test_util.h"

namespace pcsinit {
namespace {

using testing::RandomMatrix;

Predictor Linear(std::vector<double> w) {
  return [w](const Matrix& x) {
    Matrix y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) y(i, 0) += w[j] * x(i, j);
    return y;
  };
}

Predictor NetPredictor(const Mlp& net) {
  return [net](const Matrix& x) { return Predict(net, x); };
}

Mlp SixFeatureNet(std::uint64_t seed) {
  return Build(std::vector<LayerSpec>{{6, 8, Activation::kRelu, HeInit{1}},
                                      {8, 8, Activation::kRelu, HeInit{2}},
                                      {8, 3, Activation::kIdentity, HeInit{3}}},
               seed);
}

std::vector<double> Row(const Matrix& m, std::size_t i) {
  return {m.row(i).begin(), m.row(i).end()};
}

TEST(KernelShapTest, LinearModelClosedForm) {
  const std::vector<double> w{2.0, -1.0, 0.5, 3.0};
  const std::vector<double> x{1.0, 2.0, -1.0, 0.5};
  const std::vector<double> b{0.5, -0.5, 0.0, 1.0};
  ShapConfig cfg;
  cfg.background = Matrix(1, 4, b);
  const Attribution a = KernelShap(Linear(w), x, cfg);
  EXPECT_TRUE(a.exact);
  for (std::size_t j = 0; j < 4; ++j)
    EXPECT_NEAR(a.values(0, j), w[j] * (x[j] - b[j]), 1e-10);
  const std::vector<double> oracle = ExactShapley(Linear(w), x, cfg.background, 0);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(oracle[j], w[j] * (x[j] - b[j]), 1e-12);
}

TEST(KernelShapTest, SymmetryForDuplicatedFeatures) {
  // f depends on x0 + x1 symmetrically and on x2.
  const Predictor f = [](const Matrix& x) {
    Matrix y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i)
      y(i, 0) = std::tanh(x(i, 0) + x(i, 1)) * x(i, 2) + x(i, 0) * x(i, 1);
    return y;
  };
  ShapConfig cfg;
  cfg.background = RandomMatrix(10, 3, 1);
  for (std::size_t i = 0; i < 10; ++i) cfg.background(i, 1) = cfg.background(i, 0);
  const std::vector<double> x{0.7, 0.7, -1.2};
  const Attribution a = KernelShap(f, x, cfg);
  EXPECT_NEAR(a.values(0, 0), a.values(0, 1), 1e-8);
}

TEST(KernelShapTest, LocalAccuracyAndDummyOnNetwork) {
  Mlp net = SixFeatureNet(3);
  // Feature 4 is ignored by the first layer.
  for (std::size_t i = 0; i < 8; ++i) net.layer(0).weights(i, 4) = 0.0;
  ShapConfig cfg;
  cfg.background = RandomMatrix(20, 6, 4);
  const Matrix xs = RandomMatrix(5, 6, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const Attribution a = KernelShap(NetPredictor(net), xs.row(i), cfg);
    for (std::size_t c = 0; c < 3; ++c) {
      double sum = a.base_value[c];
      for (std::size_t j = 0; j < 6; ++j) sum += a.values(c, j);
      EXPECT_NEAR(sum, a.prediction[c], 1e-6);
      EXPECT_NEAR(a.values(c, 4), 0.0, 1e-8);
      EXPECT_NEAR(a.residual[c], 0.0, 1e-9);
    }
  }
}

TEST(KernelShapTest, ExactModeMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mlp net = SixFeatureNet(seed);
    ShapConfig cfg;
    cfg.background = RandomMatrix(15, 6, seed + 10);
    const Matrix x = RandomMatrix(1, 6, seed + 20);
    const Attribution a = KernelShap(NetPredictor(net), x.row(0), cfg);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto oracle = ExactShapley(NetPredictor(net), x.row(0), cfg.background, c);
      for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(a.values(c, j), oracle[j], 1e-6);
    }
  }
}

TEST(KernelShapTest, SampledModeCloseToEnumeration) {
  const Mlp net = SixFeatureNet(30);
  ShapConfig cfg;
  cfg.background = RandomMatrix(15, 6, 31);
  cfg.n_coalitions = 2000;
  cfg.seed = 32;
  const Matrix x = RandomMatrix(1, 6, 33);
  const Attribution a = KernelShap(NetPredictor(net), x.row(0), cfg);
  EXPECT_FALSE(a.exact);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto oracle = ExactShapley(NetPredictor(net), x.row(0), cfg.background, c);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(a.values(c, j), oracle[j], 0.05);
  }
  // Same seed, same answer.
  const Attribution again = KernelShap(NetPredictor(net), x.row(0), cfg);
  EXPECT_EQ(a.values, again.values);
}

TEST(KernelShapTest, SingleFeature) {
  ShapConfig cfg;
  cfg.background = Matrix(3, 1, std::vector<double>{0.0, 1.0, 2.0});
  const Predictor sq = [](const Matrix& x) {
    Matrix y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) y(i, 0) = x(i, 0) * x(i, 0);
    return y;
  };
  const std::vector<double> x{3.0};
  const Attribution a = KernelShap(sq, x, cfg);
  EXPECT_NEAR(a.values(0, 0), 9.0 - 5.0 / 3.0, 1e-12);
  EXPECT_NEAR(ExactShapley(sq, x, cfg.background, 0)[0], 9.0 - 5.0 / 3.0, 1e-12);
}

TEST(KernelShapTest, SingularSystemRaisesRegularization) {
  // Two coalitions drawn in one pair cannot determine five free values.
  ShapConfig cfg;
  cfg.background = RandomMatrix(4, 6, 40);
  cfg.n_coalitions = 2;
  cfg.regularization = 0.0;
  const Attribution a =
      KernelShap(Linear({1, 2, 3, 4, 5, 6}), Row(RandomMatrix(1, 6, 41), 0), cfg);
  EXPECT_TRUE(a.regularization_increased);
  EXPECT_GT(a.regularization, 0.0);
  EXPECT_NEAR(a.residual[0], 0.0, 1e-9);
}

TEST(KernelShapTest, ContractViolations) {
  ShapConfig cfg;
  const std::vector<double> x16(16, 1.0);
  cfg.background = Matrix(1, 16);
  EXPECT_THROW(KernelShap(Linear(std::vector<double>(16, 1.0)), x16, cfg), ContractError);
  EXPECT_THROW(ExactShapley(Linear(std::vector<double>(16, 1.0)), x16, cfg.background, 0),
               ContractError);
  cfg.background = Matrix();
  EXPECT_THROW(KernelShap(Linear({1.0}), std::vector<double>{1.0}, cfg), ContractError);
  cfg.background = Matrix(2, 3);
  EXPECT_THROW(KernelShap(Linear({1.0, 1.0}), std::vector<double>{1.0, 1.0}, cfg),
               ContractError);
}

TEST(ExactShapleyTest, AdditiveModelPerTermDifferences) {
  const Predictor f = [](const Matrix& x) {
    Matrix y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i)
      y(i, 0) = std::sin(x(i, 0)) + x(i, 1) * x(i, 1) + std::exp(0.3 * x(i, 2));
    return y;
  };
  const Matrix bg = RandomMatrix(7, 3, 50);
  const std::vector<double> x{0.4, -1.1, 0.9};
  const auto phi = ExactShapley(f, x, bg, 0);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    m0 += std::sin(bg(i, 0)) / 7;
    m1 += bg(i, 1) * bg(i, 1) / 7;
    m2 += std::exp(0.3 * bg(i, 2)) / 7;
  }
  EXPECT_NEAR(phi[0], std::sin(0.4) - m0, 1e-12);
  EXPECT_NEAR(phi[1], 1.21 - m1, 1e-12);
  EXPECT_NEAR(phi[2], std::exp(0.27) - m2, 1e-12);
}

PcaModel SquareModel(std::size_t p) {
  PcaModel m;
  m.components = Matrix::Identity(p);
  m.eigenvalues.assign(p, 1.0);
  m.explained_variance_ratio.assign(p, 1.0 / static_cast<double>(p));
  m.mean.assign(p, 0.0);
  m.scale.assign(p, 1.0);
  m.n_fitted = 10;
  return m;
}

Attribution ComponentAttribution(std::vector<double> phi) {
  Attribution a;
  a.values = Matrix(1, phi.size(), phi);
  a.base_value = {0.0};
  a.prediction = {0.0};
  for (double v : phi) a.prediction[0] += v;
  a.residual = {0.0};
  a.unit_kind = UnitKind::kPrincipalComponent;
  return a;
}

TEST(BackProjectTest, HandArithmetic) {
  PcaModel m = SquareModel(2);
  m.components = Matrix(2, 1, std::vector<double>{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
  const BackProjection bp = BackProject(ComponentAttribution({2.0}), m);
  EXPECT_NEAR(bp.features.values(0, 0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(bp.features.values(0, 1), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(bp.features.provenance, Provenance::kBackProjected);
  EXPECT_EQ(bp.features.unit_kind, UnitKind::kFeature);
  // Totals differ when r < p; the gap is reported.
  EXPECT_NEAR(bp.total_residual[0], 2 * std::sqrt(2.0) - 2.0, 1e-15);
  EXPECT_NEAR(bp.contributions[0](1, 0), std::sqrt(2.0), 1e-15);
}

TEST(BackProjectTest, ZeroAttributionStaysZero) {
  PcaModel m = SquareModel(3);
  m.components = HouseholderQr(RandomMatrix(3, 2, 60)).q;
  const BackProjection bp = BackProject(ComponentAttribution({0.0, 0.0}), m);
  for (double v : bp.features.values.values()) EXPECT_EQ(v, 0.0);
}

TEST(BackProjectTest, IdentityLoadingMatchesDirectAttribution) {
  const std::size_t p = 4;
  const PcaModel m = SquareModel(p);
  const Mlp net = Build(std::vector<LayerSpec>{{p, 6, Activation::kRelu, HeInit{1}},
                                               {6, 2, Activation::kIdentity, HeInit{2}}},
                        61);
  ShapConfig cfg;
  cfg.background = RandomMatrix(12, p, 62);
  const Matrix x = RandomMatrix(1, p, 63);
  // Component space and feature space coincide: project is the identity.
  const Predictor through_pca = [&](const Matrix& z) { return Predict(net, z); };
  const Predictor composed = [&](const Matrix& f) { return Predict(net, Project(m, f)); };
  Attribution comp = KernelShap(through_pca, x.row(0), cfg);
  comp.unit_kind = UnitKind::kPrincipalComponent;
  const BackProjection bp = BackProject(comp, m);
  const Attribution direct = KernelShap(composed, x.row(0), cfg);
  EXPECT_EQ(bp.features.values, comp.values);
  EXPECT_LT(MaxAbsDiff(bp.features.values, direct.values), 1e-9);
  for (double r : bp.total_residual) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(BackProjectTest, LengthMismatchThrows) {
  EXPECT_THROW(BackProject(ComponentAttribution({1.0, 2.0}), SquareModel(3)), ContractError);
  Attribution features = ComponentAttribution({1.0, 2.0, 3.0});
  features.unit_kind = UnitKind::kFeature;
  EXPECT_THROW(BackProject(features, SquareModel(3)), ContractError);
}

TEST(GlobalImportanceTest, SingleAndOpposite) {
  Attribution a = ComponentAttribution({0.5, -2.0, 1.0});
  auto ranked = GlobalImportance(std::vector<Attribution>{a});
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0][0].unit, 1u);
  EXPECT_EQ(ranked[0][0].mean_abs, 2.0);
  EXPECT_EQ(ranked[0][2].unit, 0u);

  Attribution b = a;
  for (double& v : b.values.values()) v = -v;
  ranked = GlobalImportance(std::vector<Attribution>{a, b});
  EXPECT_EQ(ranked[0][0].mean_abs, 2.0);
  EXPECT_EQ(ranked[0][1].mean_abs, 1.0);
  EXPECT_EQ(ranked[0][2].mean_abs, 0.5);
}

TEST(GlobalImportanceTest, TiesKeepIndexOrder) {
  const auto ranked =
      GlobalImportance(std::vector<Attribution>{ComponentAttribution({1.0, -1.0, 1.0})});
  EXPECT_EQ(ranked[0][0].unit, 0u);
  EXPECT_EQ(ranked[0][1].unit, 1u);
  EXPECT_EQ(ranked[0][2].unit, 2u);
}

TEST(GlobalImportanceTest, MatchesNaiveRecompute) {
  std::mt19937_64 rng(70);
  std::normal_distribution<double> normal;
  std::vector<Attribution> all;
  for (int i = 0; i < 50; ++i) {
    Attribution a;
    a.values = RandomMatrix(2, 7, rng);
    a.base_value = {0, 0};
    a.prediction = {0, 0};
    a.residual = {0, 0};
    all.push_back(a);
  }
  const auto ranked = GlobalImportance(all);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < 7; ++k) {
      const std::size_t j = ranked[c][k].unit;
      double naive = 0.0;
      for (const auto& a : all) naive += std::abs(a.values(c, j));
      EXPECT_NEAR(ranked[c][k].mean_abs, naive / 50.0, 1e-14);
      if (k > 0) EXPECT_GE(ranked[c][k - 1].mean_abs, ranked[c][k].mean_abs);
    }
  }
  EXPECT_THROW(GlobalImportance(std::vector<Attribution>{}), ContractError);
}

TEST(SelectBackgroundTest, CapsRowsAndKeepsOrder) {
  Matrix data(300, 1);
  for (std::size_t i = 0; i < 300; ++i) data(i, 0) = static_cast<double>(i);
  const Matrix bg = SelectBackground(data, 100, 5);
  ASSERT_EQ(bg.rows(), 100u);
  for (std::size_t i = 1; i < 100; ++i) EXPECT_LT(bg(i - 1, 0), bg(i, 0));
  EXPECT_EQ(SelectBackground(data, 100, 5), bg);
  EXPECT_EQ(SelectBackground(data, 500, 5).rows(), 300u);
}

TEST(ExportTest, CsvColumns) {
  const auto dir = std::filesystem::temp_directory_path() / "pcsinit_explain_test";
  std::filesystem::create_directories(dir);
  PcaModel m = SquareModel(2);
  m.components = Matrix(2, 1, std::vector<double>{0.6, 0.8});
  const Attribution a = ComponentAttribution({2.0});
  const BackProjection bp = BackProject(a, m);
  WriteAttributionCsv(std::vector<Attribution>{bp.features}, dir / "attr.csv");
  WriteHeatmapCsv(std::vector<BackProjection>{bp}, dir / "heat.csv");
  std::ifstream attr(dir / "attr.csv");
  std::string header, first;
  std::getline(attr, header);
  std::getline(attr, first);
  EXPECT_EQ(header, "point,unit_index,unit_kind,class,value,base_value,provenance");
  EXPECT_EQ(first, "0,0,feature,0,1.2,0,back_projected");
  std::ifstream heat(dir / "heat.csv");
  std::getline(heat, header);
  std::getline(heat, first);
  EXPECT_EQ(header, "class,feature_index,component_index,contribution,magnitude");
  EXPECT_EQ(first.substr(0, 6), "0,0,0,");
}

}  // namespace
}  // namespace pcsinit
