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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "pcsinit/seed.h"

namespace pcsinit {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Initializer BaselineInitializer(BaselineInit kind, std::uint64_t seed) {
  switch (kind) {
    case BaselineInit::kHe:
      return HeInit{seed};
    case BaselineInit::kXavier:
      return XavierInit{seed};
    case BaselineInit::kOrthogonal:
      return OrthogonalInit{seed};
  }
  return HeInit{seed};
}

Dataset WithFeatures(const Dataset& ds, Matrix features) {
  Dataset out;
  out.features = std::move(features);
  out.labels = ds.labels;
  out.n_classes = ds.n_classes;
  return out;
}

}  // namespace

std::string_view ToString(Variant v) {
  switch (v) {
    case Variant::kPcsInit:
      return "pcsinit";
    case Variant::kPcsInitAct:
      return "pcsinit_act";
    case Variant::kPcsInitSub:
      return "pcsinit_sub";
    case Variant::kPcaNn:
      return "pca_nn";
    case Variant::kPlainNn:
      return "plain_nn";
  }
  return "unknown";
}

std::optional<Variant> ParseVariant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (ToString(v) == name) return v;
  return std::nullopt;
}

bool IsPcsInitFamily(Variant v) {
  return v == Variant::kPcsInit || v == Variant::kPcsInitAct ||
         v == Variant::kPcsInitSub;
}

std::string_view ToString(BaselineInit b) {
  switch (b) {
    case BaselineInit::kHe:
      return "he";
    case BaselineInit::kXavier:
      return "xavier";
    case BaselineInit::kOrthogonal:
      return "orthogonal";
  }
  return "unknown";
}

std::optional<BaselineInit> ParseBaselineInit(std::string_view name) {
  for (BaselineInit b : {BaselineInit::kHe, BaselineInit::kXavier,
                         BaselineInit::kOrthogonal})
    if (ToString(b) == name) return b;
  return std::nullopt;
}

std::string_view ToString(Phase p) {
  return p == Phase::kFrozen ? "frozen" : "unfrozen";
}

void Validate(const TrainConfig& c) {
  Require(c.n_frozen <= c.n_total, "TrainConfig: n_frozen exceeds n_total");
  Require(c.n_total >= 1, "TrainConfig: n_total must be >= 1");
  Require(c.adam.learning_rate > 0.0, "TrainConfig: learning_rate must be > 0");
  Require(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0 && c.adam.beta2 >= 0.0 &&
              c.adam.beta2 < 1.0,
          "TrainConfig: Adam betas must lie in [0, 1)");
  Require(c.adam.eps > 0.0, "TrainConfig: Adam eps must be > 0");
  Require(c.batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  Require(c.n_layers >= 2, "TrainConfig: n_layers must be >= 2");
  Require(c.variance_threshold > 0.0 && c.variance_threshold <= 1.0,
          "TrainConfig: variance_threshold must lie in (0, 1]");
  Require(c.subset_fraction > 0.0 && c.subset_fraction <= 1.0,
          "TrainConfig: subset_fraction must lie in (0, 1]");
}

bool SameOutcome(const TrainRecord& a, const TrainRecord& b) {
  if (a.n_components != b.n_components || a.epochs.size() != b.epochs.size())
    return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (x.epoch != y.epoch || x.phase != y.phase ||
        x.train_loss != y.train_loss || x.train_acc != y.train_acc ||
        x.test_loss != y.test_loss || x.test_acc != y.test_acc)
      return false;
  }
  return true;
}

LossAndGradient CrossEntropy(const Matrix& logits,
                             std::span<const std::size_t> labels) {
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  Require(n >= 1 && labels.size() == n,
          "CrossEntropy: need one label per logit row");
  LossAndGradient out;
  out.gradient = Matrix(n, c);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Require(labels[i] < c, "CrossEntropy: label " + std::to_string(labels[i]) +
                               " out of range for " + std::to_string(c) +
                               " classes");
    auto z = logits.row(i);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double log_sum = zmax + std::log(sum);
    total += log_sum - z[labels[i]];
    auto g = out.gradient.row(i);
    for (std::size_t j = 0; j < c; ++j)
      g[j] = std::exp(z[j] - log_sum) * inv_n;
    g[labels[i]] -= inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

void AdamUpdate(std::span<double> params, std::span<const double> grads,
                AdamSlot& slot, const AdamConfig& config) {
  Require(params.size() == grads.size(), "AdamUpdate: shape mismatch");
  if (slot.m.empty() && slot.v.empty()) {
    slot.m.assign(params.size(), 0.0);
    slot.v.assign(params.size(), 0.0);
    slot.t = 0;
  }
  Require(slot.m.size() == params.size() && slot.v.size() == params.size(),
          "AdamUpdate: moment buffers do not match the parameter block");
  ++slot.t;
  const double t = static_cast<double>(slot.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    slot.m[i] = config.beta1 * slot.m[i] + (1.0 - config.beta1) * g;
    slot.v[i] = config.beta2 * slot.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = slot.m[i] / c1;
    const double v_hat = slot.v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void AdamStep(AdamState& state, Mlp& net, const Gradients& grads,
              const AdamConfig& config) {
  const std::size_t L = net.num_layers();
  Require(grads.weights.size() == L && grads.biases.size() == L,
          "AdamStep: gradients do not match the network depth");
  if (state.layers.empty()) state.layers.resize(L);
  Require(state.layers.size() == L, "AdamStep: state does not match the network");
  for (std::size_t l = 0; l < L; ++l) {
    Layer& layer = net.layer(l);
    if (layer.frozen) continue;
    Require(grads.weights[l].rows() == layer.out_dim() &&
                grads.weights[l].cols() == layer.in_dim() &&
                grads.biases[l].size() == layer.out_dim(),
            "AdamStep: gradient shape mismatch at layer " + std::to_string(l));
    if (!state.layers[l]) state.layers[l].emplace();
    AdamUpdate(layer.weights.values(), grads.weights[l].values(),
               state.layers[l]->weights, config);
    AdamUpdate(layer.bias, grads.biases[l], state.layers[l]->bias, config);
  }
}

Evaluation Evaluate(const Mlp& net, const Matrix& x,
                    std::span<const std::size_t> labels) {
  Require(x.rows() >= 1, "Evaluate: empty split");
  const Matrix logits = Predict(net, x);
  Evaluation e;
  e.loss = CrossEntropy(logits, labels).loss;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    const auto best =
        static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == labels[i]) ++correct;
  }
  e.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows());
  return e;
}

Evaluation Evaluate(const Mlp& net, const Dataset& split) {
  return Evaluate(net, split.features, split.labels);
}

std::vector<std::size_t> EpochOrder(std::size_t rows, std::uint64_t seed,
                                    std::size_t epoch) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(DeriveSeed({seed, stream::kShuffle, epoch}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainRecord TrainNetwork(Mlp& net, const Dataset& train, const Dataset& test,
                         const TrainConfig& config, bool freeze_first_layer) {
  Validate(config);
  Require(train.n_rows() >= 1 && test.n_rows() >= 1,
          "TrainNetwork: empty split");
  Require(train.n_features() == net.in_dim() && test.n_features() == net.in_dim(),
          "TrainNetwork: feature count does not match the network input");
  Require(train.n_classes <= net.out_dim(),
          "TrainNetwork: network has fewer outputs than classes");

  const std::size_t rows = train.n_rows();
  const std::size_t batch = rows < 64 ? rows : std::min(config.batch_size, rows);
  AdamState adam;
  TrainRecord record;
  record.epochs.reserve(config.n_total);
  std::vector<std::size_t> batch_labels;
  for (std::size_t epoch = 0; epoch < config.n_total; ++epoch) {
    const bool frozen_phase = freeze_first_layer && epoch < config.n_frozen;
    if (freeze_first_layer) SetFrozen(net, 0, frozen_phase);
    const auto order = EpochOrder(rows, config.seed, epoch);

    const auto start = Clock::now();
    for (std::size_t begin = 0; begin < rows; begin += batch) {
      const std::size_t end = std::min(rows, begin + batch);
      std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Matrix xb = train.features.SelectRows(idx);
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(train.labels[i]);
      const ForwardPass pass = Forward(net, xb);
      const LossAndGradient ce = CrossEntropy(pass.output(), batch_labels);
      const Gradients grads = Backward(net, pass, ce.gradient);
      AdamStep(adam, net, grads, config.adam);
    }
    EpochMetrics m;
    m.seconds = SecondsSince(start);
    m.epoch = epoch + 1;
    m.phase = frozen_phase ? Phase::kFrozen : Phase::kUnfrozen;
    const Evaluation tr = Evaluate(net, train);
    const Evaluation te = Evaluate(net, test);
    m.train_loss = tr.loss;
    m.train_acc = tr.accuracy;
    m.test_loss = te.loss;
    m.test_acc = te.accuracy;
    record.epochs.push_back(m);
  }
  return record;
}

std::vector<LayerSpec> ArchitectureFor(Variant variant, std::size_t n_features,
                                       std::size_t width, std::size_t n_classes,
                                       const TrainConfig& config,
                                       const PcaModel* pca) {
  Require(config.n_layers >= 2, "ArchitectureFor: n_layers must be >= 2");
  Require(width >= 1 && n_classes >= 1 && n_features >= 1,
          "ArchitectureFor: empty dimension");
  std::vector<LayerSpec> specs;
  // Layers 2..n_layers, shared by every variant.
  auto upper = [&] {
    for (std::size_t l = 2; l <= config.n_layers; ++l) {
      const bool last = l == config.n_layers;
      specs.push_back(LayerSpec{
          width, last ? n_classes : width,
          last ? Activation::kIdentity : Activation::kRelu,
          BaselineInitializer(config.baseline_initializer, l)});
    }
  };
  switch (variant) {
    case Variant::kPcsInit:
    case Variant::kPcsInitAct:
    case Variant::kPcsInitSub: {
      Require(pca != nullptr, "ArchitectureFor: PCsInit variants need a PCA model");
      Require(pca->n_features() == n_features && pca->n_components() == width,
              "ArchitectureFor: PCA model shape does not match the layer");
      specs.push_back(LayerSpec{
          n_features, width,
          variant == Variant::kPcsInitAct ? Activation::kRelu : Activation::kIdentity,
          PrincipalComponentsInit{pca->components}});
      upper();
      break;
    }
    case Variant::kPlainNn:
      specs.push_back(LayerSpec{n_features, width, Activation::kRelu,
                                BaselineInitializer(config.baseline_initializer, 1)});
      upper();
      break;
    case Variant::kPcaNn:
      upper();
      break;
  }
  return specs;
}

TrainResult Train(const TrainConfig& config, const Dataset& train,
                  const Dataset& test) {
  Validate(config);
  Require(train.n_rows() >= 2 && test.n_rows() >= 1, "Train: empty split");
  Require(train.n_features() == test.n_features(),
          "Train: train and test feature counts differ");
  const std::size_t n_classes = std::max(train.n_classes, test.n_classes);
  Require(n_classes >= 2, "Train: need at least 2 classes");

  const auto selection = ComponentSelection::VarianceThreshold(config.variance_threshold);
  TrainResult result;
  const auto start = Clock::now();
  if (config.variant == Variant::kPcsInitSub) {
    result.pca = FitSubset(train.features, config.subset_fraction,
                           DeriveSeed({config.seed, stream::kSubset}), selection);
  } else {
    result.pca = Fit(train.features, selection);
  }
  const double pca_seconds = SecondsSince(start);
  const PcaModel& pca = *result.pca;
  const std::size_t width = pca.n_components();
  const std::vector<LayerSpec> specs = ArchitectureFor(
      config.variant, train.n_features(), width, n_classes, config, &pca);
  result.net = Build(specs, config.seed);

  if (config.variant == Variant::kPcaNn) {
    const Dataset ptrain = WithFeatures(train, Project(pca, train.features));
    const Dataset ptest = WithFeatures(test, Project(pca, test.features));
    result.record = TrainNetwork(result.net, ptrain, ptest, config, false);
  } else {
    result.record = TrainNetwork(result.net, train, test, config,
                                 IsPcsInitFamily(config.variant));
  }
  result.record.pca_fit_seconds = pca_seconds;
  result.record.n_components = width;
  return result;
}

}  // namespace pcsinit
