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

#ifndef PCSINIT_TRAINING_H_
#define PCSINIT_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pcsinit/data.h"
#include "pcsinit/matrix.h"
#include "pcsinit/network.h"
#include "pcsinit/pca.h"

namespace pcsinit {

// pcsinit:      first layer = principal components, identity activation
// pcsinit_act:  same with relu after the first layer
// pcsinit_sub:  principal components fitted on a random subset of rows
// pca_nn:       PCA projection outside the network, standard layers on top
// plain_nn:     standard initializer everywhere
enum class Variant { kPcsInit, kPcsInitAct, kPcsInitSub, kPcaNn, kPlainNn };

std::string_view ToString(Variant v);
std::optional<Variant> ParseVariant(std::string_view name);
bool IsPcsInitFamily(Variant v);
inline constexpr Variant kAllVariants[] = {Variant::kPcsInit, Variant::kPcsInitAct,
                                           Variant::kPcsInitSub, Variant::kPcaNn,
                                           Variant::kPlainNn};

enum class BaselineInit { kHe, kXavier, kOrthogonal };
std::string_view ToString(BaselineInit b);
std::optional<BaselineInit> ParseBaselineInit(std::string_view name);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  Variant variant = Variant::kPcsInit;
  double subset_fraction = 0.2;  // pcsinit_sub only
  std::size_t n_frozen = 30;     // epochs with the first layer frozen
  std::size_t n_total = 200;     // total epochs
  AdamConfig adam;
  // Mini-batch size; training sets under 64 rows use full batches.
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  BaselineInit baseline_initializer = BaselineInit::kHe;
  // Weight layers of the PCsInit / plain networks, output layer included.
  // pca_nn trains the top n_layers - 1 of them on projected inputs.
  std::size_t n_layers = 5;
  double variance_threshold = 0.95;
};

// Throws ContractError on inconsistent settings.
void Validate(const TrainConfig& config);

enum class Phase { kFrozen, kUnfrozen };
std::string_view ToString(Phase p);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  Phase phase = Phase::kUnfrozen;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;  // wall-clock time of the epoch's parameter updates
};

struct TrainRecord {
  std::vector<EpochMetrics> epochs;
  double pca_fit_seconds = 0.0;
  std::size_t n_components = 0;
};

// True when every field except wall-clock times matches bitwise.
bool SameOutcome(const TrainRecord& a, const TrainRecord& b);

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // d loss / d logits
};

// Mean over rows of -log softmax(logits)[label], log-sum-exp stabilized.
// gradient = (softmax - onehot) / rows.
LossAndGradient CrossEntropy(const Matrix& logits,
                             std::span<const std::size_t> labels);

// Adam moments for one parameter block. Empty until the first update.
struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// In-place bias-corrected Adam update of one block.
void AdamUpdate(std::span<double> params, std::span<const double> grads,
                AdamSlot& slot, const AdamConfig& config);

struct LayerMoments {
  AdamSlot weights;
  AdamSlot bias;
};

// Per-layer moments; a layer's entry is created the first time it is
// updated, so a layer unfrozen mid-training starts from fresh moments.
struct AdamState {
  std::vector<std::optional<LayerMoments>> layers;
};

// Updates every unfrozen layer; frozen layers and their moments are left
// untouched.
void AdamStep(AdamState& state, Mlp& net, const Gradients& grads,
              const AdamConfig& config);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation Evaluate(const Mlp& net, const Matrix& x,
                    std::span<const std::size_t> labels);
Evaluation Evaluate(const Mlp& net, const Dataset& split);

// Row order for one epoch, a pure function of (seed, epoch).
std::vector<std::size_t> EpochOrder(std::size_t rows, std::uint64_t seed,
                                    std::size_t epoch);

// Runs config.n_total epochs of Adam on cross-entropy. When
// `freeze_first_layer` is set, layer 0 is frozen for the first
// config.n_frozen epochs and trainable afterwards.
TrainRecord TrainNetwork(Mlp& net, const Dataset& train, const Dataset& test,
                         const TrainConfig& config, bool freeze_first_layer);

// Layer specs shared by every variant. Layer l (1-based) of the full-depth
// stack draws its standard initializer with seed l, so the layers above the
// first are identical across variants whenever their shapes agree.
std::vector<LayerSpec> ArchitectureFor(Variant variant, std::size_t n_features,
                                       std::size_t width, std::size_t n_classes,
                                       const TrainConfig& config,
                                       const PcaModel* pca);

struct TrainResult {
  TrainRecord record;
  Mlp net;
  // The fitted PCA (subset fit for pcsinit_sub). pca_nn's network expects
  // Project(*pca, x) as input.
  std::optional<PcaModel> pca;
};

// Fits the PCA the variant needs on the (standardized) training split, builds
// the network and trains it.
TrainResult Train(const TrainConfig& config, const Dataset& train,
                  const Dataset& test);

}  // namespace pcsinit

#endif  // PCSINIT_TRAINING_H_
