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

#ifndef PCSINIT_NETWORK_H_
#define PCSINIT_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pcsinit/matrix.h"
#include "pcsinit/pca.h"

namespace pcsinit {

enum class Activation { kIdentity, kRelu };

// Lipschitz constant of the activation (1 for both supported kinds).
constexpr double LipschitzConstant(Activation) { return 1.0; }

std::string_view ToString(Activation a);

struct HeInit {
  std::uint64_t seed = 0;
};
struct XavierInit {
  std::uint64_t seed = 0;
};
struct OrthogonalInit {
  std::uint64_t seed = 0;
};
// W = components^T, b = 0. Requires in_dim = p and out_dim = r of the model.
struct PrincipalComponentsInit {
  Matrix components;  // p x r
};

using Initializer =
    std::variant<HeInit, XavierInit, OrthogonalInit, PrincipalComponentsInit>;

enum class InitKind { kHe, kXavier, kOrthogonal, kPrincipalComponents };
std::string_view ToString(InitKind k);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kRelu;
  Initializer initializer = HeInit{};
};

struct Layer {
  Matrix weights;             // out x in
  std::vector<double> bias;   // out
  Activation activation = Activation::kIdentity;
  InitKind init_kind = InitKind::kHe;
  bool frozen = false;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  bool operator==(const Layer&) const = default;
};

// Dense feed-forward network, h^l = act(W^l h^{l-1} + b^l).
class Mlp {
 public:
  Mlp() = default;
  // Validates that consecutive dimensions chain.
  explicit Mlp(std::vector<Layer> layers);

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t in_dim() const { return layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.back().out_dim(); }

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  const std::vector<Layer>& layers() const { return layers_; }

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<Layer> layers_;
};

// Realizes weights. Each seeded initializer draws from a generator seeded by
// DeriveSeed({master_seed, spec seed}), so two networks sharing master_seed
// and per-layer seeds get identical draws for identically shaped layers.
//   He:         Normal(0, 2 / in_dim)
//   Xavier:     Uniform(+-sqrt(6 / (in_dim + out_dim)))
//   Orthogonal: QR of a Gaussian matrix with the sign of diag(R) folded in
// All biases start at zero.
Mlp Build(std::span<const LayerSpec> specs, std::uint64_t master_seed);

struct ForwardPass {
  // activations[0] is the input; activations[l + 1] is the output of layer l.
  std::vector<Matrix> activations;
  // pre_activations[l] = h^{l} W^T + b for layer l.
  std::vector<Matrix> pre_activations;

  const Matrix& output() const { return activations.back(); }
};

// Rows of x are samples.
ForwardPass Forward(const Mlp& net, const Matrix& x);

// Output of the last layer only.
Matrix Predict(const Mlp& net, const Matrix& x);

// Output of layer `layer_index` only (0-based).
Matrix ForwardTo(const Mlp& net, const Matrix& x, std::size_t layer_index);

struct Gradients {
  std::vector<Matrix> weights;             // shape-matched to each layer
  std::vector<std::vector<double>> biases;
};

// Gradients of a scalar loss given d loss / d output (`upstream`, shaped like
// the network output). Frozen layers get exactly-zero blocks; the relu
// subgradient at 0 is 0.
Gradients Backward(const Mlp& net, const ForwardPass& pass,
                   const Matrix& upstream);

void SetFrozen(Mlp& net, std::size_t layer_index, bool frozen);

}  // namespace pcsinit

#endif  // PCSINIT_NETWORK_H_
