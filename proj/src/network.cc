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

#include "pcsinit/network.h"

#include <cmath>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "pcsinit/seed.h"

namespace pcsinit {
namespace {

Matrix DrawHe(std::size_t out, std::size_t in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
  Matrix w(out, in);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

Matrix DrawXavier(std::size_t out, std::size_t in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(out, in);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

// Orthonormal columns when out >= in, orthonormal rows otherwise.
Matrix DrawOrthogonal(std::size_t out, std::size_t in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const bool tall = out >= in;
  Matrix g(tall ? out : in, tall ? in : out);
  for (double& v : g.values()) v = dist(rng);
  QrResult qr = HouseholderQr(g);
  for (std::size_t j = 0; j < qr.q.cols(); ++j) {
    if (qr.r(j, j) >= 0.0) continue;
    for (std::size_t i = 0; i < qr.q.rows(); ++i) qr.q(i, j) = -qr.q(i, j);
  }
  return tall ? std::move(qr.q) : Transpose(qr.q);
}

std::string Dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + "x" + std::to_string(b);
}

}  // namespace

std::string_view ToString(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
  }
  return "unknown";
}

std::string_view ToString(InitKind k) {
  switch (k) {
    case InitKind::kHe:
      return "he";
    case InitKind::kXavier:
      return "xavier";
    case InitKind::kOrthogonal:
      return "orthogonal";
    case InitKind::kPrincipalComponents:
      return "principal_components";
  }
  return "unknown";
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  Require(!layers_.empty(), "Mlp: needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Require(layer.in_dim() >= 1 && layer.out_dim() >= 1,
            "Mlp: layer " + std::to_string(l) + " has an empty dimension");
    Require(layer.bias.size() == layer.out_dim(),
            "Mlp: bias length mismatch at layer " + std::to_string(l));
    if (l > 0)
      Require(layers_[l - 1].out_dim() == layer.in_dim(),
              "Mlp: layer " + std::to_string(l - 1) + " outputs " +
                  std::to_string(layers_[l - 1].out_dim()) + " but layer " +
                  std::to_string(l) + " expects " +
                  std::to_string(layer.in_dim()));
  }
}

Mlp Build(std::span<const LayerSpec> specs, std::uint64_t master_seed) {
  std::vector<Layer> layers;
  layers.reserve(specs.size());
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const LayerSpec& spec = specs[l];
    Layer layer;
    layer.activation = spec.activation;
    layer.bias.assign(spec.out_dim, 0.0);
    const std::size_t out = spec.out_dim;
    const std::size_t in = spec.in_dim;
    Require(out >= 1 && in >= 1, "Build: layer " + std::to_string(l) +
                                     " has an empty dimension");
    std::visit(
        [&](const auto& init) {
          using T = std::decay_t<decltype(init)>;
          if constexpr (std::is_same_v<T, PrincipalComponentsInit>) {
            Require(init.components.rows() == in && init.components.cols() == out,
                    "Build: principal components are " +
                        Dims(init.components.rows(), init.components.cols()) +
                        " but layer " + std::to_string(l) + " is " +
                        Dims(in, out) + " (in x out)");
            layer.weights = Transpose(init.components);
            layer.init_kind = InitKind::kPrincipalComponents;
          } else {
            std::mt19937_64 rng(DeriveSeed({master_seed, init.seed}));
            if constexpr (std::is_same_v<T, HeInit>) {
              layer.weights = DrawHe(out, in, rng);
              layer.init_kind = InitKind::kHe;
            } else if constexpr (std::is_same_v<T, XavierInit>) {
              layer.weights = DrawXavier(out, in, rng);
              layer.init_kind = InitKind::kXavier;
            } else {
              layer.weights = DrawOrthogonal(out, in, rng);
              layer.init_kind = InitKind::kOrthogonal;
            }
          }
        },
        spec.initializer);
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

ForwardPass Forward(const Mlp& net, const Matrix& x) {
  Require(x.cols() == net.in_dim(),
          "Forward: input has " + std::to_string(x.cols()) +
              " columns, network expects " + std::to_string(net.in_dim()));
  ForwardPass pass;
  pass.activations.reserve(net.num_layers() + 1);
  pass.pre_activations.reserve(net.num_layers());
  pass.activations.push_back(x);
  for (const Layer& layer : net.layers()) {
    Matrix z = MatMulNT(pass.activations.back(), layer.weights);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto zi = z.row(i);
      for (std::size_t j = 0; j < zi.size(); ++j) zi[j] += layer.bias[j];
    }
    Matrix h = z;
    if (layer.activation == Activation::kRelu)
      for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
    pass.pre_activations.push_back(std::move(z));
    pass.activations.push_back(std::move(h));
  }
  return pass;
}

Matrix ForwardTo(const Mlp& net, const Matrix& x, std::size_t layer_index) {
  Require(layer_index < net.num_layers(), "ForwardTo: layer index out of range");
  Require(x.cols() == net.in_dim(), "ForwardTo: input column mismatch");
  Matrix h = x;
  for (std::size_t l = 0; l <= layer_index; ++l) {
    const Layer& layer = net.layer(l);
    Matrix z = MatMulNT(h, layer.weights);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto zi = z.row(i);
      for (std::size_t j = 0; j < zi.size(); ++j) {
        zi[j] += layer.bias[j];
        if (layer.activation == Activation::kRelu && zi[j] < 0.0) zi[j] = 0.0;
      }
    }
    h = std::move(z);
  }
  return h;
}

Matrix Predict(const Mlp& net, const Matrix& x) {
  return ForwardTo(net, x, net.num_layers() - 1);
}

Gradients Backward(const Mlp& net, const ForwardPass& pass,
                   const Matrix& upstream) {
  const std::size_t L = net.num_layers();
  Require(pass.activations.size() == L + 1 && pass.pre_activations.size() == L,
          "Backward: forward pass does not match the network depth");
  Require(upstream.rows() == pass.output().rows() &&
              upstream.cols() == net.out_dim(),
          "Backward: upstream gradient shape mismatch");

  Gradients grads;
  grads.weights.resize(L);
  grads.biases.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    grads.weights[l] = Matrix(net.layer(l).out_dim(), net.layer(l).in_dim());
    grads.biases[l].assign(net.layer(l).out_dim(), 0.0);
  }

  // Lowest unfrozen layer; nothing below it needs a delta.
  std::size_t lowest_trainable = L;
  for (std::size_t l = 0; l < L; ++l) {
    if (!net.layer(l).frozen) {
      lowest_trainable = l;
      break;
    }
  }
  if (lowest_trainable == L) return grads;

  Matrix delta = upstream;
  for (std::size_t l = L; l-- > lowest_trainable;) {
    const Layer& layer = net.layer(l);
    if (layer.activation == Activation::kRelu) {
      const Matrix& z = pass.pre_activations[l];
      auto d = delta.values();
      auto zv = z.values();
      for (std::size_t k = 0; k < d.size(); ++k)
        if (!(zv[k] > 0.0)) d[k] = 0.0;
    }
    if (!layer.frozen) {
      grads.weights[l] = MatMulTN(delta, pass.activations[l]);
      auto& gb = grads.biases[l];
      for (std::size_t i = 0; i < delta.rows(); ++i) {
        auto di = delta.row(i);
        for (std::size_t j = 0; j < gb.size(); ++j) gb[j] += di[j];
      }
    }
    if (l > lowest_trainable) delta = MatMul(delta, layer.weights);
  }
  return grads;
}

void SetFrozen(Mlp& net, std::size_t layer_index, bool frozen) {
  Require(layer_index < net.num_layers(),
          "SetFrozen: layer index " + std::to_string(layer_index) +
              " out of range for " + std::to_string(net.num_layers()) +
              " layers");
  net.layer(layer_index).frozen = frozen;
}

}  // namespace pcsinit
