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

#ifndef PCSINIT_THEORY_H_
#define PCSINIT_THEORY_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcsinit/matrix.h"
#include "pcsinit/network.h"
#include "pcsinit/pca.h"

namespace pcsinit {

enum class TheoremId {
  kConditioning,
  kLipschitzLinear,
  kLipschitzAct,
  kNoiseDistribution,
  kNoiseNorm,
  kLayerNoiseBound,
};
std::string_view ToString(TheoremId id);

struct TheoremReport {
  TheoremId id = TheoremId::kConditioning;
  // Named results in a fixed order per theorem.
  std::vector<std::pair<std::string, double>> quantities;
  bool pass = false;
  double tolerance = 0.0;
  std::size_t trials = 0;
  std::string note;

  // Throws ContractError when the name is absent.
  double quantity(std::string_view name) const;
};

// H = x^T x and H_r = W_r^T H W_r with W_r the top-r eigenvectors of H.
// Passes when kappa(H_r) <= kappa(H) (1 + 1e-9). Both condition numbers
// ignore eigenvalues below the rank tolerance.
TheoremReport CheckConditioning(const Matrix& x,
                                const ComponentSelection& selection);

// First-layer Lipschitz check. Samples n_pairs random input pairs plus pairs
// displaced along the top right singular vector of W^1 and compares the
// largest ratio |f1(x) - f1(y)| / |x - y| with L_sigma * sigma_max(W^1).
// A first layer built from principal components must also have
// sigma_max = 1 within 1e-6. The id follows the first-layer activation.
TheoremReport CheckLipschitz(const Mlp& net, std::size_t n_pairs,
                             std::uint64_t seed);

// Draws eta ~ N(0, sigma^2 I_p) and checks that W_r^T eta has mean 0 and
// covariance sigma^2 W_r^T W_r, each entry within four standard errors.
// The gap to diag(sigma^2 lambda_i) is reported as the
// informational quantity eigenvalue_diag_max_gap. Requires n_samples >= 10000.
TheoremReport CheckNoiseDistribution(const PcaModel& model, double sigma,
                                     std::size_t n_samples, std::uint64_t seed);

// Checks |W_r^T eta| <= |eta| on every draw. The stated equality holds only
// when r = p; the largest gap is reported as equality_max_gap.
TheoremReport CheckNoiseNorm(const PcaModel& model, double sigma,
                             std::size_t n_samples, std::uint64_t seed);

// For x ~ N(0, I) and eta ~ N(0, sigma^2 I), checks per layer l that
// |h^l(x + eta) - h^l(x)| <= prod_{i<=l} L_i |W^i| * |eta|, with |W| the
// spectral norm. Reports the largest observed/bound ratio as max_tightness.
TheoremReport CheckLayerNoiseBound(const Mlp& net, double sigma,
                                   std::size_t n_samples, std::uint64_t seed);

struct TheorySuiteConfig {
  double variance_threshold = 0.95;
  std::size_t n_layers = 5;
  std::size_t n_classes = 2;
  std::size_t conditioning_draws = 100;
  std::size_t lipschitz_pairs = 1000;
  double noise_sigma = 1.0;
  std::size_t noise_samples = 100000;
  std::size_t bound_samples = 1000;
  std::uint64_t seed = 0;
};

// The six checks on standardized data x: conditioning on x and on
// conditioning_draws - 1 random half-size row subsets, Lipschitz checks on
// freshly built pcsinit and pcsinit_act networks, the noise checks on the
// PCA fitted to x, and the layer bound on the pcsinit network.
std::vector<TheoremReport> RunTheorySuite(const Matrix& x,
                                          const TheorySuiteConfig& config);

}  // namespace pcsinit

#endif  // PCSINIT_THEORY_H_
