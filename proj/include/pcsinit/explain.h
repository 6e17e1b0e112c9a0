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

#ifndef PCSINIT_EXPLAIN_H_
#define PCSINIT_EXPLAIN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "pcsinit/matrix.h"
#include "pcsinit/pca.h"

namespace pcsinit {

// Maps an n x M input batch to n x C model outputs. Must be safe to call
// concurrently.
using Predictor = std::function<Matrix(const Matrix&)>;

enum class UnitKind { kFeature, kPrincipalComponent };
enum class Provenance { kDirect, kBackProjected };
std::string_view ToString(UnitKind k);
std::string_view ToString(Provenance p);

struct Attribution {
  Matrix values;                   // classes x units
  std::vector<double> base_value;  // per class, mean output over background
  std::vector<double> prediction;  // per class, output at the explained point
  // prediction - base_value - sum(values), per class.
  std::vector<double> residual;
  UnitKind unit_kind = UnitKind::kFeature;
  Provenance provenance = Provenance::kDirect;
  // Ridge actually used in the weighted regression (relative to the mean
  // diagonal of the normal matrix).
  double regularization = 0.0;
  // Set when the system was singular and the ridge had to be raised.
  bool regularization_increased = false;
  bool exact = false;  // all coalitions enumerated

  std::size_t n_classes() const { return values.rows(); }
  std::size_t n_units() const { return values.cols(); }
};

struct ShapConfig {
  Matrix background;  // reference rows, nonempty
  // 0 enumerates all 2^M - 2 proper coalitions (M <= 15). Otherwise this many
  // coalitions are sampled in complementary pairs.
  std::size_t n_coalitions = 0;
  std::uint64_t seed = 0;
  // Ridge for sampled mode, relative to the mean diagonal of the normal
  // matrix. Exact mode solves unregularized unless the system is singular.
  double regularization = 1e-8;
};

inline constexpr std::size_t kMaxExactUnits = 15;

// Kernel SHAP with background-averaged imputation and the Shapley kernel
// weights (M - 1) / (C(M, s) s (M - s)). The empty and full coalitions
// enter as equality constraints, so local accuracy holds by construction.
Attribution KernelShap(const Predictor& predict, std::span<const double> x,
                       const ShapConfig& config);

// Brute-force Shapley values of one output by enumerating every coalition.
std::vector<double> ExactShapley(const Predictor& predict,
                                 std::span<const double> x,
                                 const Matrix& background,
                                 std::size_t class_index);

struct BackProjection {
  Attribution features;  // provenance kBackProjected, p units
  // Per class, contributions(j, k) = L[j, k] * phi_k (signed).
  std::vector<Matrix> contributions;
  // Per class, sum of feature values minus sum of component values. Zero
  // only when the loading matrix is square.
  std::vector<double> total_residual;
};

// Redistributes component attributions to the original features through the
// loading matrix. Approximate whenever r < p.
BackProjection BackProject(const Attribution& components, const PcaModel& model);

struct RankedUnit {
  std::size_t unit = 0;
  double mean_abs = 0.0;
};

// Per class, units ranked by mean |value| over the attributions, descending;
// ties keep index order.
std::vector<std::vector<RankedUnit>> GlobalImportance(
    std::span<const Attribution> attributions);

// Up to max_rows rows drawn without replacement, original order kept.
Matrix SelectBackground(const Matrix& data, std::size_t max_rows,
                        std::uint64_t seed);

// Columns: point, unit_index, unit_kind, class, value, base_value, provenance.
void WriteAttributionCsv(std::span<const Attribution> attributions,
                         const std::filesystem::path& path);

// Columns: class, feature_index, component_index, contribution, magnitude.
// Contributions are averaged over the explained points.
void WriteHeatmapCsv(std::span<const BackProjection> projections,
                     const std::filesystem::path& path);

}  // namespace pcsinit

#endif  // PCSINIT_EXPLAIN_H_
