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

#ifndef PCSINIT_DATA_H_
#define PCSINIT_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pcsinit/matrix.h"

namespace pcsinit {

// Per-column affine map x -> (x - mean) / scale.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  bool operator==(const Standardization&) const = default;
};

struct Dataset {
  Matrix features;  // n x p
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;
  std::vector<std::string> feature_names;  // empty or length p
  // Set once standardized; always fitted on a training split.
  std::optional<Standardization> standardization;

  std::size_t n_rows() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }
};

// Label column chosen by zero-based index or by header name.
using LabelColumn = std::variant<std::size_t, std::string>;

// Reads a comma-delimited numeric file. Labels that are all non-negative
// integers are used as class indices directly (n_classes = max + 1); any
// other label text is mapped to indices in order of first appearance.
// Throws ParseError naming the line (1-based) for ragged rows, non-numeric
// feature cells, missing values or an empty file.
Dataset LoadCsv(const std::filesystem::path& path, const LabelColumn& label,
                bool has_header);

// Writes features with full round-trip precision, label in the last column,
// and a header row.
void WriteCsv(const Dataset& ds, const std::filesystem::path& path);

// Sample mean and (n-1)-divisor standard deviation of each column; zero
// spread maps to scale 1.
Standardization FitStandardization(const Matrix& x);
Matrix ApplyStandardization(const Standardization& s, const Matrix& x);

// Seeded uniform shuffle, then the first round(train_fraction * n) rows form
// the training split. Standardization is fitted on train and applied to both.
// The permutation depends only on (n, seed).
std::pair<Dataset, Dataset> Split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

// Adds N(0, sigma^2) to every feature entry. Requires a standardized dataset.
Dataset AddGaussianNoise(const Dataset& ds, double sigma, std::uint64_t seed);

enum class SyntheticKind { kGaussianBlobs, kLowRankPlusNoise };

struct SyntheticParams {
  // Radius of the sphere holding class means.
  double separation = 4.0;
  // Within-class standard deviation (latent space for low-rank data).
  double noise = 1.0;
  // Dimension of the informative subspace (low-rank only).
  std::size_t rank = 3;
  // Isotropic noise floor added in all p dimensions (low-rank only).
  double noise_floor = 0.05;
};

Dataset MakeSynthetic(SyntheticKind kind, std::size_t n, std::size_t p,
                      std::size_t n_classes, const SyntheticParams& params,
                      std::uint64_t seed);

}  // namespace pcsinit

#endif  // PCSINIT_DATA_H_
