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

#ifndef PCSINIT_PCA_H_
#define PCSINIT_PCA_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcsinit/matrix.h"

namespace pcsinit {

// How many principal components to keep.
class ComponentSelection {
 public:
  enum class Mode { kVarianceThreshold, kFixedCount };

  // Smallest r whose cumulative explained-variance ratio reaches `fraction`.
  static ComponentSelection VarianceThreshold(double fraction);
  static ComponentSelection FixedCount(std::size_t count);

  Mode mode() const { return mode_; }
  double fraction() const { return fraction_; }
  std::size_t count() const { return count_; }

 private:
  ComponentSelection(Mode mode, double fraction, std::size_t count)
      : mode_(mode), fraction_(fraction), count_(count) {}

  Mode mode_;
  double fraction_;
  std::size_t count_;
};

// A fitted PCA. Treat as immutable once returned by Fit.
struct PcaModel {
  // p x r; columns are orthonormal principal directions.
  Matrix components;
  // Squared singular values of the standardized fit matrix, descending (r).
  std::vector<double> eigenvalues;
  // eigenvalue / sum of all eigenvalues (r entries).
  std::vector<double> explained_variance_ratio;
  std::vector<double> mean;   // p
  std::vector<double> scale;  // p, strictly positive
  std::size_t n_fitted = 0;
  // Non-fatal conditions met during fitting (e.g. constant columns).
  std::vector<std::string> warnings;

  std::size_t n_features() const { return components.rows(); }
  std::size_t n_components() const { return components.cols(); }
};

// Applies `selection` to a descending explained-variance profile.
std::size_t SelectComponentCount(std::span<const double> ratios,
                                 const ComponentSelection& selection);

// Standardizes columns (mean 0, sample std 1 with divisor n-1; constant
// columns get scale 1 and a warning), then fits via SVD.
PcaModel Fit(const Matrix& x, const ComponentSelection& selection);

// Fits on ceil(fraction * rows) rows drawn uniformly without replacement.
// The sampled rows keep their original relative order, so fraction = 1
// reproduces Fit exactly.
PcaModel FitSubset(const Matrix& x, double fraction, std::uint64_t seed,
                   const ComponentSelection& selection);

// ((x - mean) / scale) * components, an n x r matrix.
Matrix Project(const PcaModel& model, const Matrix& x);

// Feature -> component weight map (p x r). Used to back-project component
// attributions to original features.
const Matrix& LoadingMatrix(const PcaModel& model);

}  // namespace pcsinit

#endif  // PCSINIT_PCA_H_
