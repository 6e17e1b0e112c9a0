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

#include "pcsinit/pca.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"

namespace pcsinit {

ComponentSelection ComponentSelection::VarianceThreshold(double fraction) {
  Require(fraction > 0.0 && fraction <= 1.0,
          "ComponentSelection: variance fraction must lie in (0, 1]");
  return ComponentSelection(Mode::kVarianceThreshold, fraction, 0);
}

ComponentSelection ComponentSelection::FixedCount(std::size_t count) {
  Require(count >= 1, "ComponentSelection: fixed count must be >= 1");
  return ComponentSelection(Mode::kFixedCount, 0.0, count);
}

std::size_t SelectComponentCount(std::span<const double> ratios,
                                 const ComponentSelection& selection) {
  Require(!ratios.empty(), "SelectComponentCount: empty variance profile");
  if (selection.mode() == ComponentSelection::Mode::kFixedCount) {
    Require(selection.count() <= ratios.size(),
            "SelectComponentCount: requested " +
                std::to_string(selection.count()) + " components but only " +
                std::to_string(ratios.size()) + " are available");
    return selection.count();
  }
  double cumulative = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    cumulative += ratios[i];
    if (cumulative >= selection.fraction() - 1e-12) return i + 1;
  }
  return ratios.size();
}

PcaModel Fit(const Matrix& x, const ComponentSelection& selection) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Require(n >= 2, "pca Fit: need at least 2 rows");
  Require(p >= 1, "pca Fit: need at least 1 column");
  if (selection.mode() == ComponentSelection::Mode::kFixedCount)
    Require(selection.count() <= p,
            "pca Fit: fixed count exceeds the number of features");

  PcaModel model;
  model.n_fitted = n;
  model.mean.assign(p, 0.0);
  model.scale.assign(p, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) model.mean[j] += r[j];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);
  std::vector<double> ss(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = r[j] - model.mean[j];
      ss[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double sd = std::sqrt(ss[j] / static_cast<double>(n - 1));
    if (sd > 0.0) {
      model.scale[j] = sd;
    } else {
      model.warnings.push_back("column " + std::to_string(j) +
                               " has zero variance; scale set to 1");
    }
  }

  Matrix z(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = x.row(i);
    auto dst = z.row(i);
    for (std::size_t j = 0; j < p; ++j)
      dst[j] = (src[j] - model.mean[j]) / model.scale[j];
  }

  SvdResult s = Svd(z);
  const std::size_t k = s.singular_values.size();
  std::vector<double> eig(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    eig[i] = s.singular_values[i] * s.singular_values[i];
    total += eig[i];
  }
  Require(total > 0.0, "pca Fit: data has zero total variance");
  std::vector<double> ratios(k);
  for (std::size_t i = 0; i < k; ++i) ratios[i] = eig[i] / total;

  const std::size_t r = SelectComponentCount(ratios, selection);
  model.eigenvalues.assign(eig.begin(), eig.begin() + r);
  model.explained_variance_ratio.assign(ratios.begin(), ratios.begin() + r);
  model.components = Matrix(p, r);
  for (std::size_t c = 0; c < r; ++c)
    for (std::size_t j = 0; j < p; ++j) model.components(j, c) = s.vt(c, j);
  return model;
}

PcaModel FitSubset(const Matrix& x, double fraction, std::uint64_t seed,
                   const ComponentSelection& selection) {
  Require(fraction > 0.0 && fraction <= 1.0,
          "pca FitSubset: fraction must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(x.rows()) - 1e-9));
  Require(count >= 2, "pca FitSubset: subset must contain at least 2 rows");
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  if (count >= x.rows()) return Fit(x, selection);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), count, rng);
  return Fit(x.SelectRows(picked), selection);
}

Matrix Project(const PcaModel& model, const Matrix& x) {
  const std::size_t p = model.n_features();
  Require(x.cols() == p, "pca Project: expected " + std::to_string(p) +
                             " columns, got " + std::to_string(x.cols()));
  Matrix z(x.rows(), p);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto src = x.row(i);
    auto dst = z.row(i);
    for (std::size_t j = 0; j < p; ++j)
      dst[j] = (src[j] - model.mean[j]) / model.scale[j];
  }
  return MatMul(z, model.components);
}

const Matrix& LoadingMatrix(const PcaModel& model) { return model.components; }

}  // namespace pcsinit
