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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/seed.h"
#include "pcsinit/text.h"

namespace pcsinit {
namespace {

using Coalition = std::vector<std::uint8_t>;

// Rows per predict call when evaluating coalitions.
constexpr std::size_t kChunkRows = 1 << 15;

std::vector<double> ColumnMeans(const Matrix& m) {
  std::vector<double> mean(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) mean[j] += m(i, j);
  for (double& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

// v(z) for each coalition: mean over background rows of predict on the row
// with the coalition's features taken from x. Result is coalitions x C.
Matrix CoalitionValues(const Predictor& predict, std::span<const double> x,
                       const Matrix& background,
                       const std::vector<Coalition>& coalitions) {
  const std::size_t m = x.size();
  const std::size_t nb = background.rows();
  const std::size_t per_chunk = std::max<std::size_t>(1, kChunkRows / nb);
  Matrix out;
  for (std::size_t begin = 0; begin < coalitions.size(); begin += per_chunk) {
    const std::size_t end = std::min(coalitions.size(), begin + per_chunk);
    Matrix batch((end - begin) * nb, m);
    for (std::size_t c = begin; c < end; ++c) {
      const Coalition& z = coalitions[c];
      for (std::size_t b = 0; b < nb; ++b) {
        auto row = batch.row((c - begin) * nb + b);
        auto ref = background.row(b);
        for (std::size_t j = 0; j < m; ++j) row[j] = z[j] ? x[j] : ref[j];
      }
    }
    const Matrix y = predict(batch);
    Require(y.rows() == batch.rows() && y.cols() >= 1,
            "KernelShap: predictor returned the wrong number of rows");
    if (out.rows() == 0) out = Matrix(coalitions.size(), y.cols());
    Require(y.cols() == out.cols(), "KernelShap: predictor output width changed");
    for (std::size_t c = begin; c < end; ++c) {
      auto dst = out.row(c);
      for (std::size_t b = 0; b < nb; ++b) {
        auto src = y.row((c - begin) * nb + b);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
      for (double& v : dst) v /= static_cast<double>(nb);
    }
  }
  return out;
}

double LogChoose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Shapley kernel weight of a coalition of size s out of m.
double KernelWeight(std::size_t m, std::size_t s) {
  return static_cast<double>(m - 1) /
         (std::exp(LogChoose(m, s)) * static_cast<double>(s) *
          static_cast<double>(m - s));
}

// In-place Cholesky factor of a symmetric matrix; false if not positive
// definite within `floor`.
bool Cholesky(Matrix& a, double floor) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > floor)) return false;
    a(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / a(j, j);
    }
  }
  return true;
}

std::vector<double> CholeskySolve(const Matrix& l, std::vector<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
    b[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l(k, i) * b[k];
    b[i] /= l(i, i);
  }
  return b;
}

struct WeightedCoalitions {
  std::vector<Coalition> coalitions;
  std::vector<double> weights;
};

WeightedCoalitions EnumerateCoalitions(std::size_t m) {
  WeightedCoalitions out;
  const std::uint64_t full = (std::uint64_t{1} << m) - 1;
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    Coalition z(m);
    std::size_t s = 0;
    for (std::size_t j = 0; j < m; ++j) {
      z[j] = (mask >> j) & 1;
      s += z[j];
    }
    out.coalitions.push_back(std::move(z));
    out.weights.push_back(KernelWeight(m, s));
  }
  return out;
}

// Coalition sizes drawn in proportion to their total kernel mass
// (M - 1) / (s (M - s)); each draw is paired with its complement and carries
// unit weight. Repeated coalitions are merged.
WeightedCoalitions SampleCoalitions(std::size_t m, std::size_t n_coalitions,
                                    std::uint64_t seed) {
  std::vector<double> size_mass;
  for (std::size_t s = 1; s < m; ++s)
    size_mass.push_back(1.0 / (static_cast<double>(s) * static_cast<double>(m - s)));
  std::discrete_distribution<std::size_t> size_dist(size_mass.begin(),
                                                    size_mass.end());
  std::mt19937_64 rng(DeriveSeed({seed, stream::kShap}));
  std::vector<std::size_t> perm(m);
  std::map<Coalition, double> counts;
  const std::size_t pairs = (n_coalitions + 1) / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t s = size_dist(rng) + 1;
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    Coalition z(m, 0);
    for (std::size_t i = 0; i < s; ++i) z[perm[i]] = 1;
    Coalition complement(m);
    for (std::size_t j = 0; j < m; ++j) complement[j] = 1 - z[j];
    counts[z] += 1.0;
    counts[complement] += 1.0;
  }
  WeightedCoalitions out;
  for (auto& [z, w] : counts) {
    out.coalitions.push_back(z);
    out.weights.push_back(w);
  }
  return out;
}

}  // namespace

std::string_view ToString(UnitKind k) {
  return k == UnitKind::kFeature ? "feature" : "principal_component";
}

std::string_view ToString(Provenance p) {
  return p == Provenance::kDirect ? "direct" : "back_projected";
}

Attribution KernelShap(const Predictor& predict, std::span<const double> x,
                       const ShapConfig& config) {
  const std::size_t m = x.size();
  Require(m >= 1, "KernelShap: empty input row");
  Require(config.background.rows() >= 1, "KernelShap: empty background");
  Require(config.background.cols() == m,
          "KernelShap: background width does not match the input row");
  Require(config.regularization >= 0.0,
          "KernelShap: regularization must be non-negative");
  const bool exact = config.n_coalitions == 0;
  Require(!exact || m <= kMaxExactUnits,
          "KernelShap: exact enumeration needs at most 15 units, got " +
              std::to_string(m));

  Attribution out;
  out.exact = exact || m == 1;
  out.base_value = ColumnMeans(predict(config.background));
  const Matrix at_x = predict(Matrix(1, m, std::vector<double>(x.begin(), x.end())));
  Require(at_x.cols() == out.base_value.size(),
          "KernelShap: predictor output width changed");
  out.prediction.assign(at_x.row(0).begin(), at_x.row(0).end());
  const std::size_t n_classes = out.prediction.size();
  std::vector<double> delta(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c)
    delta[c] = out.prediction[c] - out.base_value[c];

  out.values = Matrix(n_classes, m);
  if (m == 1) {
    for (std::size_t c = 0; c < n_classes; ++c) out.values(c, 0) = delta[c];
  } else {
    const WeightedCoalitions wc =
        exact ? EnumerateCoalitions(m)
              : SampleCoalitions(m, config.n_coalitions, config.seed);
    const Matrix v = CoalitionValues(predict, x, config.background, wc.coalitions);

    // Eliminate the last unit through the efficiency constraint:
    // phi_last = delta - sum(phi_j), regressors z_j - z_last.
    const std::size_t k = m - 1;
    Matrix normal(k, k);
    Matrix rhs(n_classes, k);
    std::vector<double> a(k);
    for (std::size_t i = 0; i < wc.coalitions.size(); ++i) {
      const Coalition& z = wc.coalitions[i];
      const double w = wc.weights[i];
      for (std::size_t j = 0; j < k; ++j)
        a[j] = static_cast<double>(z[j]) - static_cast<double>(z[k]);
      for (std::size_t r = 0; r < k; ++r) {
        if (a[r] == 0.0) continue;
        for (std::size_t s = 0; s < k; ++s) normal(r, s) += w * a[r] * a[s];
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double y = v(i, c) - out.base_value[c] - z[k] * delta[c];
        for (std::size_t r = 0; r < k; ++r) rhs(c, r) += w * a[r] * y;
      }
    }
    double mean_diag = 0.0;
    for (std::size_t r = 0; r < k; ++r) mean_diag += normal(r, r);
    mean_diag /= static_cast<double>(k);
    if (!(mean_diag > 0.0)) mean_diag = 1.0;

    double ridge = exact ? 0.0 : config.regularization;
    Matrix factor;
    for (int attempt = 0;; ++attempt) {
      factor = normal;
      for (std::size_t r = 0; r < k; ++r) factor(r, r) += ridge * mean_diag;
      if (Cholesky(factor, mean_diag * 1e-14)) break;
      if (attempt >= 12)
        throw NumericalError("KernelShap: regression system stayed singular");
      ridge = std::max(ridge * 1e3, 1e-10);
      out.regularization_increased = true;
    }
    out.regularization = ridge;
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto b = rhs.row(c);
      const std::vector<double> beta =
          CholeskySolve(factor, std::vector<double>(b.begin(), b.end()));
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        out.values(c, j) = beta[j];
        sum += beta[j];
      }
      out.values(c, k) = delta[c] - sum;
    }
  }
  out.residual.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += out.values(c, j);
    out.residual[c] = delta[c] - sum;
  }
  return out;
}

std::vector<double> ExactShapley(const Predictor& predict,
                                 std::span<const double> x,
                                 const Matrix& background,
                                 std::size_t class_index) {
  const std::size_t m = x.size();
  Require(m >= 1 && m <= kMaxExactUnits,
          "ExactShapley: needs 1 to 15 units, got " + std::to_string(m));
  Require(background.rows() >= 1 && background.cols() == m,
          "ExactShapley: background must be nonempty and match the input");
  const std::uint64_t n_masks = std::uint64_t{1} << m;
  std::vector<Coalition> all;
  all.reserve(n_masks);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    Coalition z(m);
    for (std::size_t j = 0; j < m; ++j) z[j] = (mask >> j) & 1;
    all.push_back(std::move(z));
  }
  const Matrix v = CoalitionValues(predict, x, background, all);
  Require(class_index < v.cols(), "ExactShapley: class index out of range");

  // weight(s) = s! (m - s - 1)! / m!
  std::vector<double> weight(m);
  for (std::size_t s = 0; s < m; ++s)
    weight[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(m - s + 0.0) -
                         std::lgamma(m + 1.0));
  std::vector<double> phi(m, 0.0);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    const auto s = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask >> j) & 1) continue;
      const std::uint64_t with = mask | (std::uint64_t{1} << j);
      phi[j] += weight[s] * (v(with, class_index) - v(mask, class_index));
    }
  }
  return phi;
}

BackProjection BackProject(const Attribution& components, const PcaModel& model) {
  Require(components.unit_kind == UnitKind::kPrincipalComponent,
          "BackProject: attribution is not over principal components");
  const Matrix& loading = LoadingMatrix(model);
  const std::size_t p = loading.rows();
  const std::size_t r = loading.cols();
  Require(components.n_units() == r,
          "BackProject: attribution has " + std::to_string(components.n_units()) +
              " units but the model has " + std::to_string(r) + " components");
  const std::size_t n_classes = components.n_classes();

  BackProjection out;
  out.features = components;
  out.features.unit_kind = UnitKind::kFeature;
  out.features.provenance = Provenance::kBackProjected;
  out.features.values = Matrix(n_classes, p);
  out.contributions.assign(n_classes, Matrix(p, r));
  out.total_residual.assign(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double component_sum = 0.0;
    for (std::size_t k = 0; k < r; ++k) component_sum += components.values(c, k);
    double feature_sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      double total = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double contribution = loading(j, k) * components.values(c, k);
        out.contributions[c](j, k) = contribution;
        total += contribution;
      }
      out.features.values(c, j) = total;
      feature_sum += total;
    }
    out.total_residual[c] = feature_sum - component_sum;
    out.features.residual[c] = out.features.prediction[c] -
                               out.features.base_value[c] - feature_sum;
  }
  return out;
}

std::vector<std::vector<RankedUnit>> GlobalImportance(
    std::span<const Attribution> attributions) {
  Require(!attributions.empty(), "GlobalImportance: no attributions");
  const Attribution& first = attributions.front();
  for (const Attribution& a : attributions)
    Require(a.unit_kind == first.unit_kind && a.n_units() == first.n_units() &&
                a.n_classes() == first.n_classes(),
            "GlobalImportance: attributions are not homogeneous");
  std::vector<std::vector<RankedUnit>> out(first.n_classes());
  for (std::size_t c = 0; c < first.n_classes(); ++c) {
    auto& ranked = out[c];
    ranked.resize(first.n_units());
    for (std::size_t j = 0; j < first.n_units(); ++j) {
      double sum = 0.0;
      for (const Attribution& a : attributions) sum += std::abs(a.values(c, j));
      ranked[j] = {j, sum / static_cast<double>(attributions.size())};
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedUnit& a, const RankedUnit& b) {
                       return a.mean_abs > b.mean_abs;
                     });
  }
  return out;
}

Matrix SelectBackground(const Matrix& data, std::size_t max_rows,
                        std::uint64_t seed) {
  Require(data.rows() >= 1 && max_rows >= 1,
          "SelectBackground: need at least one row");
  if (data.rows() <= max_rows) return data;
  std::vector<std::size_t> all(data.rows());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(max_rows);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), max_rows, rng);
  return data.SelectRows(picked);
}

void WriteAttributionCsv(std::span<const Attribution> attributions,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), "WriteAttributionCsv: cannot open " + path.string());
  out << "point,unit_index,unit_kind,class,value,base_value,provenance\n";
  for (std::size_t i = 0; i < attributions.size(); ++i) {
    const Attribution& a = attributions[i];
    for (std::size_t c = 0; c < a.n_classes(); ++c) {
      for (std::size_t j = 0; j < a.n_units(); ++j) {
        out << i << ',' << j << ',' << ToString(a.unit_kind) << ',' << c << ','
            << FormatDouble(a.values(c, j)) << ',' << FormatDouble(a.base_value[c])
            << ',' << ToString(a.provenance) << '\n';
      }
    }
  }
}

void WriteHeatmapCsv(std::span<const BackProjection> projections,
                     const std::filesystem::path& path) {
  Require(!projections.empty(), "WriteHeatmapCsv: nothing to write");
  const auto& first = projections.front().contributions;
  std::vector<Matrix> mean = first;
  for (Matrix& m : mean) m = Matrix(m.rows(), m.cols());
  for (const BackProjection& bp : projections) {
    Require(bp.contributions.size() == mean.size(),
            "WriteHeatmapCsv: class count differs between points");
    for (std::size_t c = 0; c < mean.size(); ++c) {
      Require(bp.contributions[c].rows() == mean[c].rows() &&
                  bp.contributions[c].cols() == mean[c].cols(),
              "WriteHeatmapCsv: contribution shapes differ between points");
      auto dst = mean[c].values();
      auto src = bp.contributions[c].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  std::ofstream out(path);
  Require(static_cast<bool>(out), "WriteHeatmapCsv: cannot open " + path.string());
  out << "class,feature_index,component_index,contribution,magnitude\n";
  const double n = static_cast<double>(projections.size());
  for (std::size_t c = 0; c < mean.size(); ++c) {
    for (std::size_t j = 0; j < mean[c].rows(); ++j) {
      for (std::size_t k = 0; k < mean[c].cols(); ++k) {
        const double v = mean[c](j, k) / n;
        out << c << ',' << j << ',' << k << ',' << FormatDouble(v) << ','
            << FormatDouble(std::abs(v)) << '\n';
      }
    }
  }
}

}  // namespace pcsinit
