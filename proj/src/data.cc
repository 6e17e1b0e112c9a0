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

#include "pcsinit/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "pcsinit/errors.h"
#include "pcsinit/text.h"
#include "pcsinit/linalg.h"

namespace pcsinit {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(Trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(Trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool ParseNonNegativeInteger(const std::string& s, std::size_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset LoadCsv(const std::filesystem::path& path, const LabelColumn& label,
                bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);

  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.emplace_back(line_no, line);
  }
  while (!lines.empty() && Trim(lines.back().second).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(path.string() + ": empty file", 1);

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (has_header) {
    header = SplitCells(lines[0].second);
    first_data = 1;
  }
  if (first_data >= lines.size())
    throw ParseError(path.string() + ": no data rows", lines.size());

  const std::size_t width =
      has_header ? header.size() : SplitCells(lines[first_data].second).size();
  if (width < 2)
    throw ParseError(path.string() + ": need at least one feature and a label",
                     lines[first_data].first);

  std::size_t label_index = 0;
  if (const auto* idx = std::get_if<std::size_t>(&label)) {
    label_index = *idx;
  } else {
    const auto& name = std::get<std::string>(label);
    if (!has_header)
      throw ContractError("LoadCsv: label column by name requires a header");
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ParseError(path.string() + ": no column named '" + name + "'", 1);
    label_index = static_cast<std::size_t>(it - header.begin());
  }
  if (label_index >= width)
    throw ContractError("LoadCsv: label column " + std::to_string(label_index) +
                        " out of range for " + std::to_string(width) +
                        " columns");

  const std::size_t p = width - 1;
  const std::size_t n = lines.size() - first_data;
  std::vector<double> values;
  values.reserve(n * p);
  std::vector<std::string> label_text;
  label_text.reserve(n);
  for (std::size_t r = first_data; r < lines.size(); ++r) {
    const auto& [ln, text] = lines[r];
    auto cells = SplitCells(text);
    if (cells.size() != width)
      throw ParseError(path.string() + ":" + std::to_string(ln) + ": expected " +
                           std::to_string(width) + " cells, found " +
                           std::to_string(cells.size()),
                       ln);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& cell = cells[c];
      if (cell.empty())
        throw ParseError(path.string() + ":" + std::to_string(ln) +
                             ": missing value in column " + std::to_string(c + 1),
                         ln, c + 1);
      if (c == label_index) {
        label_text.push_back(cell);
        continue;
      }
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError(path.string() + ":" + std::to_string(ln) +
                             ": non-numeric value '" + cell + "' in column " +
                             std::to_string(c + 1),
                         ln, c + 1);
      values.push_back(v);
    }
  }

  Dataset ds;
  ds.features = Matrix(n, p, std::move(values));
  ds.labels.resize(n);
  bool all_integer = true;
  for (std::size_t i = 0; i < n && all_integer; ++i)
    all_integer = ParseNonNegativeInteger(label_text[i], ds.labels[i]);
  if (all_integer) {
    ds.n_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  } else {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = index.try_emplace(label_text[i], index.size());
      ds.labels[i] = it->second;
    }
    ds.n_classes = index.size();
  }
  if (has_header) {
    for (std::size_t c = 0; c < width; ++c)
      if (c != label_index) ds.feature_names.push_back(header[c]);
  }
  return ds;
}

void WriteCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("WriteCsv: cannot open " + path.string());
  const std::size_t p = ds.n_features();
  for (std::size_t j = 0; j < p; ++j) {
    if (!ds.feature_names.empty())
      out << ds.feature_names[j];
    else
      out << 'f' << j;
    out << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) out << FormatDouble(ds.features(i, j)) << ',';
    out << ds.labels[i] << '\n';
  }
}

Standardization FitStandardization(const Matrix& x) {
  Require(x.rows() >= 2, "FitStandardization: need at least 2 rows");
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Standardization s;
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> ss(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = r[j] - s.mean[j];
      ss[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double sd = std::sqrt(ss[j] / static_cast<double>(n - 1));
    if (sd > 0.0) s.scale[j] = sd;
  }
  return s;
}

Matrix ApplyStandardization(const Standardization& s, const Matrix& x) {
  Require(s.mean.size() == x.cols() && s.scale.size() == x.cols(),
          "ApplyStandardization: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto src = x.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j)
      dst[j] = (src[j] - s.mean[j]) / s.scale[j];
  }
  return out;
}

std::pair<Dataset, Dataset> Split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
  Require(train_fraction > 0.0 && train_fraction < 1.0,
          "Split: train_fraction must lie in (0, 1)");
  const std::size_t n = ds.n_rows();
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  Require(n_train >= 2 && n_train < n,
          "Split: fraction " + std::to_string(train_fraction) + " of " +
              std::to_string(n) + " rows leaves a split empty");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::span<const std::size_t> train_idx(perm.data(), n_train);
  std::span<const std::size_t> test_idx(perm.data() + n_train, n - n_train);

  auto take = [&](std::span<const std::size_t> idx) {
    Dataset out;
    out.features = ds.features.SelectRows(idx);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) out.labels.push_back(ds.labels[i]);
    out.n_classes = ds.n_classes;
    out.feature_names = ds.feature_names;
    return out;
  };
  Dataset train = take(train_idx);
  Dataset test = take(test_idx);
  Standardization s = FitStandardization(train.features);
  train.features = ApplyStandardization(s, train.features);
  test.features = ApplyStandardization(s, test.features);
  train.standardization = s;
  test.standardization = std::move(s);
  return {std::move(train), std::move(test)};
}

Dataset AddGaussianNoise(const Dataset& ds, double sigma, std::uint64_t seed) {
  Require(ds.standardization.has_value(),
          "AddGaussianNoise: dataset must be standardized first");
  Require(sigma >= 0.0, "AddGaussianNoise: sigma must be nonnegative");
  Dataset out = ds;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.features.values()) v += normal(rng);
  return out;
}

Dataset MakeSynthetic(SyntheticKind kind, std::size_t n, std::size_t p,
                      std::size_t n_classes, const SyntheticParams& params,
                      std::uint64_t seed) {
  Require(n_classes >= 2 && n >= n_classes,
          "MakeSynthetic: need n >= n_classes >= 2");
  Require(p >= 1, "MakeSynthetic: need p >= 1");
  Require(params.separation >= 0.0 && params.noise >= 0.0 &&
              params.noise_floor >= 0.0,
          "MakeSynthetic: scales must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto sphere_point = [&](std::size_t dim) {
    std::vector<double> v(dim);
    double nv = 0.0;
    while (nv == 0.0) {
      for (double& x : v) x = normal(rng);
      nv = Norm2(v);
    }
    for (double& x : v) x *= params.separation / nv;
    return v;
  };

  Dataset ds;
  ds.n_classes = n_classes;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = i % n_classes;
  ds.features = Matrix(n, p);

  if (kind == SyntheticKind::kGaussianBlobs) {
    std::vector<std::vector<double>> means;
    for (std::size_t c = 0; c < n_classes; ++c) means.push_back(sphere_point(p));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mu = means[ds.labels[i]];
      auto row = ds.features.row(i);
      for (std::size_t j = 0; j < p; ++j)
        row[j] = mu[j] + params.noise * normal(rng);
    }
    return ds;
  }

  const std::size_t k = params.rank;
  Require(k >= 1 && k <= p, "MakeSynthetic: rank must lie in [1, p]");
  Matrix g(p, k);
  for (double& x : g.values()) x = normal(rng);
  const Matrix basis = HouseholderQr(g).q;  // p x k, orthonormal columns
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < n_classes; ++c) means.push_back(sphere_point(k));
  std::vector<double> z(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = means[ds.labels[i]];
    for (std::size_t a = 0; a < k; ++a) z[a] = mu[a] + params.noise * normal(rng);
    auto row = ds.features.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      double v = 0.0;
      for (std::size_t a = 0; a < k; ++a) v += basis(j, a) * z[a];
      row[j] = v + params.noise_floor * normal(rng);
    }
  }
  return ds;
}

}  // namespace pcsinit
