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

#include "pcsinit/matrix.h"

#include <cmath>
#include <string>

#include "pcsinit/errors.h"

namespace pcsinit {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  Require(std::isfinite(fill), "Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  Require(data_.size() == rows * cols,
          "Matrix: payload length " + std::to_string(data_.size()) +
              " does not match " + std::to_string(rows) + "x" +
              std::to_string(cols));
  for (double v : data_) Require(std::isfinite(v), "Matrix: non-finite entry");
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    Require(std::isfinite(diag[i]), "Matrix: non-finite entry");
    m(i, i) = diag[i];
  }
  return m;
}

Matrix Matrix::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t p = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(n * p);
  for (const auto& r : rows) {
    Require(r.size() == p, "Matrix::FromRows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(n, p, std::move(data));
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::SelectRows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    Require(indices[k] < rows_, "Matrix::SelectRows: index out of range");
    auto src = row(indices[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

Matrix Matrix::LeftColumns(std::size_t count) const {
  Require(count <= cols_, "Matrix::LeftColumns: count exceeds cols");
  Matrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, j);
  return out;
}

}  // namespace pcsinit
