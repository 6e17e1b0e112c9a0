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

#ifndef PCSINIT_LINALG_H_
#define PCSINIT_LINALG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcsinit/matrix.h"

namespace pcsinit {

// Thin singular value decomposition a = u * diag(singular_values) * vt with
// k = min(rows, cols): u is rows x k with orthonormal columns, vt is k x cols
// with orthonormal rows, singular values descending and nonnegative.
// Each row of vt has its first non-negligible entry positive.
struct SvdResult {
  Matrix u;
  std::vector<double> singular_values;
  Matrix vt;
};

// Symmetric eigendecomposition. Eigenvalues descending; eigenvectors are the
// columns of `eigenvectors`, each with its first non-negligible entry positive.
struct EigResult {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

// Householder QR of a rows >= cols matrix: a = q * r, q thin (rows x cols).
struct QrResult {
  Matrix q;
  Matrix r;
};

Matrix MatMul(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& a);
// a * b^T without materializing the transpose.
Matrix MatMulNT(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix MatMulTN(const Matrix& a, const Matrix& b);
// a^T * a, exactly symmetric.
Matrix Gram(const Matrix& a);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> v);
double FrobeniusNorm(const Matrix& a);
// Largest absolute entry of a - b.
double MaxAbsDiff(const Matrix& a, const Matrix& b);

QrResult HouseholderQr(const Matrix& a);

// Throws NumericalError if the Jacobi sweeps fail to converge.
SvdResult Svd(const Matrix& a);

// Requires a square matrix symmetric within 1e-10 (relative to its largest
// entry when that exceeds 1); throws ContractError otherwise.
EigResult SymEig(const Matrix& a);

// Largest singular value by power iteration on a^T a. The iteration starts
// from the normalized all-ones vector and is repeated from a seeded random
// start; the larger estimate is returned, which guards against a start
// vector orthogonal to the dominant singular direction. Iteration stops
// once the relative change of the estimate falls below tol * 1e-2.
double SpectralNorm(const Matrix& a, double tol = 1e-10,
                     std::size_t max_iter = 20000);

// lambda_max / lambda_min+ of a symmetric positive semidefinite matrix, where
// lambda_min+ is the smallest eigenvalue above lambda_max * 1e-12 * n.
// Returns +infinity when no eigenvalue is positive.
double ConditionNumber(const Matrix& a);

// Rank tolerance used by condition_number.
double PositiveEigenvalueFloor(double lambda_max, std::size_t n);

// Symmetrizes (a + a^T) / 2.
Matrix Symmetrize(const Matrix& a);

}  // namespace pcsinit

#endif  // PCSINIT_LINALG_H_
