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

#include "pcsinit/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/seed.h"

namespace pcsinit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 100;

// Entries below this (for unit vectors) are skipped when fixing signs.
constexpr double kSignThreshold = 1e-12;

void ScaleSpan(std::span<double> v, double s) {
  for (double& x : v) x *= s;
}

// Returns +1 or -1 such that the first non-negligible entry of v times the
// sign is positive.
double CanonicalSign(std::span<const double> v) {
  for (double x : v) {
    if (std::abs(x) > kSignThreshold) return x < 0 ? -1.0 : 1.0;
  }
  return 1.0;
}

// Rows of `basis` are orthonormal for indices where filled[i] is true; fills
// the remaining rows with unit vectors orthogonal to all others by
// Gram-Schmidt over the standard basis.
void CompleteOrthonormalRows(Matrix& basis, std::vector<bool> filled) {
  const std::size_t k = basis.rows();
  const std::size_t n = basis.cols();
  std::size_t candidate = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (filled[i]) continue;
    bool placed = false;
    while (!placed && candidate < n) {
      std::vector<double> v(n, 0.0);
      v[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
          if (!filled[j]) continue;
          const double proj = Dot(v, basis.row(j));
          auto bj = basis.row(j);
          for (std::size_t t = 0; t < n; ++t) v[t] -= proj * bj[t];
        }
      }
      const double nv = Norm2(v);
      if (nv > 0.5 / std::sqrt(static_cast<double>(n))) {
        ScaleSpan(v, 1.0 / nv);
        std::copy(v.begin(), v.end(), basis.row(i).begin());
        filled[i] = true;
        placed = true;
      }
    }
    if (!placed) throw NumericalError("Svd: orthonormal completion failed");
  }
}

// One-sided Jacobi on a square matrix r. On return, rows of `w` are the
// mutually orthogonal columns of r * V and rows of `v` are the columns of V.
void OneSidedJacobi(const Matrix& r, Matrix& w, Matrix& v) {
  const std::size_t n = r.rows();
  w = Transpose(r);
  v = Matrix::Identity(n);
  const double tol = std::max(1e-15, static_cast<double>(n) * kEps);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        auto wi = w.row(i);
        auto wj = w.row(j);
        const double alpha = Dot(wi, wi);
        const double beta = Dot(wj, wj);
        const double gamma = Dot(wi, wj);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double a = wi[k];
          const double b = wj[k];
          wi[k] = c * a - s * b;
          wj[k] = s * a + c * b;
        }
        auto vi = v.row(i);
        auto vj = v.row(j);
        for (std::size_t k = 0; k < n; ++k) {
          const double a = vi[k];
          const double b = vj[k];
          vi[k] = c * a - s * b;
          vj[k] = s * a + c * b;
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalError("Svd: one-sided Jacobi did not converge in " +
                       std::to_string(kMaxJacobiSweeps) + " sweeps");
}

// SVD for rows >= cols. Returns u with orthonormal columns but leaves sign
// normalization to the caller.
SvdResult TallSvd(const Matrix& a) {
  const std::size_t n = a.cols();
  QrResult qr = HouseholderQr(a);
  Matrix w, v;
  OneSidedJacobi(qr.r, w, v);

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = Norm2(w.row(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return sigma[x] > sigma[y];
  });

  const double sigma_max = sigma[order[0]];
  const double zero_floor =
      sigma_max * 10.0 * kEps * static_cast<double>(std::max(a.rows(), n));

  SvdResult out;
  out.singular_values.resize(n);
  Matrix ur_rows(n, n);  // row i = i-th left singular vector of r
  out.vt = Matrix(n, n);
  std::vector<bool> filled(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    out.singular_values[i] = sigma[src];
    auto vrow = v.row(src);
    std::copy(vrow.begin(), vrow.end(), out.vt.row(i).begin());
    if (sigma[src] > zero_floor && sigma[src] > 0.0) {
      auto wrow = w.row(src);
      auto dst = ur_rows.row(i);
      for (std::size_t k = 0; k < n; ++k) dst[k] = wrow[k] / sigma[src];
      filled[i] = true;
    }
  }
  CompleteOrthonormalRows(ur_rows, filled);
  // u = q * ur where ur's columns are the rows of ur_rows.
  out.u = MatMulNT(qr.q, ur_rows);
  return out;
}

}  // namespace

Matrix MatMul(const Matrix& a, const Matrix& b) {
  Require(a.cols() == b.rows(),
          "MatMul: inner dimensions " + std::to_string(a.cols()) + " and " +
              std::to_string(b.rows()) + " differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix MatMulNT(const Matrix& a, const Matrix& b) {
  Require(a.cols() == b.cols(), "MatMulNT: column counts differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = Dot(ai, b.row(j));
  }
  return c;
}

Matrix MatMulTN(const Matrix& a, const Matrix& b) {
  Require(a.rows() == b.rows(), "MatMulTN: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix Gram(const Matrix& a) {
  const std::size_t p = a.cols();
  Matrix g(p, p);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    for (std::size_t i = 0; i < p; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto gi = g.row(i);
      for (std::size_t j = i; j < p; ++j) gi[j] += aki * ak[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> v) {
  // Scaled accumulation avoids overflow for huge entries.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

double FrobeniusNorm(const Matrix& a) { return Norm2(a.values()); }

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  Require(a.rows() == b.rows() && a.cols() == b.cols(),
          "MaxAbsDiff: shape mismatch");
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i)
    m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

QrResult HouseholderQr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Require(m >= n, "HouseholderQr: requires rows >= cols");
  Matrix work = a;
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = work(i, k);
    const double xnorm = Norm2(v);
    if (xnorm == 0.0) continue;
    const double alpha = v[0] >= 0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm = Norm2(v);
    if (vnorm == 0.0) continue;
    ScaleSpan(v, 1.0 / vnorm);
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * work(i, j);
      s *= 2.0;
      for (std::size_t i = k; i < m; ++i) work(i, j) -= s * v[i - k];
    }
    reflectors[k] = std::move(v);
  }

  QrResult out;
  out.r = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.r(i, j) = work(i, j);

  out.q = Matrix(m, n);
  for (std::size_t i = 0; i < n; ++i) out.q(i, i) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const auto& v = reflectors[kk];
    if (v.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * out.q(i, j);
      s *= 2.0;
      for (std::size_t i = kk; i < m; ++i) out.q(i, j) -= s * v[i - kk];
    }
  }
  return out;
}

SvdResult Svd(const Matrix& a) {
  Require(a.rows() >= 1 && a.cols() >= 1, "Svd: empty matrix");
  SvdResult out;
  if (a.rows() >= a.cols()) {
    out = TallSvd(a);
  } else {
    SvdResult t = TallSvd(Transpose(a));
    out.u = Transpose(t.vt);
    out.singular_values = std::move(t.singular_values);
    out.vt = Transpose(t.u);
  }
  for (std::size_t i = 0; i < out.vt.rows(); ++i) {
    if (CanonicalSign(out.vt.row(i)) < 0) {
      ScaleSpan(out.vt.row(i), -1.0);
      for (std::size_t r = 0; r < out.u.rows(); ++r) out.u(r, i) = -out.u(r, i);
    }
  }
  return out;
}

EigResult SymEig(const Matrix& a) {
  const std::size_t n = a.rows();
  Require(n >= 1 && a.cols() == n, "SymEig: matrix must be square");
  double max_abs = 0.0;
  for (double x : a.values()) max_abs = std::max(max_abs, std::abs(x));
  const double sym_tol = 1e-10 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      Require(std::abs(a(i, j) - a(j, i)) <= sym_tol,
              "SymEig: matrix is not symmetric");

  Matrix w = Symmetrize(a);
  Matrix v = Matrix::Identity(n);
  const double fro = FrobeniusNorm(w);
  bool converged = fro == 0.0 || n == 1;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += w(p, q) * w(p, q);
    if (std::sqrt(off) <= 1e-15 * fro) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double app = w(p, p);
        const double aqq = w(q, q);
        if (sweep > 3 && std::abs(apq) <= 1e-2 * kEps * std::abs(app) &&
            std::abs(apq) <= 1e-2 * kEps * std::abs(aqq)) {
          w(p, q) = 0.0;
          w(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        w(p, p) = app - t * apq;
        w(q, q) = aqq + t * apq;
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = w(r, p);
          const double h = w(r, q);
          const double rp = g - s * (h + g * tau);
          const double rq = h + s * (g - h * tau);
          w(r, p) = rp;
          w(p, r) = rp;
          w(r, q) = rq;
          w(q, r) = rq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double h = v(r, q);
          v(r, p) = g - s * (h + g * tau);
          v(r, q) = h + s * (g - h * tau);
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += w(p, q) * w(p, q);
    if (std::sqrt(off) > 1e-15 * fro)
      throw NumericalError("SymEig: Jacobi iteration did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return w(x, x) > w(y, y);
  });
  EigResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = w(src, src);
    std::vector<double> col = v.column(src);
    const double sign = CanonicalSign(col);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = sign * col[r];
  }
  return out;
}

double SpectralNorm(const Matrix& a, double tol, std::size_t max_iter) {
  Require(tol > 0.0, "SpectralNorm: tol must be positive");
  const double fro = FrobeniusNorm(a);
  if (fro == 0.0) return 0.0;
  const std::size_t n = a.cols();

  // Returns a negative value when the iterate collapses into the null space.
  auto run = [&](std::vector<double> v) {
    ScaleSpan(v, 1.0 / Norm2(v));
    Matrix vm(n, 1);
    double prev = 0.0;
    double sigma = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      std::copy(v.begin(), v.end(), vm.values().begin());
      Matrix w = MatMul(a, vm);
      sigma = Norm2(w.values());
      if (sigma <= fro * 1e-14) return -1.0;
      Matrix z = MatMulTN(a, w);
      const double nz = Norm2(z.values());
      if (nz == 0.0) return -1.0;
      for (std::size_t i = 0; i < n; ++i) v[i] = z(i, 0) / nz;
      if (it > 0 && std::abs(sigma - prev) <= tol * 1e-2 * sigma) break;
      prev = sigma;
    }
    return sigma;
  };

  const double from_ones = run(std::vector<double>(n, 1.0));
  std::mt19937_64 rng(DeriveSeed({a.rows(), a.cols()}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> start(n);
  for (double& x : start) x = normal(rng);
  const double from_random = run(std::move(start));
  const double best = std::max(from_ones, from_random);
  if (best < 0.0) throw NumericalError("SpectralNorm: power iteration stalled");
  return best;
}

double PositiveEigenvalueFloor(double lambda_max, std::size_t n) {
  return lambda_max * 1e-12 * static_cast<double>(n);
}

double ConditionNumber(const Matrix& a) {
  EigResult eig = SymEig(a);
  const double lambda_max = eig.eigenvalues.front();
  if (!(lambda_max > 0.0)) return std::numeric_limits<double>::infinity();
  const double floor = PositiveEigenvalueFloor(lambda_max, a.rows());
  double lambda_min = lambda_max;
  for (double l : eig.eigenvalues)
    if (l > floor) lambda_min = std::min(lambda_min, l);
  return lambda_max / lambda_min;
}

Matrix Symmetrize(const Matrix& a) {
  Require(a.rows() == a.cols(), "Symmetrize: matrix must be square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace pcsinit
