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

#include "pcsinit/theory.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pcsinit/errors.h"
#include "pcsinit/linalg.h"
#include "pcsinit/seed.h"
#include "pcsinit/training.h"

namespace pcsinit {
namespace {

constexpr std::size_t kChunk = 8192;

Matrix GaussianMatrix(std::size_t rows, std::size_t cols, double sigma,
                      std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : m.values()) v = sigma * normal(rng);
  return m;
}

double RowDistance(const Matrix& a, const Matrix& b, std::size_t i) {
  auto ra = a.row(i);
  auto rb = b.row(i);
  double scale = 0.0;
  for (std::size_t j = 0; j < ra.size(); ++j)
    scale = std::max(scale, std::abs(ra[j] - rb[j]));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < ra.size(); ++j) {
    const double d = (ra[j] - rb[j]) / scale;
    sum += d * d;
  }
  return scale * std::sqrt(sum);
}

TheoremReport Report(TheoremId id, double tolerance, std::size_t trials) {
  TheoremReport r;
  r.id = id;
  r.tolerance = tolerance;
  r.trials = trials;
  return r;
}

}  // namespace

std::string_view ToString(TheoremId id) {
  switch (id) {
    case TheoremId::kConditioning:
      return "conditioning";
    case TheoremId::kLipschitzLinear:
      return "lipschitz_linear";
    case TheoremId::kLipschitzAct:
      return "lipschitz_act";
    case TheoremId::kNoiseDistribution:
      return "noise_distribution";
    case TheoremId::kNoiseNorm:
      return "noise_norm";
    case TheoremId::kLayerNoiseBound:
      return "layer_noise_bound";
  }
  return "unknown";
}

double TheoremReport::quantity(std::string_view name) const {
  for (const auto& [key, value] : quantities)
    if (key == name) return value;
  throw ContractError("TheoremReport: no quantity named " + std::string(name));
}

TheoremReport CheckConditioning(const Matrix& x,
                                const ComponentSelection& selection) {
  Require(x.rows() >= 1 && x.cols() >= 1, "CheckConditioning: empty matrix");
  const Matrix h = Gram(x);
  const EigResult eig = SymEig(h);
  double total = 0.0;
  for (double l : eig.eigenvalues) total += std::max(l, 0.0);
  Require(total > 0.0, "CheckConditioning: x is identically zero");
  std::vector<double> ratios;
  for (double l : eig.eigenvalues) ratios.push_back(std::max(l, 0.0) / total);
  const std::size_t r = SelectComponentCount(ratios, selection);
  const Matrix w_r = eig.eigenvectors.LeftColumns(r);
  const Matrix h_r = Symmetrize(MatMulTN(w_r, MatMul(h, w_r)));

  const double kappa_full = ConditionNumber(h);
  const double kappa_reduced = ConditionNumber(h_r);
  TheoremReport rep = Report(TheoremId::kConditioning, 1e-9, 1);
  rep.quantities = {{"kappa_full", kappa_full},
                    {"kappa_reduced", kappa_reduced},
                    {"lambda_1", eig.eigenvalues.front()},
                    {"lambda_r", eig.eigenvalues[r - 1]},
                    {"r", static_cast<double>(r)}};
  rep.pass = kappa_reduced <= kappa_full * (1.0 + rep.tolerance);
  return rep;
}

TheoremReport CheckLipschitz(const Mlp& net, std::size_t n_pairs,
                             std::uint64_t seed) {
  Require(net.num_layers() >= 1, "CheckLipschitz: empty network");
  Require(n_pairs >= 2, "CheckLipschitz: need at least 2 pairs");
  const Layer& first = net.layer(0);
  const bool linear = first.activation == Activation::kIdentity;
  const double tol = 1e-6;
  TheoremReport rep = Report(
      linear ? TheoremId::kLipschitzLinear : TheoremId::kLipschitzAct, tol, n_pairs);

  const double sigma_max = SpectralNorm(first.weights);
  const double bound = LipschitzConstant(first.activation) * sigma_max;
  const Matrix direction = Svd(first.weights).vt;  // top row first

  std::mt19937_64 rng(DeriveSeed({seed, stream::kTheory}));
  const std::size_t p = first.in_dim();
  const std::size_t n_aligned = n_pairs / 2;
  const std::size_t n_random = n_pairs - n_aligned;
  Matrix xs = GaussianMatrix(n_pairs, p, 1.0, rng);
  Matrix ys(n_pairs, p);
  {
    const Matrix random_ys = GaussianMatrix(n_random, p, 1.0, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n_pairs; ++i) {
      auto y = ys.row(i);
      auto x = xs.row(i);
      if (i < n_random) {
        std::copy(random_ys.row(i).begin(), random_ys.row(i).end(), y.begin());
      } else {
        double t = normal(rng);
        if (t == 0.0) t = 1.0;
        for (std::size_t j = 0; j < p; ++j) y[j] = x[j] + t * direction(0, j);
      }
    }
  }
  const Matrix fx = ForwardTo(net, xs, 0);
  const Matrix fy = ForwardTo(net, ys, 0);
  double sup_ratio = 0.0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const double din = RowDistance(xs, ys, i);
    if (din == 0.0) continue;
    const double ratio = RowDistance(fx, fy, i) / din;
    sup_ratio = std::max(sup_ratio, ratio);
    if (ratio > bound * (1.0 + tol)) ++violations;
  }
  const bool pc_layer = first.init_kind == InitKind::kPrincipalComponents;
  rep.quantities = {{"sigma_max", sigma_max},
                    {"lipschitz_bound", bound},
                    {"sup_ratio", sup_ratio},
                    {"violations", static_cast<double>(violations)}};
  rep.pass = violations == 0 && (!pc_layer || std::abs(sigma_max - 1.0) <= tol);
  if (pc_layer) rep.note = "principal-components first layer: sigma_max must be 1";
  return rep;
}

TheoremReport CheckNoiseDistribution(const PcaModel& model, double sigma,
                                     std::size_t n_samples, std::uint64_t seed) {
  Require(n_samples >= 10000, "CheckNoiseDistribution: need at least 10000 samples");
  Require(sigma >= 0.0 && std::isfinite(sigma),
          "CheckNoiseDistribution: sigma must be finite and >= 0");
  const Matrix& w = model.components;
  const std::size_t p = w.rows();
  const std::size_t r = w.cols();
  TheoremReport rep = Report(TheoremId::kNoiseDistribution, 4.0, n_samples);

  // Analytic covariance sigma^2 W^T W.
  Matrix expected = Gram(w);
  for (double& v : expected.values()) v *= sigma * sigma;

  std::mt19937_64 rng(DeriveSeed({seed, stream::kNoise}));
  std::vector<double> sum(r, 0.0);
  Matrix second(r, r);
  for (std::size_t done = 0; done < n_samples; done += kChunk) {
    const std::size_t rows = std::min(kChunk, n_samples - done);
    const Matrix eta = GaussianMatrix(rows, p, sigma, rng);
    const Matrix y = MatMul(eta, w);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t k = 0; k < r; ++k) sum[k] += y(i, k);
    const Matrix g = Gram(y);
    for (std::size_t i = 0; i < g.values().size(); ++i)
      second.values()[i] += g.values()[i];
  }
  const double n = static_cast<double>(n_samples);
  const double root_n = std::sqrt(n);
  double max_mean_z = 0.0;
  double max_cov_z = 0.0;
  double max_cov_gap = 0.0;
  bool exact_zero_ok = true;
  for (std::size_t k = 0; k < r; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt(expected(k, k)) / root_n;
    if (se == 0.0) {
      exact_zero_ok = exact_zero_ok && mean == 0.0;
    } else {
      max_mean_z = std::max(max_mean_z, std::abs(mean) / se);
    }
  }
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t l = 0; l < r; ++l) {
      // Zero-mean estimator; its variance is (S_kk S_ll + S_kl^2) / n.
      const double cov = second(k, l) / n;
      const double gap = std::abs(cov - expected(k, l));
      max_cov_gap = std::max(max_cov_gap, gap);
      const double se =
          std::sqrt(expected(k, k) * expected(l, l) + expected(k, l) * expected(k, l)) /
          root_n;
      if (se == 0.0) {
        exact_zero_ok = exact_zero_ok && cov == 0.0;
      } else {
        max_cov_z = std::max(max_cov_z, gap / se);
      }
    }
  }
  // Diagonal sigma^2 lambda_i with lambda_i the covariance eigenvalues.
  const double dof = model.n_fitted > 1 ? static_cast<double>(model.n_fitted - 1) : 1.0;
  double eigenvalue_gap = 0.0;
  for (std::size_t k = 0; k < r; ++k)
    eigenvalue_gap = std::max(
        eigenvalue_gap, std::abs(second(k, k) / n - sigma * sigma * model.eigenvalues[k] / dof));

  rep.quantities = {{"sigma", sigma},
                    {"max_mean_z", max_mean_z},
                    {"max_cov_z", max_cov_z},
                    {"max_cov_gap", max_cov_gap},
                    {"eigenvalue_diag_max_gap", eigenvalue_gap},
                    {"r", static_cast<double>(r)}};
  rep.pass = exact_zero_ok && max_mean_z <= rep.tolerance && max_cov_z <= rep.tolerance;
  rep.note =
      "tolerance in standard errors; covariance checked against sigma^2 W_r^T W_r, "
      "eigenvalue_diag_max_gap compares with diag(sigma^2 lambda_i) for information";
  return rep;
}

TheoremReport CheckNoiseNorm(const PcaModel& model, double sigma,
                             std::size_t n_samples, std::uint64_t seed) {
  Require(n_samples >= 1, "CheckNoiseNorm: need at least one sample");
  Require(sigma >= 0.0 && std::isfinite(sigma),
          "CheckNoiseNorm: sigma must be finite and >= 0");
  const Matrix& w = model.components;
  const std::size_t p = w.rows();
  const double tol = 1e-9;
  TheoremReport rep = Report(TheoremId::kNoiseNorm, tol, n_samples);
  std::mt19937_64 rng(DeriveSeed({seed, stream::kNoise, 1}));
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double ratio_sum = 0.0;
  double equality_gap = 0.0;
  for (std::size_t done = 0; done < n_samples; done += kChunk) {
    const std::size_t rows = std::min(kChunk, n_samples - done);
    const Matrix eta = GaussianMatrix(rows, p, sigma, rng);
    const Matrix y = MatMul(eta, w);
    for (std::size_t i = 0; i < rows; ++i) {
      const double in = Norm2(eta.row(i));
      const double out = Norm2(y.row(i));
      if (out > in * (1.0 + tol)) ++violations;
      equality_gap = std::max(equality_gap, std::abs(in - out));
      if (in > 0.0) {
        max_ratio = std::max(max_ratio, out / in);
        ratio_sum += out / in;
      }
    }
  }
  rep.quantities = {{"sigma", sigma},
                    {"max_ratio", max_ratio},
                    {"mean_ratio", ratio_sum / static_cast<double>(n_samples)},
                    {"equality_max_gap", equality_gap},
                    {"violations", static_cast<double>(violations)}};
  rep.pass = violations == 0;
  rep.note = "checks the contraction |W_r^T eta| <= |eta|; equality needs r = p";
  return rep;
}

TheoremReport CheckLayerNoiseBound(const Mlp& net, double sigma,
                                   std::size_t n_samples, std::uint64_t seed) {
  Require(net.num_layers() >= 1, "CheckLayerNoiseBound: empty network");
  Require(n_samples >= 1, "CheckLayerNoiseBound: need at least one sample");
  Require(sigma >= 0.0 && std::isfinite(sigma),
          "CheckLayerNoiseBound: sigma must be finite and >= 0");
  const std::size_t n_layers = net.num_layers();
  const double tol = 1e-6;
  TheoremReport rep = Report(TheoremId::kLayerNoiseBound, tol, n_samples);

  std::vector<double> factor(n_layers);
  double running = 1.0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = net.layer(l);
    const double norm = SpectralNorm(layer.weights);
    // The first layer contributes |W^1| alone; later layers L_i |W^i|.
    running *= (l == 0 ? 1.0 : LipschitzConstant(layer.activation)) * norm;
    factor[l] = running;
    rep.quantities.emplace_back("spectral_norm_" + std::to_string(l + 1), norm);
  }

  std::mt19937_64 rng(DeriveSeed({seed, stream::kNoise, 2}));
  std::size_t violations = 0;
  double max_tightness = 0.0;
  for (std::size_t done = 0; done < n_samples; done += kChunk) {
    const std::size_t rows = std::min(kChunk, n_samples - done);
    const Matrix x = GaussianMatrix(rows, net.in_dim(), 1.0, rng);
    const Matrix eta = GaussianMatrix(rows, net.in_dim(), sigma, rng);
    Matrix noisy = x;
    for (std::size_t i = 0; i < noisy.values().size(); ++i)
      noisy.values()[i] += eta.values()[i];
    const ForwardPass clean = Forward(net, x);
    const ForwardPass dirty = Forward(net, noisy);
    for (std::size_t i = 0; i < rows; ++i) {
      const double eta_norm = Norm2(eta.row(i));
      for (std::size_t l = 0; l < n_layers; ++l) {
        const double observed =
            RowDistance(clean.activations[l + 1], dirty.activations[l + 1], i);
        const double bound = factor[l] * eta_norm;
        if (observed > bound * (1.0 + tol)) ++violations;
        if (bound > 0.0) max_tightness = std::max(max_tightness, observed / bound);
      }
    }
  }
  rep.quantities.emplace_back("first_layer_norm", factor.front());
  rep.quantities.emplace_back("max_tightness", max_tightness);
  rep.quantities.emplace_back("violations", static_cast<double>(violations));
  rep.pass = violations == 0;
  return rep;
}

std::vector<TheoremReport> RunTheorySuite(const Matrix& x,
                                          const TheorySuiteConfig& config) {
  Require(x.rows() >= 4 && x.cols() >= 1, "RunTheorySuite: need at least 4 rows");
  Require(config.conditioning_draws >= 1, "RunTheorySuite: need a conditioning draw");
  const auto selection = ComponentSelection::VarianceThreshold(config.variance_threshold);
  std::vector<TheoremReport> reports;

  // Conditioning on x itself, then on random half-size row subsets.
  TheoremReport cond = CheckConditioning(x, selection);
  std::mt19937_64 rng(DeriveSeed({config.seed, stream::kTheory, 0}));
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  double worst_ratio = cond.quantity("kappa_reduced") / cond.quantity("kappa_full");
  for (std::size_t d = 1; d < config.conditioning_draws; ++d) {
    std::vector<std::size_t> picked;
    std::sample(all.begin(), all.end(), std::back_inserter(picked), x.rows() / 2, rng);
    const TheoremReport sub = CheckConditioning(x.SelectRows(picked), selection);
    cond.pass = cond.pass && sub.pass;
    worst_ratio = std::max(worst_ratio, sub.quantity("kappa_reduced") /
                                            sub.quantity("kappa_full"));
  }
  cond.trials = config.conditioning_draws;
  cond.quantities.emplace_back("max_kappa_ratio", worst_ratio);
  reports.push_back(std::move(cond));

  const PcaModel pca = Fit(x, selection);
  TrainConfig tc;
  tc.n_layers = config.n_layers;
  std::vector<Mlp> nets;
  for (Variant v : {Variant::kPcsInit, Variant::kPcsInitAct}) {
    tc.variant = v;
    const auto specs = ArchitectureFor(v, x.cols(), pca.n_components(),
                                       config.n_classes, tc, &pca);
    nets.push_back(Build(specs, config.seed));
    reports.push_back(CheckLipschitz(nets.back(), config.lipschitz_pairs, config.seed));
  }
  reports.push_back(CheckNoiseDistribution(pca, config.noise_sigma,
                                           config.noise_samples, config.seed));
  reports.push_back(
      CheckNoiseNorm(pca, config.noise_sigma, config.noise_samples, config.seed));
  reports.push_back(CheckLayerNoiseBound(nets.front(), config.noise_sigma,
                                         config.bound_samples, config.seed));
  return reports;
}

}  // namespace pcsinit
