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

#ifndef PCSINIT_EXPERIMENT_H_
#define PCSINIT_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcsinit/data.h"
#include "pcsinit/theory.h"
#include "pcsinit/training.h"

namespace pcsinit {

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kGaussianBlobs;
  std::size_t n_samples = 500;
  std::size_t n_features = 30;
  std::size_t n_classes = 3;
  SyntheticParams params;
};

struct ExperimentConfig {
  // CSV source; the synthetic spec is used when empty.
  std::filesystem::path dataset;
  std::string label_column = "label";  // header name or zero-based index
  bool has_header = true;
  SyntheticSpec synthetic;

  std::vector<Variant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
  std::size_t repeats = 10;
  double train_fraction = 0.7;
  double variance_threshold = 0.95;
  std::size_t n_layers = 5;
  std::size_t n_frozen = 30;
  std::size_t n_total = 200;
  double subset_fraction = 0.2;
  BaselineInit baseline_initializer = BaselineInit::kHe;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  // Gaussian noise added to both splits after standardization; 0 disables.
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = available parallelism
  std::filesystem::path out = "pcsinit_out";

  // Attributions for the first shap_points test rows; 0 disables.
  std::size_t shap_points = 0;
  std::size_t shap_background = 100;
  std::size_t shap_coalitions = 2048;  // 0 = exact enumeration
  std::uint64_t shap_seed = 0;

  bool theory = true;
  double theory_sigma = 1.0;
  std::size_t theory_draws = 100;
  std::size_t theory_pairs = 1000;
  std::size_t theory_noise_samples = 100000;
  std::size_t theory_bound_samples = 1000;
};

// Sets one key of the flat key=value format. Keys: dataset, label_column,
// has_header, synthetic (blobs|low_rank), n_samples, n_features, n_classes,
// separation, cluster_noise, rank, noise_floor, variant (comma list),
// repeats, train_fraction, variance_threshold, n_layers, n_frozen, epochs,
// subset_fraction, baseline, learning_rate, batch_size, noise_sigma, seed,
// threads, out, shap_points, shap_background, shap_coalitions, shap_seed,
// theory, theory_sigma, theory_draws, theory_pairs, theory_noise_samples,
// theory_bound_samples. Throws ContractError on unknown keys or bad values.
void ApplySetting(ExperimentConfig& config, std::string_view key,
                  std::string_view value);

// Reads `key = value` lines ('#' starts a comment) on top of `base`.
// Errors carry the offending line.
ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                ExperimentConfig base = {});

void Validate(const ExperimentConfig& config);

// The CSV or the generated synthetic dataset, not yet standardized.
Dataset LoadExperimentData(const ExperimentConfig& config);

// Worker count: config.threads (or hardware concurrency), capped by the
// PCSINIT_THREADS environment variable and by `tasks`.
std::size_t WorkerCount(const ExperimentConfig& config, std::size_t tasks);

TrainConfig MakeTrainConfig(const ExperimentConfig& config, Variant variant,
                            std::uint64_t run_seed);

// Seed of repeat `repeat`, shared by every variant of that repeat.
std::uint64_t RepeatSeed(std::uint64_t master_seed, std::size_t repeat);

// Standardized (and optionally noised) train/test splits of one repeat.
std::pair<Dataset, Dataset> PrepareSplits(const Dataset& data,
                                          const ExperimentConfig& config,
                                          std::size_t repeat);

struct VariantRun {
  Variant variant = Variant::kPcsInit;
  TrainRecord record;
};

struct RepeatResult {
  std::size_t repeat = 0;
  std::vector<VariantRun> runs;
  // Trained models in variant order, kept only on request.
  std::vector<TrainResult> models;
  std::string error;  // empty on success
};

// Trains every configured variant on one repeat's splits. Module errors are
// caught and reported in `error`.
RepeatResult RunRepeat(const Dataset& data, const ExperimentConfig& config,
                       std::size_t repeat, bool keep_models = false);

// Writes metrics.jsonl, summary.json, timing.csv, theorem_reports.json,
// checkpoints/ and, when enabled, the SHAP CSVs into config.out.
// Returns 0, or 1 when any repeat failed.
int RunExperiment(const ExperimentConfig& config);

// Theory suite on repeat 0's training split; writes theorem_reports.json,
// prints a table. Returns 1 when any check fails.
int RunVerify(const ExperimentConfig& config);

// Fits PCA on the whole (standardized) dataset and writes pca_report.json
// and model.pca.
int RunPca(const ExperimentConfig& config);

// Attributions from a saved checkpoint for the first shap_points rows of the
// dataset. With a PCA model the network is taken to consume component scores
// and attributions are back-projected to features.
int RunExplain(const ExperimentConfig& config,
               const std::filesystem::path& checkpoint,
               const std::optional<std::filesystem::path>& pca_model);

}  // namespace pcsinit

#endif  // PCSINIT_EXPERIMENT_H_
