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

#include "pcsinit/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pcsinit/checkpoint.h"
#include "pcsinit/errors.h"
#include "pcsinit/explain.h"
#include "pcsinit/seed.h"
#include "pcsinit/text.h"

namespace pcsinit {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string Quote(std::string_view s) { return "'" + std::string(s) + "'"; }

std::uint64_t ParseU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  Require(ec == std::errc() && ptr == v.data() + v.size() && !v.empty(),
          "config: " + std::string(key) + " expects a non-negative integer, got " +
              Quote(v));
  return out;
}

std::size_t ParseCount(std::string_view key, std::string_view v) {
  return static_cast<std::size_t>(ParseU64(key, v));
}

double ParseReal(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  Require(ec == std::errc() && ptr == v.data() + v.size() && !v.empty() &&
              std::isfinite(out),
          "config: " + std::string(key) + " expects a real number, got " + Quote(v));
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractError("config: " + std::string(key) + " expects true or false, got " +
                      Quote(v));
}

std::vector<Variant> ParseVariants(std::string_view v) {
  std::vector<Variant> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const std::string_view item = Trim(v.substr(0, comma));
    if (!item.empty()) {
      const auto parsed = ParseVariant(item);
      Require(parsed.has_value(), "config: unknown variant " + Quote(item));
      if (std::find(out.begin(), out.end(), *parsed) == out.end())
        out.push_back(*parsed);
    }
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  Require(!out.empty(), "config: variant list is empty");
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Json ToJson(const TheoremReport& r) {
  Json q = Json::object();
  for (const auto& [name, value] : r.quantities) q[name] = value;
  Json j;
  j["theorem_id"] = std::string(ToString(r.id));
  j["pass"] = r.pass;
  j["tolerance"] = r.tolerance;
  j["trials"] = r.trials;
  j["quantities"] = std::move(q);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), "cannot write " + path.string());
  out << text;
  Require(static_cast<bool>(out), "write failed for " + path.string());
}

TheorySuiteConfig MakeTheoryConfig(const ExperimentConfig& c, std::size_t n_classes) {
  TheorySuiteConfig t;
  t.variance_threshold = c.variance_threshold;
  t.n_layers = c.n_layers;
  t.n_classes = std::max<std::size_t>(n_classes, 2);
  t.conditioning_draws = c.theory_draws;
  t.lipschitz_pairs = c.theory_pairs;
  t.noise_sigma = c.theory_sigma;
  t.noise_samples = c.theory_noise_samples;
  t.bound_samples = c.theory_bound_samples;
  t.seed = DeriveSeed({c.seed, stream::kTheory});
  return t;
}

void PrintTheoryTable(const std::vector<TheoremReport>& reports, std::ostream& os) {
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %-5s %8s  %s\n", "theorem", "pass",
                "trials", "quantities");
  os << line;
  for (const TheoremReport& r : reports) {
    std::string q;
    for (const auto& [name, value] : r.quantities) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s=%.6g ", name.c_str(), value);
      q += buf;
    }
    std::snprintf(line, sizeof line, "%-20s %-5s %8zu  ",
                  std::string(ToString(r.id)).c_str(), r.pass ? "ok" : "FAIL",
                  r.trials);
    os << line << q << '\n';
  }
}

Json ConfigJson(const ExperimentConfig& c) {
  Json j;
  if (c.dataset.empty()) {
    j["dataset"] = "synthetic";
    j["synthetic"] = c.synthetic.kind == SyntheticKind::kGaussianBlobs ? "blobs"
                                                                       : "low_rank";
    j["n_samples"] = c.synthetic.n_samples;
    j["n_features"] = c.synthetic.n_features;
    j["n_classes"] = c.synthetic.n_classes;
    j["separation"] = c.synthetic.params.separation;
    j["cluster_noise"] = c.synthetic.params.noise;
    j["rank"] = c.synthetic.params.rank;
    j["noise_floor"] = c.synthetic.params.noise_floor;
  } else {
    j["dataset"] = c.dataset.filename().string();
    j["label_column"] = c.label_column;
  }
  Json variants = Json::array();
  for (Variant v : c.variants) variants.push_back(std::string(ToString(v)));
  j["variants"] = std::move(variants);
  j["repeats"] = c.repeats;
  j["train_fraction"] = c.train_fraction;
  j["variance_threshold"] = c.variance_threshold;
  j["n_layers"] = c.n_layers;
  j["n_frozen"] = c.n_frozen;
  j["epochs"] = c.n_total;
  j["subset_fraction"] = c.subset_fraction;
  j["baseline"] = std::string(ToString(c.baseline_initializer));
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["noise_sigma"] = c.noise_sigma;
  j["seed"] = c.seed;
  return j;
}

// Explains `points` rows of `inputs` through `predict`.
std::vector<Attribution> ExplainRows(const Predictor& predict, const Matrix& inputs,
                                     const Matrix& background_pool,
                                     const ExperimentConfig& c, UnitKind kind,
                                     std::uint64_t stream_id) {
  ShapConfig shap;
  shap.background = SelectBackground(background_pool, c.shap_background,
                                     DeriveSeed({c.shap_seed, stream::kShap, stream_id}));
  shap.n_coalitions = c.shap_coalitions;
  const std::size_t points = std::min(c.shap_points, inputs.rows());
  std::vector<Attribution> out;
  for (std::size_t i = 0; i < points; ++i) {
    shap.seed = DeriveSeed({c.shap_seed, stream_id, i});
    Attribution a = KernelShap(predict, inputs.row(i), shap);
    a.unit_kind = kind;
    out.push_back(std::move(a));
  }
  return out;
}

void WriteGlobalImportance(const std::vector<Attribution>& attributions,
                           const fs::path& path) {
  const auto ranked = GlobalImportance(attributions);
  std::ostringstream os;
  os << "class,rank,unit_index,unit_kind,mean_abs_value\n";
  for (std::size_t c = 0; c < ranked.size(); ++c)
    for (std::size_t k = 0; k < ranked[c].size(); ++k)
      os << c << ',' << k << ',' << ranked[c][k].unit << ','
         << ToString(attributions.front().unit_kind) << ','
         << FormatDouble(ranked[c][k].mean_abs) << '\n';
  WriteText(path, os.str());
}

// Direct attributions in feature space.
void ExplainDirect(const Mlp& net, const Matrix& inputs, const Matrix& pool,
                   const ExperimentConfig& c, const std::string& prefix) {
  const Predictor predict = [&net](const Matrix& x) { return Predict(net, x); };
  const auto attr = ExplainRows(predict, inputs, pool, c, UnitKind::kFeature, 1);
  if (attr.empty()) return;
  WriteAttributionCsv(attr, c.out / (prefix + "_attributions.csv"));
  WriteGlobalImportance(attr, c.out / (prefix + "_global.csv"));
}

// Component attributions, back-projected feature attributions and heatmap.
void ExplainThroughPca(const Mlp& net, const PcaModel& pca, const Matrix& inputs,
                       const Matrix& pool, const ExperimentConfig& c,
                       const std::string& prefix) {
  const Predictor predict = [&net](const Matrix& z) { return Predict(net, z); };
  const auto attr = ExplainRows(predict, Project(pca, inputs), Project(pca, pool), c,
                                UnitKind::kPrincipalComponent, 2);
  if (attr.empty()) return;
  std::vector<BackProjection> projected;
  std::vector<Attribution> features;
  for (const Attribution& a : attr) {
    projected.push_back(BackProject(a, pca));
    features.push_back(projected.back().features);
  }
  WriteAttributionCsv(attr, c.out / (prefix + "_components.csv"));
  WriteAttributionCsv(features, c.out / (prefix + "_features.csv"));
  WriteHeatmapCsv(projected, c.out / (prefix + "_heatmap.csv"));
  WriteGlobalImportance(features, c.out / (prefix + "_global.csv"));
}

}  // namespace

void ApplySetting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = Trim(value);
  if (key == "dataset") {
    c.dataset = std::string(value);
  } else if (key == "label_column") {
    Require(!value.empty(), "config: label_column is empty");
    c.label_column = std::string(value);
  } else if (key == "has_header") {
    c.has_header = ParseBool(key, value);
  } else if (key == "synthetic") {
    if (value == "blobs") {
      c.synthetic.kind = SyntheticKind::kGaussianBlobs;
    } else if (value == "low_rank") {
      c.synthetic.kind = SyntheticKind::kLowRankPlusNoise;
    } else {
      throw ContractError("config: synthetic must be blobs or low_rank, got " +
                          Quote(value));
    }
  } else if (key == "n_samples") {
    c.synthetic.n_samples = ParseCount(key, value);
  } else if (key == "n_features") {
    c.synthetic.n_features = ParseCount(key, value);
  } else if (key == "n_classes") {
    c.synthetic.n_classes = ParseCount(key, value);
  } else if (key == "separation") {
    c.synthetic.params.separation = ParseReal(key, value);
  } else if (key == "cluster_noise") {
    c.synthetic.params.noise = ParseReal(key, value);
  } else if (key == "rank") {
    c.synthetic.params.rank = ParseCount(key, value);
  } else if (key == "noise_floor") {
    c.synthetic.params.noise_floor = ParseReal(key, value);
  } else if (key == "variant" || key == "variants") {
    c.variants = ParseVariants(value);
  } else if (key == "repeats") {
    c.repeats = ParseCount(key, value);
  } else if (key == "train_fraction") {
    c.train_fraction = ParseReal(key, value);
  } else if (key == "variance_threshold") {
    c.variance_threshold = ParseReal(key, value);
  } else if (key == "n_layers") {
    c.n_layers = ParseCount(key, value);
  } else if (key == "n_frozen") {
    c.n_frozen = ParseCount(key, value);
  } else if (key == "epochs") {
    c.n_total = ParseCount(key, value);
  } else if (key == "subset_fraction") {
    c.subset_fraction = ParseReal(key, value);
  } else if (key == "baseline") {
    const auto b = ParseBaselineInit(value);
    Require(b.has_value(), "config: baseline must be he, xavier or orthogonal");
    c.baseline_initializer = *b;
  } else if (key == "learning_rate") {
    c.learning_rate = ParseReal(key, value);
  } else if (key == "batch_size") {
    c.batch_size = ParseCount(key, value);
  } else if (key == "noise_sigma") {
    c.noise_sigma = ParseReal(key, value);
  } else if (key == "seed") {
    c.seed = ParseU64(key, value);
  } else if (key == "threads") {
    c.threads = ParseCount(key, value);
  } else if (key == "out") {
    Require(!value.empty(), "config: out is empty");
    c.out = std::string(value);
  } else if (key == "shap_points") {
    c.shap_points = ParseCount(key, value);
  } else if (key == "shap_background") {
    c.shap_background = ParseCount(key, value);
  } else if (key == "shap_coalitions") {
    c.shap_coalitions = ParseCount(key, value);
  } else if (key == "shap_seed") {
    c.shap_seed = ParseU64(key, value);
  } else if (key == "theory") {
    c.theory = ParseBool(key, value);
  } else if (key == "theory_sigma") {
    c.theory_sigma = ParseReal(key, value);
  } else if (key == "theory_draws") {
    c.theory_draws = ParseCount(key, value);
  } else if (key == "theory_pairs") {
    c.theory_pairs = ParseCount(key, value);
  } else if (key == "theory_noise_samples") {
    c.theory_noise_samples = ParseCount(key, value);
  } else if (key == "theory_bound_samples") {
    c.theory_bound_samples = ParseCount(key, value);
  } else {
    throw ContractError("config: unknown key " + Quote(key));
  }
}

ExperimentConfig LoadConfigFile(const fs::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected key = value",
                       line_no);
    const std::string_view key = Trim(view.substr(0, eq));
    try {
      ApplySetting(base, key, view.substr(eq + 1));
    } catch (const ContractError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                       line_no, eq + 1);
    }
  }
  return base;
}

void Validate(const ExperimentConfig& c) {
  Require(c.repeats >= 1, "config: repeats must be >= 1");
  Require(!c.variants.empty(), "config: no variants selected");
  Require(c.train_fraction > 0.0 && c.train_fraction < 1.0,
          "config: train_fraction must lie in (0, 1)");
  Require(c.noise_sigma >= 0.0, "config: noise_sigma must be >= 0");
  Require(c.shap_background >= 1, "config: shap_background must be >= 1");
  Require(c.theory_sigma >= 0.0, "config: theory_sigma must be >= 0");
  Require(c.theory_draws >= 1, "config: theory_draws must be >= 1");
  Require(c.theory_pairs >= 2, "config: theory_pairs must be >= 2");
  Require(c.theory_noise_samples >= 10000, "config: theory_noise_samples must be >= 10000");
  Require(c.theory_bound_samples >= 1, "config: theory_bound_samples must be >= 1");
  if (c.dataset.empty()) {
    Require(c.synthetic.n_classes >= 2 &&
                c.synthetic.n_samples >= c.synthetic.n_classes,
            "config: synthetic data needs n_samples >= n_classes >= 2");
    Require(c.synthetic.n_features >= 1, "config: n_features must be >= 1");
  }
  for (Variant v : c.variants) Validate(MakeTrainConfig(c, v, 0));
}

Dataset LoadExperimentData(const ExperimentConfig& c) {
  if (c.dataset.empty()) {
    const SyntheticSpec& s = c.synthetic;
    return MakeSynthetic(s.kind, s.n_samples, s.n_features, s.n_classes, s.params,
                         DeriveSeed({c.seed, stream::kSynthetic}));
  }
  LabelColumn label = c.label_column;
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(
      c.label_column.data(), c.label_column.data() + c.label_column.size(), index);
  if (ec == std::errc() && ptr == c.label_column.data() + c.label_column.size())
    label = index;
  return LoadCsv(c.dataset, label, c.has_header);
}

std::size_t WorkerCount(const ExperimentConfig& c, std::size_t tasks) {
  std::size_t n = c.threads;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PCSINIT_THREADS")) {
    std::size_t cap = 0;
    const std::string_view v(env);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), cap);
    if (ec == std::errc() && ptr == v.data() + v.size() && cap >= 1)
      n = std::min(n, cap);
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

TrainConfig MakeTrainConfig(const ExperimentConfig& c, Variant variant,
                            std::uint64_t run_seed) {
  TrainConfig t;
  t.variant = variant;
  t.subset_fraction = c.subset_fraction;
  t.n_frozen = c.n_frozen;
  t.n_total = c.n_total;
  t.adam.learning_rate = c.learning_rate;
  t.batch_size = c.batch_size;
  t.seed = run_seed;
  t.baseline_initializer = c.baseline_initializer;
  t.n_layers = c.n_layers;
  t.variance_threshold = c.variance_threshold;
  return t;
}

std::uint64_t RepeatSeed(std::uint64_t master_seed, std::size_t repeat) {
  return DeriveSeed({master_seed, repeat});
}

std::pair<Dataset, Dataset> PrepareSplits(const Dataset& data,
                                          const ExperimentConfig& c,
                                          std::size_t repeat) {
  const std::uint64_t run_seed = RepeatSeed(c.seed, repeat);
  auto [train, test] = Split(data, c.train_fraction, DeriveSeed({run_seed, stream::kSplit}));
  if (c.noise_sigma > 0.0) {
    train = AddGaussianNoise(train, c.noise_sigma, DeriveSeed({run_seed, stream::kNoise, 0}));
    test = AddGaussianNoise(test, c.noise_sigma, DeriveSeed({run_seed, stream::kNoise, 1}));
  }
  return {std::move(train), std::move(test)};
}

RepeatResult RunRepeat(const Dataset& data, const ExperimentConfig& c,
                       std::size_t repeat, bool keep_models) {
  RepeatResult result;
  result.repeat = repeat;
  try {
    const auto [train, test] = PrepareSplits(data, c, repeat);
    const std::uint64_t run_seed = RepeatSeed(c.seed, repeat);
    for (Variant v : c.variants) {
      TrainResult trained = Train(MakeTrainConfig(c, v, run_seed), train, test);
      result.runs.push_back({v, trained.record});
      if (keep_models) result.models.push_back(std::move(trained));
    }
  } catch (const std::exception& e) {
    result.runs.clear();
    result.models.clear();
    result.error = e.what();
  }
  return result;
}

int RunExperiment(const ExperimentConfig& c) {
  Validate(c);
  const Dataset data = LoadExperimentData(c);
  fs::create_directories(c.out);

  std::vector<RepeatResult> results(c.repeats);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < c.repeats; r = next++) {
      results[r] = RunRepeat(data, c, r, r == 0);
      std::lock_guard<std::mutex> lock(log_mutex);
      if (results[r].error.empty()) {
        std::cerr << "repeat " << r << " done\n";
      } else {
        std::cerr << "repeat " << r << " failed: " << results[r].error << '\n';
      }
    }
  };
  const std::size_t n_workers = WorkerCount(c, c.repeats);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // metrics.jsonl and timing.csv, in (repeat, variant, epoch) order.
  std::ostringstream metrics;
  std::ostringstream timing;
  timing << "repeat,variant,epoch,phase,seconds,cumulative_seconds,pca_fit_seconds\n";
  std::vector<std::size_t> failed;
  for (const RepeatResult& rr : results) {
    if (!rr.error.empty()) {
      failed.push_back(rr.repeat);
      continue;
    }
    for (const VariantRun& run : rr.runs) {
      double cumulative = run.record.pca_fit_seconds;
      for (const EpochMetrics& m : run.record.epochs) {
        Json line;
        line["run_id"] = rr.repeat;
        line["variant"] = std::string(ToString(run.variant));
        line["epoch"] = m.epoch;
        line["phase"] = std::string(ToString(m.phase));
        line["train_loss"] = m.train_loss;
        line["train_acc"] = m.train_acc;
        line["test_loss"] = m.test_loss;
        line["test_acc"] = m.test_acc;
        line["seconds"] = m.seconds;
        metrics << line.dump() << '\n';
        cumulative += m.seconds;
        timing << rr.repeat << ',' << ToString(run.variant) << ',' << m.epoch << ','
               << ToString(m.phase) << ',' << FormatDouble(m.seconds) << ','
               << FormatDouble(cumulative) << ','
               << FormatDouble(run.record.pca_fit_seconds) << '\n';
      }
    }
  }
  WriteText(c.out / "metrics.jsonl", metrics.str());
  WriteText(c.out / "timing.csv", timing.str());

  // summary.json: deterministic, no wall-clock quantities.
  Json summary;
  summary["config"] = ConfigJson(c);
  Json variants = Json::object();
  for (std::size_t vi = 0; vi < c.variants.size(); ++vi) {
    std::vector<double> final_acc, final_train_loss, components;
    std::vector<std::vector<double>> curves(4, std::vector<double>(c.n_total, 0.0));
    std::size_t runs = 0;
    for (const RepeatResult& rr : results) {
      if (!rr.error.empty()) continue;
      const TrainRecord& rec = rr.runs[vi].record;
      ++runs;
      final_acc.push_back(rec.epochs.back().test_acc);
      final_train_loss.push_back(rec.epochs.back().train_loss);
      components.push_back(static_cast<double>(rec.n_components));
      for (std::size_t e = 0; e < rec.epochs.size(); ++e) {
        curves[0][e] += rec.epochs[e].train_loss;
        curves[1][e] += rec.epochs[e].train_acc;
        curves[2][e] += rec.epochs[e].test_loss;
        curves[3][e] += rec.epochs[e].test_acc;
      }
    }
    Json v;
    v["runs"] = runs;
    v["final_test_acc_mean"] = Mean(final_acc);
    v["final_test_acc_std"] = SampleStd(final_acc);
    v["final_train_loss_mean"] = Mean(final_train_loss);
    v["n_components_mean"] = Mean(components);
    const char* names[] = {"train_loss", "train_acc", "test_loss", "test_acc"};
    Json mean_curves;
    for (std::size_t k = 0; k < 4; ++k) {
      Json arr = Json::array();
      for (double s : curves[k])
        arr.push_back(runs == 0 ? 0.0 : s / static_cast<double>(runs));
      mean_curves[names[k]] = std::move(arr);
    }
    v["mean_curves"] = std::move(mean_curves);
    variants[std::string(ToString(c.variants[vi]))] = std::move(v);
  }
  summary["variants"] = std::move(variants);
  summary["failed_repeats"] = failed;
  WriteText(c.out / "summary.json", summary.dump(2) + "\n");

  bool theory_ok = true;
  if (c.theory) {
    try {
      const auto [train, test] = PrepareSplits(data, c, 0);
      const auto reports =
          RunTheorySuite(train.features, MakeTheoryConfig(c, data.n_classes));
      Json arr = Json::array();
      for (const auto& r : reports) {
        arr.push_back(ToJson(r));
        theory_ok = theory_ok && r.pass;
      }
      WriteText(c.out / "theorem_reports.json", arr.dump(2) + "\n");
      if (!theory_ok) std::cerr << "warning: a theorem check failed\n";
    } catch (const std::exception& e) {
      std::cerr << "theory suite failed: " << e.what() << '\n';
      theory_ok = false;
    }
  }

  // Checkpoints and attributions from repeat 0.
  const RepeatResult& first = results.front();
  if (first.error.empty()) {
    const auto [train, test] = PrepareSplits(data, c, 0);
    fs::create_directories(c.out / "checkpoints");
    for (std::size_t vi = 0; vi < c.variants.size(); ++vi) {
      const TrainResult& model = first.models[vi];
      const std::string name(ToString(c.variants[vi]));
      SaveCheckpoint(c.out / "checkpoints" / (name + ".net"),
                     Checkpoint{model.net, train.standardization});
      if (model.pca) SavePcaModel(c.out / "checkpoints" / (name + ".pca"), *model.pca);
      if (c.shap_points == 0) continue;
      try {
        if (c.variants[vi] == Variant::kPcaNn) {
          ExplainThroughPca(model.net, *model.pca, test.features, train.features, c,
                            "shap_" + name);
        } else {
          ExplainDirect(model.net, test.features, train.features, c, "shap_" + name);
        }
      } catch (const std::exception& e) {
        std::cerr << "attribution for " << name << " failed: " << e.what() << '\n';
      }
    }
  }
  return failed.empty() ? 0 : 1;
}

int RunVerify(const ExperimentConfig& c) {
  Validate(c);
  const Dataset data = LoadExperimentData(c);
  const auto [train, test] = PrepareSplits(data, c, 0);
  const auto reports = RunTheorySuite(train.features, MakeTheoryConfig(c, data.n_classes));
  fs::create_directories(c.out);
  Json arr = Json::array();
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back(ToJson(r));
    ok = ok && r.pass;
  }
  WriteText(c.out / "theorem_reports.json", arr.dump(2) + "\n");
  PrintTheoryTable(reports, std::cout);
  return ok ? 0 : 1;
}

int RunPca(const ExperimentConfig& c) {
  Validate(c);
  const Dataset data = LoadExperimentData(c);
  const PcaModel model =
      Fit(data.features, ComponentSelection::VarianceThreshold(c.variance_threshold));
  fs::create_directories(c.out);
  Json j;
  j["n_samples"] = model.n_fitted;
  j["n_features"] = model.n_features();
  j["n_components"] = model.n_components();
  j["variance_threshold"] = c.variance_threshold;
  j["eigenvalues"] = model.eigenvalues;
  j["explained_variance_ratio"] = model.explained_variance_ratio;
  double cum = 0.0;
  Json cumulative = Json::array();
  for (double r : model.explained_variance_ratio) cumulative.push_back(cum += r);
  j["cumulative_ratio"] = std::move(cumulative);
  j["warnings"] = model.warnings;
  WriteText(c.out / "pca_report.json", j.dump(2) + "\n");
  SavePcaModel(c.out / "model.pca", model);
  std::cout << "n_features " << model.n_features() << "  n_components "
            << model.n_components() << "  cumulative_ratio " << cum << '\n';
  return 0;
}

int RunExplain(const ExperimentConfig& c, const fs::path& checkpoint,
               const std::optional<fs::path>& pca_model) {
  Require(c.shap_points >= 1, "explain: shap_points must be >= 1");
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  const Dataset data = LoadExperimentData(c);
  Matrix x = data.features;
  if (ckpt.input_standardization)
    x = ApplyStandardization(*ckpt.input_standardization, x);
  fs::create_directories(c.out);
  const std::string prefix = "shap_" + checkpoint.stem().string();
  if (pca_model) {
    const PcaModel pca = LoadPcaModel(*pca_model);
    Require(pca.n_features() == x.cols(), "explain: PCA model does not match the data");
    Require(pca.n_components() == ckpt.net.in_dim(),
            "explain: network input does not match the PCA component count");
    ExplainThroughPca(ckpt.net, pca, x, x, c, prefix);
  } else {
    Require(ckpt.net.in_dim() == x.cols(),
            "explain: network input does not match the data width");
    ExplainDirect(ckpt.net, x, x, c, prefix);
  }
  std::cout << "wrote attributions for " << std::min(c.shap_points, x.rows())
            << " rows to " << c.out.string() << '\n';
  return 0;
}

}  // namespace pcsinit
