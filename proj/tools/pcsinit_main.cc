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

// Command-line front end: run, verify, explain, pca.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "pcsinit/errors.h"
#include "pcsinit/experiment.h"

namespace {

// Flag values collected in command-line order, applied over the config file.
struct Overrides {
  std::optional<std::string> config;
  std::vector<std::pair<std::string, std::string>> settings;
};

void AddFlag(CLI::App* app, Overrides& o, const std::string& flag,
             const std::string& key, const std::string& help) {
  app->add_option_function<std::vector<std::string>>(
      flag,
      [&o, key](const std::vector<std::string>& values) {
        for (const auto& v : values) o.settings.emplace_back(key, v);
      },
      help);
}

void AddCommonFlags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "key = value config file");
  AddFlag(app, o, "--dataset", "dataset", "CSV file (synthetic data when omitted)");
  AddFlag(app, o, "--label-column", "label_column", "label column name or index");
  AddFlag(app, o, "--variant", "variant",
          "pcsinit, pcsinit_act, pcsinit_sub, pca_nn or plain_nn (repeatable)");
  AddFlag(app, o, "--seed", "seed", "master seed");
  AddFlag(app, o, "--repeats", "repeats", "independent repeats");
  AddFlag(app, o, "--out", "out", "output directory");
  AddFlag(app, o, "--subset-fraction", "subset_fraction", "PCA subset fraction");
  AddFlag(app, o, "--variance-threshold", "variance_threshold",
          "explained variance to keep");
  AddFlag(app, o, "--noise-sigma", "noise_sigma", "Gaussian noise added to inputs");
  AddFlag(app, o, "--n-frozen", "n_frozen", "epochs with the first layer frozen");
  AddFlag(app, o, "--epochs", "epochs", "total epochs");
  app->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& values) {
        for (const auto& v : values) {
          const auto eq = v.find('=');
          if (eq == std::string::npos)
            throw CLI::ValidationError("--set", "expected key=value, got " + v);
          o.settings.emplace_back(v.substr(0, eq), v.substr(eq + 1));
        }
      },
      "any config key as key=value (repeatable)");
}

pcsinit::ExperimentConfig Resolve(const Overrides& o) {
  pcsinit::ExperimentConfig config;
  if (o.config) config = pcsinit::LoadConfigFile(*o.config);
  // Repeated --variant flags accumulate into one list.
  std::string variants;
  for (const auto& [key, value] : o.settings) {
    if (key == "variant") {
      variants += (variants.empty() ? "" : ",") + value;
    } else {
      pcsinit::ApplySetting(config, key, value);
    }
  }
  if (!variants.empty()) pcsinit::ApplySetting(config, "variant", variants);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCsInit experiments: principal-components first-layer initialization"};
  app.require_subcommand(1);

  Overrides run_flags, verify_flags, explain_flags, pca_flags;
  CLI::App* run = app.add_subcommand("run", "train every variant across repeats");
  AddCommonFlags(run, run_flags);
  CLI::App* verify = app.add_subcommand("verify", "run the theorem checks");
  AddCommonFlags(verify, verify_flags);
  CLI::App* pca = app.add_subcommand("pca", "fit PCA and report the retained components");
  AddCommonFlags(pca, pca_flags);
  CLI::App* explain = app.add_subcommand("explain", "attributions for a saved checkpoint");
  AddCommonFlags(explain, explain_flags);
  std::string checkpoint;
  std::optional<std::string> pca_model;
  explain->add_option("--checkpoint", checkpoint, "network checkpoint (.net)")->required();
  explain->add_option("--pca", pca_model,
                      "PCA model (.pca) when the network consumes component scores");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return pcsinit::RunExperiment(Resolve(run_flags));
    if (verify->parsed()) return pcsinit::RunVerify(Resolve(verify_flags));
    if (pca->parsed()) return pcsinit::RunPca(Resolve(pca_flags));
    if (explain->parsed()) {
      std::optional<std::filesystem::path> pca_path;
      if (pca_model) pca_path = *pca_model;
      return pcsinit::RunExplain(Resolve(explain_flags), checkpoint, pca_path);
    }
  } catch (const pcsinit::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pcsinit::ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
