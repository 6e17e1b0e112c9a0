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

#ifndef PCSINIT_CHECKPOINT_H_
#define PCSINIT_CHECKPOINT_H_

#include <filesystem>
#include <optional>

#include "pcsinit/data.h"
#include "pcsinit/network.h"
#include "pcsinit/pca.h"

namespace pcsinit {

// Binary container, little-endian, raw IEEE-754 doubles:
//   "PCSNET01" u32 n_layers
//   per layer: u64 in, u64 out, u8 activation, u8 init_kind, u8 frozen,
//              f64[out*in] weights (row-major), f64[out] bias
//   u8 has_standardization [u64 p, f64[p] mean, f64[p] scale]
// Save/Load round-trips bit-exactly.
struct Checkpoint {
  Mlp net;
  // Maps raw inputs to what the network was trained on.
  std::optional<Standardization> input_standardization;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

//   "PCSPCA01" u64 p, u64 r, u64 n_fitted,
//   f64[p*r] components, f64[r] eigenvalues, f64[r] ratios,
//   f64[p] mean, f64[p] scale
void SavePcaModel(const std::filesystem::path& path, const PcaModel& model);
PcaModel LoadPcaModel(const std::filesystem::path& path);

}  // namespace pcsinit

#endif  // PCSINIT_CHECKPOINT_H_
