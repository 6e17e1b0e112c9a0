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

#include "pcsinit/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pcsinit/errors.h"

namespace pcsinit {
namespace {

constexpr char kNetMagic[8] = {'P', 'C', 'S', 'N', 'E', 'T', '0', '1'};
constexpr char kPcaMagic[8] = {'P', 'C', 'S', 'P', 'C', 'A', '0', '1'};
// Guards against absurd allocations from corrupt headers.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw ContractError("cannot open " + path.string() + " for writing");
  }
  template <typename T>
  void Put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void Doubles(std::span<const double> v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void Bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void Finish() {
    out_.flush();
    if (!out_) throw ContractError("write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw ParseError("cannot open " + path_, 0);
  }
  template <typename T>
  T Get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    Check();
    return v;
  }
  std::vector<double> Doubles(std::uint64_t n) {
    if (n > kMaxElements) throw ParseError(path_ + ": implausible size", 0);
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char*>(v.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
    Check();
    return v;
  }
  void Magic(const char (&expected)[8]) {
    char got[8];
    in_.read(got, 8);
    Check();
    if (std::memcmp(got, expected, 8) != 0)
      throw ParseError(path_ + ": bad magic", 0);
  }

 private:
  void Check() {
    if (!in_) throw ParseError(path_ + ": truncated file", 0);
  }
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w(path);
  w.Bytes(kNetMagic, 8);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.net.num_layers()));
  for (const Layer& layer : ckpt.net.layers()) {
    w.Put<std::uint64_t>(layer.in_dim());
    w.Put<std::uint64_t>(layer.out_dim());
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(layer.activation));
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(layer.init_kind));
    w.Put<std::uint8_t>(layer.frozen ? 1 : 0);
    w.Doubles(layer.weights.values());
    w.Doubles(layer.bias);
  }
  const auto& s = ckpt.input_standardization;
  w.Put<std::uint8_t>(s ? 1 : 0);
  if (s) {
    w.Put<std::uint64_t>(s->mean.size());
    w.Doubles(s->mean);
    w.Doubles(s->scale);
  }
  w.Finish();
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  Reader r(path);
  r.Magic(kNetMagic);
  const auto n_layers = r.Get<std::uint32_t>();
  std::vector<Layer> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    Layer layer;
    const auto in = r.Get<std::uint64_t>();
    const auto out = r.Get<std::uint64_t>();
    const auto act = r.Get<std::uint8_t>();
    const auto kind = r.Get<std::uint8_t>();
    const auto frozen = r.Get<std::uint8_t>();
    if (act > 1 || kind > 3 || frozen > 1)
      throw ParseError(path.string() + ": corrupt layer header", 0);
    layer.activation = static_cast<Activation>(act);
    layer.init_kind = static_cast<InitKind>(kind);
    layer.frozen = frozen == 1;
    layer.weights = Matrix(out, in, r.Doubles(in * out));
    layer.bias = r.Doubles(out);
    layers.push_back(std::move(layer));
  }
  Checkpoint ckpt{Mlp(std::move(layers)), std::nullopt};
  if (r.Get<std::uint8_t>() == 1) {
    const auto p = r.Get<std::uint64_t>();
    Standardization s;
    s.mean = r.Doubles(p);
    s.scale = r.Doubles(p);
    ckpt.input_standardization = std::move(s);
  }
  return ckpt;
}

void SavePcaModel(const std::filesystem::path& path, const PcaModel& model) {
  Writer w(path);
  w.Bytes(kPcaMagic, 8);
  w.Put<std::uint64_t>(model.n_features());
  w.Put<std::uint64_t>(model.n_components());
  w.Put<std::uint64_t>(model.n_fitted);
  w.Doubles(model.components.values());
  w.Doubles(model.eigenvalues);
  w.Doubles(model.explained_variance_ratio);
  w.Doubles(model.mean);
  w.Doubles(model.scale);
  w.Finish();
}

PcaModel LoadPcaModel(const std::filesystem::path& path) {
  Reader r(path);
  r.Magic(kPcaMagic);
  const auto p = r.Get<std::uint64_t>();
  const auto k = r.Get<std::uint64_t>();
  PcaModel m;
  m.n_fitted = r.Get<std::uint64_t>();
  m.components = Matrix(p, k, r.Doubles(p * k));
  m.eigenvalues = r.Doubles(k);
  m.explained_variance_ratio = r.Doubles(k);
  m.mean = r.Doubles(p);
  m.scale = r.Doubles(p);
  return m;
}

}  // namespace pcsinit
