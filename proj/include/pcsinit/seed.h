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

#ifndef PCSINIT_SEED_H_
#define PCSINIT_SEED_H_

#include <cstdint>
#include <initializer_list>

namespace pcsinit {

// splitmix64 finalizer.
constexpr std::uint64_t MixSeed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from an ordered tuple of integers, e.g.
// DeriveSeed({master, repeat, layer}). Order matters.
constexpr std::uint64_t DeriveSeed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = MixSeed(h ^ MixSeed(p));
  return h;
}

// Stream tags so that distinct consumers of one master seed never collide.
namespace stream {
inline constexpr std::uint64_t kSplit = 0x5350'4c49'54ULL;
inline constexpr std::uint64_t kShuffle = 0x5348'5546ULL;
inline constexpr std::uint64_t kSubset = 0x5355'4253ULL;
inline constexpr std::uint64_t kNoise = 0x4e4f'4953ULL;
inline constexpr std::uint64_t kLayer = 0x4c41'5952ULL;
inline constexpr std::uint64_t kShap = 0x5348'4150ULL;
inline constexpr std::uint64_t kTheory = 0x5448'4552ULL;
inline constexpr std::uint64_t kSynthetic = 0x5359'4e54ULL;
}  // namespace stream

}  // namespace pcsinit

#endif  // PCSINIT_SEED_H_
