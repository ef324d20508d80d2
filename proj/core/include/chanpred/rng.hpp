// Copyright 2026 The chanpred Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

#include "chanpred/types.hpp"

namespace chanpred {

using Rng = std::mt19937_64;

/// Purpose tags for seed derivation. Values are part of the reproducibility
/// contract: changing them changes every generated number.
enum class Stream : std::uint64_t {
  kPaths = 0x01,
  kNoise = 0x02,
  kTraining = 0x03,
  kUser = 0x04,
  kReplicate = 0x05,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent child seed: splitmix64 applied to the master seed,
/// the stream tag and the index in turn.
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0);

/// Draws z ~ CN(0, variance).
Complex complex_normal(Rng& rng, double variance);

}  // namespace chanpred
