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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chanpred/channel_model.hpp"
#include "chanpred/types.hpp"

namespace chanpred {

/// Which axis of the M x L array-frequency channel forms a sub-channel.
/// Array: sub-channel i is column i (K1 = M, K2 = L).
/// Frequency: sub-channel i is row i transposed (K1 = L, K2 = M).
enum class Domain { kArray, kFrequency };

std::string_view to_string(Domain domain);
Domain parse_domain(std::string_view text);

struct SubchannelShape {
  std::size_t length = 0;  // K1
  std::size_t count = 0;   // K2
};

SubchannelShape subchannel_shape(Domain domain, Eigen::Index rows, Eigen::Index cols);

/// Sub-channel i of an M x L matrix as a K1 vector.
CVector extract_subchannel(const CMatrix& matrix, Domain domain, std::size_t index);

/// Full-matrix training pair: inputs G_{n-I+1..n}, labels G_{n+1..n+p}.
struct RawPair {
  std::vector<CMatrix> inputs;
  std::vector<CMatrix> labels;
  std::size_t base_slot = 0;  // absolute index of the newest input slot n
};

struct SubSample {
  std::vector<CVector> feature;  // I vectors, oldest first
  std::vector<CVector> label;    // p vectors, n+1 first
  std::size_t subchannel = 0;
  std::size_t base_slot = 0;
};

enum class Provenance { kRaw, kAggregated, kSeparate };

struct Dataset {
  std::vector<SubSample> samples;
  Domain domain = Domain::kArray;
  std::size_t input_order = 0;
  std::size_t prediction_order = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  Provenance provenance = Provenance::kRaw;
  std::size_t subchannel = 0;  // only meaningful for kSeparate

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Sliding window over a trajectory: N - I - p + 1 pairs, oldest first.
/// Throws if N < I + p.
std::vector<RawPair> build_raw(const ChannelTrajectory& traj, std::size_t input_order,
                               std::size_t prediction_order);

/// K2 sub-samples of one pair, in sub-channel order.
std::vector<SubSample> split(const RawPair& pair, Domain domain);

/// Pools every sub-sample of every pair into one dataset. Outer loop over
/// base slot, inner over sub-channel index.
Dataset aggregate_al(std::span<const RawPair> pairs, Domain domain);

/// One dataset per sub-channel index, each in slot order.
std::vector<Dataset> sl_datasets(std::span<const RawPair> pairs, Domain domain);

/// Appends a copy of every sample with feature and label vectors reversed
/// along the K1 axis.
Dataset flip_augment(const Dataset& dataset);

struct PackedSample {
  RVector x;  // 2 I K1
  RVector y;  // 2 p K1
};

/// Per step, oldest first: [Re(v); Im(v)].
RVector pack_vectors(std::span<const CVector> vectors);
PackedSample pack_real(const SubSample& sample);

/// Inverse of pack_vectors for `steps` vectors of length k1.
std::vector<CVector> unpack_complex(const RVector& packed, std::size_t k1, std::size_t steps);

/// Inverse of split() for one matrix: K2 predictions of length K1 -> M x L.
CMatrix reconstruct(std::span<const CVector> predictions, Domain domain);

/// Global normalisation scale: the largest |coefficient| over all features.
/// Returns 1 for an all-zero dataset.
double feature_scale(const Dataset& dataset);

/// Packs every sample and divides by `scale`.
std::vector<PackedSample> pack_dataset(const Dataset& dataset, double scale);

/// Debug dump: one `# {json header}` line, then one CSV row per packed sample
/// (x values then y values, already divided by `scale`).
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset, double scale);

struct LoadedDataset {
  Domain domain = Domain::kArray;
  std::size_t input_order = 0;
  std::size_t prediction_order = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  double scale = 1.0;
  std::vector<PackedSample> samples;
};

LoadedDataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace chanpred
