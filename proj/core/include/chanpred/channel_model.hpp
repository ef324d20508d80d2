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
#include <cstdint>
#include <vector>

#include "chanpred/rng.hpp"
#include "chanpred/types.hpp"

namespace chanpred {

/// BS uniform planar array (bs_rows x bs_cols) and UE uniform linear array.
/// Spacings are in wavelengths.
struct ArrayGeometry {
  std::size_t bs_rows = 8;
  std::size_t bs_cols = 8;
  std::size_t ue_antennas = 2;
  double spacing_bs = 0.5;
  double spacing_ue = 0.5;

  std::size_t bs_antennas() const { return bs_rows * bs_cols; }
  std::size_t antenna_pairs() const { return bs_antennas() * ue_antennas; }
  void validate() const;
};

enum class DopplerModel {
  /// Independent travel angle per path, uniform on [0, 2pi).
  kIsotropic,
  /// One travel-angle cluster centre uniform on [0, 2pi), Gaussian offsets per
  /// path. Each path's angle is still marginally uniform.
  kClustered,
};

struct ScenarioConfig {
  double carrier_hz = 2.53e9;
  double subcarrier_spacing_hz = 40e3;
  std::size_t num_subcarriers = 128;
  double slot_duration_s = 2e-3;
  double ue_speed_mps = kmh_to_mps(20.0);
  std::size_t num_paths = 20;
  double delay_spread_s = 100e-9;
  /// Large-scale attenuation applied on top of the unit-power small-scale fading.
  double path_loss_db = 110.0;
  DopplerModel doppler_model = DopplerModel::kClustered;
  double doppler_spread_rad = 20.0 * kPi / 180.0;
  std::uint64_t seed = 1;

  double max_doppler_hz() const { return ue_speed_mps * carrier_hz / kSpeedOfLight; }
  /// Baseband offset of subcarrier l, centred on zero: (l - (L-1)/2) * spacing.
  double subcarrier_offset_hz(std::size_t subcarrier) const;
  void validate() const;
};

struct Path {
  Complex gain;
  double aoa_az = 0.0;
  double aoa_el = 0.0;
  double aod = 0.0;
  double delay_s = 0.0;
  double doppler_hz = 0.0;
};

using PathSet = std::vector<Path>;

enum class ArraySide { kBs, kUe };

/// Arrival/departure direction. The ULA uses only `azimuth`.
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Array response with unit-modulus entries.
///
/// BS element (r, c) sits at index r * bs_cols + c and has phase
/// -2pi d (c sin(az) cos(el) + r sin(el)). UE element u has phase -2pi d u sin(az).
CVector steering_vector(const ArrayGeometry& geometry, ArraySide side, Direction direction);

/// Draws P paths: exponential delays truncated to [0, 4 delay_spread], complex
/// normal gains shaped by an exponential power-delay profile, normalised to
/// unit total power and then attenuated by path_loss_db; Doppler (v f_c / c) cos(alpha).
PathSet generate_paths(const ScenarioConfig& config, Rng& rng);

/// vec(sum_p g_p e^{j2pi f_D n T} e^{-j2pi f_l tau_p} a_BS a_UE^T) for one slot and
/// subcarrier. The antenna-pair index is u * M_BS + b.
CVector channel_at(const PathSet& paths, const ArrayGeometry& geometry,
                   const ScenarioConfig& config, std::size_t slot, std::size_t subcarrier);

enum class TrajectoryKind { kTrue, kEstimated };

/// Consecutive M x L array-frequency channels.
struct ChannelTrajectory {
  std::vector<CMatrix> slots;
  TrajectoryKind kind = TrajectoryKind::kTrue;
  std::size_t start_slot = 0;

  std::size_t size() const { return slots.size(); }
  bool empty() const { return slots.empty(); }
  Eigen::Index rows() const { return slots.empty() ? 0 : slots.front().rows(); }
  Eigen::Index cols() const { return slots.empty() ? 0 : slots.front().cols(); }

  /// Sub-trajectory of `count` slots starting at local offset `first`.
  ChannelTrajectory window(std::size_t first, std::size_t count) const;
};

/// Builds slots [start_slot, start_slot + num_slots) from a fixed path set.
ChannelTrajectory synthesize_trajectory(const PathSet& paths, const ArrayGeometry& geometry,
                                        const ScenarioConfig& config, std::size_t num_slots,
                                        std::size_t start_slot = 0);

/// Draws paths from the `kPaths` stream of `config.seed` and synthesizes the trajectory.
ChannelTrajectory generate_trajectory(const ScenarioConfig& config, const ArrayGeometry& geometry,
                                      std::size_t num_slots, std::size_t start_slot = 0);

}  // namespace chanpred
