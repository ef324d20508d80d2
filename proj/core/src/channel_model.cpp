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

#include "chanpred/channel_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chanpred {

void ArrayGeometry::validate() const {
  if (bs_rows == 0 || bs_cols == 0 || ue_antennas == 0) {
    throw std::invalid_argument("ArrayGeometry: antenna counts must be >= 1");
  }
  if (!(spacing_bs > 0.0) || !(spacing_ue > 0.0)) {
    throw std::invalid_argument("ArrayGeometry: antenna spacings must be > 0");
  }
}

double ScenarioConfig::subcarrier_offset_hz(std::size_t subcarrier) const {
  const double centre = (static_cast<double>(num_subcarriers) - 1.0) / 2.0;
  return (static_cast<double>(subcarrier) - centre) * subcarrier_spacing_hz;
}

void ScenarioConfig::validate() const {
  if (num_subcarriers == 0) throw std::invalid_argument("ScenarioConfig: num_subcarriers must be >= 1");
  if (num_paths == 0) throw std::invalid_argument("ScenarioConfig: num_paths must be >= 1");
  if (!(slot_duration_s > 0.0)) throw std::invalid_argument("ScenarioConfig: slot_duration_s must be > 0");
  if (!(subcarrier_spacing_hz > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: subcarrier_spacing_hz must be > 0");
  }
  // The narrowband-per-subcarrier model needs the band to be a small fraction of the carrier.
  if (!(carrier_hz > 10.0 * static_cast<double>(num_subcarriers) * subcarrier_spacing_hz)) {
    throw std::invalid_argument("ScenarioConfig: carrier must be much larger than the bandwidth");
  }
  if (!std::isfinite(path_loss_db)) throw std::invalid_argument("ScenarioConfig: path_loss_db must be finite");
  if (!(ue_speed_mps >= 0.0)) throw std::invalid_argument("ScenarioConfig: ue_speed_mps must be >= 0");
  if (!(delay_spread_s >= 0.0)) throw std::invalid_argument("ScenarioConfig: delay_spread_s must be >= 0");
  if (!(doppler_spread_rad >= 0.0)) {
    throw std::invalid_argument("ScenarioConfig: doppler_spread_rad must be >= 0");
  }
}

CVector steering_vector(const ArrayGeometry& geometry, ArraySide side, Direction direction) {
  switch (side) {
    case ArraySide::kBs: {
      if (geometry.bs_rows == 0 || geometry.bs_cols == 0) {
        throw std::invalid_argument("steering_vector: BS array has no antennas");
      }
      const double horizontal = std::sin(direction.azimuth) * std::cos(direction.elevation);
      const double vertical = std::sin(direction.elevation);
      CVector a(static_cast<Eigen::Index>(geometry.bs_antennas()));
      for (std::size_t r = 0; r < geometry.bs_rows; ++r) {
        for (std::size_t c = 0; c < geometry.bs_cols; ++c) {
          const double projection =
              static_cast<double>(c) * horizontal + static_cast<double>(r) * vertical;
          a(static_cast<Eigen::Index>(r * geometry.bs_cols + c)) =
              std::polar(1.0, -2.0 * kPi * geometry.spacing_bs * projection);
        }
      }
      return a;
    }
    case ArraySide::kUe: {
      if (geometry.ue_antennas == 0) {
        throw std::invalid_argument("steering_vector: UE array has no antennas");
      }
      const double projection = std::sin(direction.azimuth);
      CVector a(static_cast<Eigen::Index>(geometry.ue_antennas));
      for (std::size_t u = 0; u < geometry.ue_antennas; ++u) {
        a(static_cast<Eigen::Index>(u)) =
            std::polar(1.0, -2.0 * kPi * geometry.spacing_ue * static_cast<double>(u) * projection);
      }
      return a;
    }
  }
  throw std::invalid_argument("steering_vector: invalid array side");
}

PathSet generate_paths(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double f_max = config.max_doppler_hz();
  const double cluster_centre = 2.0 * kPi * unit(rng);
  const double truncation = 1.0 - std::exp(-4.0);

  PathSet paths(config.num_paths);
  double total_power = 0.0;
  for (Path& p : paths) {
    // Inverse CDF of the exponential truncated to [0, 4 delay_spread].
    p.delay_s = -config.delay_spread_s * std::log(1.0 - unit(rng) * truncation);
    const double profile =
        config.delay_spread_s > 0.0 ? std::exp(-p.delay_s / config.delay_spread_s) : 1.0;
    p.gain = complex_normal(rng, 1.0) * std::sqrt(profile);
    total_power += std::norm(p.gain);

    p.aoa_az = kPi * (2.0 * unit(rng) - 1.0);
    p.aoa_el = kPi * (unit(rng) - 0.5);
    p.aod = kPi * (2.0 * unit(rng) - 1.0);

    double travel = 0.0;
    switch (config.doppler_model) {
      case DopplerModel::kIsotropic:
        travel = 2.0 * kPi * unit(rng);
        break;
      case DopplerModel::kClustered:
        travel = std::fmod(cluster_centre + config.doppler_spread_rad * normal(rng), 2.0 * kPi);
        if (travel < 0.0) travel += 2.0 * kPi;
        break;
    }
    p.doppler_hz = f_max * std::cos(travel);
  }

  // Unit total power, then the large-scale path loss.
  const double norm = std::sqrt(total_power) * std::pow(10.0, config.path_loss_db / 20.0);
  for (Path& p : paths) p.gain /= norm;
  return paths;
}

namespace {

// M x P matrix of kron(a_UE, a_BS) per path.
CMatrix spatial_signatures(const PathSet& paths, const ArrayGeometry& geometry) {
  CMatrix s(static_cast<Eigen::Index>(geometry.antenna_pairs()),
            static_cast<Eigen::Index>(paths.size()));
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const CVector bs =
        steering_vector(geometry, ArraySide::kBs, {paths[p].aoa_az, paths[p].aoa_el});
    const CVector ue = steering_vector(geometry, ArraySide::kUe, {paths[p].aod, 0.0});
    const Eigen::Index m_bs = bs.size();
    for (Eigen::Index u = 0; u < ue.size(); ++u) {
      s.col(static_cast<Eigen::Index>(p)).segment(u * m_bs, m_bs) = ue(u) * bs;
    }
  }
  return s;
}

Complex delay_phase(const ScenarioConfig& config, std::size_t subcarrier, double delay) {
  return std::polar(1.0, -2.0 * kPi * config.subcarrier_offset_hz(subcarrier) * delay);
}

Complex doppler_phase(const ScenarioConfig& config, std::size_t slot, double doppler) {
  return std::polar(
      1.0, 2.0 * kPi * doppler * static_cast<double>(slot) * config.slot_duration_s);
}

}  // namespace

CVector channel_at(const PathSet& paths, const ArrayGeometry& geometry,
                   const ScenarioConfig& config, std::size_t slot, std::size_t subcarrier) {
  if (subcarrier >= config.num_subcarriers) {
    throw std::out_of_range("channel_at: subcarrier " + std::to_string(subcarrier) +
                            " outside [0, " + std::to_string(config.num_subcarriers) + ")");
  }
  geometry.validate();
  CVector h = CVector::Zero(static_cast<Eigen::Index>(geometry.antenna_pairs()));
  for (const Path& p : paths) {
    const CVector bs = steering_vector(geometry, ArraySide::kBs, {p.aoa_az, p.aoa_el});
    const CVector ue = steering_vector(geometry, ArraySide::kUe, {p.aod, 0.0});
    const Complex coefficient =
        p.gain * doppler_phase(config, slot, p.doppler_hz) * delay_phase(config, subcarrier, p.delay_s);
    const Eigen::Index m_bs = bs.size();
    for (Eigen::Index u = 0; u < ue.size(); ++u) {
      h.segment(u * m_bs, m_bs) += coefficient * ue(u) * bs;
    }
  }
  return h;
}

ChannelTrajectory ChannelTrajectory::window(std::size_t first, std::size_t count) const {
  if (first + count > slots.size()) {
    throw std::out_of_range("ChannelTrajectory::window: [" + std::to_string(first) + ", " +
                            std::to_string(first + count) + ") exceeds " +
                            std::to_string(slots.size()) + " slots");
  }
  ChannelTrajectory out;
  out.kind = kind;
  out.start_slot = start_slot + first;
  out.slots.assign(slots.begin() + static_cast<std::ptrdiff_t>(first),
                   slots.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

ChannelTrajectory synthesize_trajectory(const PathSet& paths, const ArrayGeometry& geometry,
                                        const ScenarioConfig& config, std::size_t num_slots,
                                        std::size_t start_slot) {
  if (num_slots == 0) throw std::invalid_argument("synthesize_trajectory: num_slots must be >= 1");
  geometry.validate();
  config.validate();

  const auto num_paths = static_cast<Eigen::Index>(paths.size());
  const auto num_sc = static_cast<Eigen::Index>(config.num_subcarriers);
  const CMatrix spatial = spatial_signatures(paths, geometry);

  // P x L frequency responses, gain folded in.
  CMatrix spectral(num_paths, num_sc);
  for (Eigen::Index p = 0; p < num_paths; ++p) {
    const Path& path = paths[static_cast<std::size_t>(p)];
    for (Eigen::Index l = 0; l < num_sc; ++l) {
      spectral(p, l) = path.gain * delay_phase(config, static_cast<std::size_t>(l), path.delay_s);
    }
  }

  ChannelTrajectory traj;
  traj.kind = TrajectoryKind::kTrue;
  traj.start_slot = start_slot;
  traj.slots.reserve(num_slots);
  CVector rotation(num_paths);
  for (std::size_t n = start_slot; n < start_slot + num_slots; ++n) {
    for (Eigen::Index p = 0; p < num_paths; ++p) {
      rotation(p) = doppler_phase(config, n, paths[static_cast<std::size_t>(p)].doppler_hz);
    }
    traj.slots.emplace_back(spatial * (rotation.asDiagonal() * spectral));
  }
  return traj;
}

ChannelTrajectory generate_trajectory(const ScenarioConfig& config, const ArrayGeometry& geometry,
                                      std::size_t num_slots, std::size_t start_slot) {
  Rng rng(derive_seed(config.seed, Stream::kPaths));
  const PathSet paths = generate_paths(config, rng);
  return synthesize_trajectory(paths, geometry, config, num_slots, start_slot);
}

}  // namespace chanpred
