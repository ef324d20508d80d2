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

#include "chanpred/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chanpred {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

void PilotConfig::validate(const ArrayGeometry& geometry) const {
  if (pilot_len < geometry.ue_antennas) {
    throw std::invalid_argument("PilotConfig: pilot length " + std::to_string(pilot_len) +
                                " is shorter than M_UE = " + std::to_string(geometry.ue_antennas));
  }
  if (!std::isfinite(pilot_power_dbm)) {
    throw std::invalid_argument("PilotConfig: pilot power must be finite");
  }
  if (!(subcarrier_spacing_hz > 0.0)) {
    throw std::invalid_argument("PilotConfig: subcarrier spacing must be > 0");
  }
  if (std::isnan(noise_psd_dbm_hz) || noise_psd_dbm_hz == HUGE_VAL) {
    throw std::invalid_argument("PilotConfig: noise PSD must be finite or -inf");
  }
}

CMatrix dft_pilot(std::size_t tau, std::size_t m_ue) {
  if (m_ue == 0) throw std::invalid_argument("dft_pilot: M_UE must be >= 1");
  if (tau < m_ue) {
    throw std::invalid_argument("dft_pilot: tau = " + std::to_string(tau) + " < M_UE = " +
                                std::to_string(m_ue));
  }
  CMatrix phi(static_cast<Eigen::Index>(tau), static_cast<Eigen::Index>(m_ue));
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t u = 0; u < m_ue; ++u) {
      // Reduce t*u mod tau first so the phase stays exact for the small cases.
      const auto k = static_cast<double>((t * u) % tau);
      phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u)) =
          std::polar(1.0, -2.0 * kPi * k / static_cast<double>(tau));
    }
  }
  return phi;
}

double noise_variance(const PilotConfig& pilot) {
  if (pilot.noise_psd_dbm_hz == -HUGE_VAL) return 0.0;
  return dbm_to_watts(pilot.noise_psd_dbm_hz + 10.0 * std::log10(pilot.subcarrier_spacing_hz));
}

double estimation_error_variance(const PilotConfig& pilot) {
  return noise_variance(pilot) / (pilot.pilot_power_w() * static_cast<double>(pilot.pilot_len));
}

CMatrix draw_pilot_noise(std::size_t m_bs, std::size_t tau, double sigma2, Rng& rng) {
  CMatrix w(static_cast<Eigen::Index>(m_bs), static_cast<Eigen::Index>(tau));
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = complex_normal(rng, sigma2);
  }
  return w;
}

CVector ls_error_from_noise(const CMatrix& noise, const CMatrix& pilot, double rho) {
  if (noise.cols() != pilot.rows()) {
    throw std::invalid_argument("ls_error_from_noise: noise has " + std::to_string(noise.cols()) +
                                " columns, pilot has " + std::to_string(pilot.rows()) + " rows");
  }
  const double tau = static_cast<double>(pilot.rows());
  const CMatrix error = (noise * pilot.conjugate()) / (std::sqrt(rho) * tau);
  return error.reshaped();
}

CMatrix ls_estimate_frame(const CMatrix& true_matrix, const PilotConfig& pilot,
                          const ArrayGeometry& geometry, Rng& rng) {
  pilot.validate(geometry);
  if (true_matrix.rows() != static_cast<Eigen::Index>(geometry.antenna_pairs())) {
    throw std::invalid_argument("ls_estimate_frame: channel has " +
                                std::to_string(true_matrix.rows()) + " rows, geometry has M = " +
                                std::to_string(geometry.antenna_pairs()));
  }
  const double sigma2 = noise_variance(pilot);
  const double rho = pilot.pilot_power_w();
  const CMatrix phi = dft_pilot(pilot.pilot_len, geometry.ue_antennas);

  CMatrix estimate = true_matrix;
  for (Eigen::Index l = 0; l < true_matrix.cols(); ++l) {
    const CMatrix w = draw_pilot_noise(geometry.bs_antennas(), pilot.pilot_len, sigma2, rng);
    estimate.col(l) += ls_error_from_noise(w, phi, rho);
  }
  return estimate;
}

ChannelTrajectory estimate_trajectory(const ChannelTrajectory& true_traj, const PilotConfig& pilot,
                                      const ArrayGeometry& geometry, std::uint64_t noise_seed) {
  ChannelTrajectory out;
  out.kind = TrajectoryKind::kEstimated;
  out.start_slot = true_traj.start_slot;
  out.slots.reserve(true_traj.size());
  for (std::size_t n = 0; n < true_traj.size(); ++n) {
    Rng rng(derive_seed(noise_seed, Stream::kNoise, true_traj.start_slot + n));
    out.slots.push_back(ls_estimate_frame(true_traj.slots[n], pilot, geometry, rng));
  }
  return out;
}

}  // namespace chanpred
