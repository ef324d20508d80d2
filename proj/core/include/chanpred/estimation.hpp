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

#include "chanpred/channel_model.hpp"
#include "chanpred/rng.hpp"
#include "chanpred/types.hpp"

namespace chanpred {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Pilot transmission settings. Powers are configured in dBm; a noise PSD of
/// -infinity gives a noiseless estimator.
struct PilotConfig {
  std::size_t pilot_len = 2;
  double pilot_power_dbm = 10.0;
  double noise_psd_dbm_hz = -174.0;
  double subcarrier_spacing_hz = 40e3;

  double pilot_power_w() const { return dbm_to_watts(pilot_power_dbm); }
  /// Requires pilot_len >= M_UE and a finite pilot power.
  void validate(const ArrayGeometry& geometry) const;
};

/// First `m_ue` columns of the tau-point DFT matrix, so Phi^H Phi = tau I.
CMatrix dft_pilot(std::size_t tau, std::size_t m_ue);

/// Per-subcarrier noise power in watts: PSD integrated over one subcarrier.
double noise_variance(const PilotConfig& pilot);

/// Variance sigma^2 / (rho tau) of each LS estimation-error coefficient.
double estimation_error_variance(const PilotConfig& pilot);

/// Received pilot-domain noise W for one subcarrier, M_BS x tau, entries CN(0, sigma2).
CMatrix draw_pilot_noise(std::size_t m_bs, std::size_t tau, double sigma2, Rng& rng);

/// LS estimation error for one subcarrier given the received noise W:
/// vec(W conj(Phi)) / (sqrt(rho) tau), length M = M_BS M_UE.
CVector ls_error_from_noise(const CMatrix& noise, const CMatrix& pilot, double rho);

/// G = H + W~ for one slot, one independent noise draw per subcarrier column.
CMatrix ls_estimate_frame(const CMatrix& true_matrix, const PilotConfig& pilot,
                          const ArrayGeometry& geometry, Rng& rng);

/// Applies ls_estimate_frame to every slot. Slot n draws from
/// derive_seed(noise_seed, kNoise, absolute slot index), so any window of a
/// trajectory gets the same noise as the full run.
ChannelTrajectory estimate_trajectory(const ChannelTrajectory& true_traj, const PilotConfig& pilot,
                                      const ArrayGeometry& geometry, std::uint64_t noise_seed);

}  // namespace chanpred
