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
#include <span>
#include <vector>

#include "chanpred/channel_model.hpp"
#include "chanpred/dataset.hpp"
#include "chanpred/neural.hpp"
#include "chanpred/predictors.hpp"
#include "chanpred/types.hpp"

namespace chanpred {

// ---------------------------------------------------------------------------
// Correlation
//
// Ensemble expectations are replaced by sample averages over the slots of the
// trajectory that is passed in; callers choose the window.
// ---------------------------------------------------------------------------

enum class CorrelationKind { kTypeI, kTypeII, kTemporal };

struct CorrelationReport {
  Domain domain = Domain::kArray;
  CorrelationKind kind = CorrelationKind::kTypeI;
  /// K2 x K2 (Type-I), K1 x K1 (Type-II, averaged over sub-channels) or
  /// (max_lag + 1) x 1 (temporal, averaged over sub-channels).
  CMatrix values;
  std::size_t slots_averaged = 0;
  std::size_t indices_averaged = 0;
};

/// Normalised covariance between sub-channels i and i2.
Complex type1_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t i2);
CorrelationReport type1_matrix(const ChannelTrajectory& traj, Domain domain);

/// Normalised covariance between elements j and j2 of sub-channel i.
Complex type2_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t j,
                   std::size_t j2);
/// Type-II matrix averaged (complex mean) over all sub-channels.
CorrelationReport type2_averaged(const ChannelTrajectory& traj, Domain domain);

/// Mean over n of (h_n^i)^H h_{n+k}^i / ||h_n^i||^2.
Complex temporal_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t k);
/// Lags 0..max_lag, each averaged (complex mean) over all sub-channels.
CorrelationReport temporal_averaged(const ChannelTrajectory& traj, Domain domain,
                                    std::size_t max_lag);

/// Mean of |values(a, b)| over a != b.
double mean_offdiagonal_magnitude(const CMatrix& values);

// ---------------------------------------------------------------------------
// NMSE
// ---------------------------------------------------------------------------

inline constexpr double kNmseFloorDb = -120.0;

struct Nmse {
  double linear = 0.0;
  double db = kNmseFloorDb;
};

/// 10 log10(linear), floored at kNmseFloorDb.
double nmse_to_db(double linear);

/// Mean over slots of ||H - H^||_F^2 / ||H||_F^2.
Nmse nmse(std::span<const CMatrix> predicted, std::span<const CMatrix> truth);

// ---------------------------------------------------------------------------
// Zero-forcing and sum-rate
// ---------------------------------------------------------------------------

/// U x M combiner (H^H H)^{-1} H^H with every row scaled to unit norm.
/// Throws std::domain_error when the M x U input is rank deficient.
CMatrix zf_combiner(const CMatrix& channel_columns);

/// One combiner per subcarrier from U single-antenna channels (each M x L).
std::vector<CMatrix> zf_combiners(std::span<const CMatrix> ue_channels);

struct RateConfig {
  std::size_t num_ues = 5;
  double gamma_dbm = 10.0;
  double sigma2_w = 0.0;
  std::size_t symbols_per_slot = 14;
  std::size_t pilot_symbols = 2;

  double gamma_w() const;
  /// (N_s - tau) / N_s
  double alpha() const;
  void validate() const;
};

struct RateResult {
  std::vector<double> training;    // R^u_tr, bits/s/Hz
  std::vector<double> prediction;  // R^u_pr
  double sum = 0.0;                // sum_u beta R^u_tr + (1 - beta) R^u_pr
};

/// Rate of UE u averaged over subcarriers with prefactor alpha. `combiners`
/// holds one U x M matrix per subcarrier.
double ue_rate(std::span<const CMatrix> true_channels, std::span<const CMatrix> combiners,
               std::size_t ue, const RateConfig& config);

RateResult achievable_sum_rate(std::span<const CMatrix> true_channels,
                               std::span<const CMatrix> training_combiners,
                               std::span<const CMatrix> prediction_combiners,
                               const RateConfig& config, double beta);

// ---------------------------------------------------------------------------
// Overhead and complexity
// ---------------------------------------------------------------------------

struct OverheadReport {
  double slot_duration_s = 0.0;
  std::size_t slots = 0;
  double t_col_s = 0.0;
  double t_com_s = 0.0;
  double t_tot_s = 0.0;
  double t_cyc_s = 0.0;
  double beta = 0.0;
};

/// T_col = T_dur N, T_tot = T_col + T_com, beta = T_tot / T_cyc.
OverheadReport overhead(double slot_duration_s, std::size_t slots, double t_com_s, double t_cyc_s);

/// N_epoch N_node N_train (N_node + K1 (I + 1)) for a two-equal-hidden-layer MLP.
/// K1 (I + 1) is read off the arch as (input_dim + output_dim) / 2.
double complexity_estimate(const MlpArch& arch, std::size_t epochs, std::size_t n_train);

/// Training-cost proxy of one predictor kind; AL scales N_train by K2, SL is
/// per network.
double complexity_for(const PredictorKind& kind, std::size_t m, std::size_t l,
                      std::size_t slots, std::size_t input_order, std::size_t epochs);

}  // namespace chanpred
