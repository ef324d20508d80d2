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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chanpred/channel_model.hpp"
#include "chanpred/estimation.hpp"
#include "chanpred/metrics.hpp"
#include "chanpred/neural.hpp"
#include "chanpred/predictors.hpp"

namespace chanpred {

inline constexpr std::string_view kToolName = "chanpred";
std::string_view tool_version();

enum class SweepAxis {
  kNone,
  kCollectionSlots,  // "N"
  kAntennaSpacing,   // "spacing", wavelengths, BS and UE
  kPilotPower,       // "pilot_power", dBm
  kUeSpeed,          // "speed", km/h
  kPredictionOrder,  // "p"
  kRateGamma,        // "gamma", dBm transmit power; needs rate settings
};

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view text);

struct EvalConfig {
  std::size_t gap_slots = 100;
  std::size_t eval_slots = 100;
};

struct RateSettings {
  RateConfig rate;
  std::vector<double> betas{0.16};
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  ArrayGeometry geometry;
  PilotConfig pilot;
  std::vector<PredictorKind> predictors;
  std::size_t input_order = 2;
  std::size_t prediction_order = 1;
  std::size_t collection_slots = 10;  // N
  TrainConfig train;
  EvalConfig eval;
  std::optional<RateSettings> rate;
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> values;
  std::uint64_t master_seed = 1;
  std::size_t num_seeds = 1;
  std::size_t jobs = 1;
  std::size_t correlation_window = 100;
  bool report_correlations = false;

  /// Defaults: AL-AD, AL-FD, SL-AD, SL-FD, OUT with the full-scale scenario.
  static ExperimentConfig defaults();
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Copy of `config` with the sweep axis set to `value`.
ExperimentConfig apply_axis(const ExperimentConfig& config, SweepAxis axis, double value);

/// Seed of replicate r: derive_seed(master_seed, kReplicate, r).
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate);

/// Slot layout of one cycle. Training uses [0, N); the prediction phase starts
/// gap_slots later with I context slots, then eval_slots targets (plus p - 1
/// look-ahead slots for multi-step labels).
struct CycleLayout {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;
  std::size_t predict_begin = 0;
  std::size_t first_target = 0;
  std::size_t total_slots = 0;
};

CycleLayout cycle_layout(const ExperimentConfig& config);

/// True and estimated channels of one cycle's primary realisation, drawn from
/// the channel and noise streams of `seed`.
struct CycleChannels {
  ChannelTrajectory truth;
  ChannelTrajectory estimated;
};

CycleChannels realise_cycle(const ExperimentConfig& config, std::uint64_t seed);

/// Training hyper-parameters of a cycle: config.train with the cycle's seed.
TrainConfig cycle_train_config(const ExperimentConfig& config, std::uint64_t seed);

/// The p-th step prediction for every evaluation target of the layout, using
/// sliding windows of the estimated channels as inputs.
std::vector<CMatrix> predict_eval_targets(const TrainedPredictor& predictor,
                                          const ChannelTrajectory& estimated,
                                          const CycleLayout& layout);

/// True channels at the evaluation targets of the layout.
std::vector<CMatrix> eval_truth(const ChannelTrajectory& truth, const CycleLayout& layout);

struct CycleResult {
  std::string predictor;
  Nmse nmse;
  OverheadReport overhead;
  double t_com_wall_s = 0.0;
  std::optional<double> sum_rate;
  std::vector<double> sum_rate_per_beta;
};

/// One train/predict cycle of every configured predictor on one channel
/// realisation. OUT is always included.
std::vector<CycleResult> run_cycle(const ExperimentConfig& config, std::uint64_t seed);

struct ReportRow {
  std::string predictor;
  std::string axis;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::size_t replicate = 0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  double t_col_s = 0.0;
  double t_com_s = 0.0;
  double t_com_wall_s = 0.0;
  std::optional<double> sum_rate;
  std::vector<double> sum_rate_per_beta;
  std::string config_hash;
};

struct CorrelationRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::string domain;
  double type1_mean = 0.0;
  double type2_mean = 0.0;
  double temporal_lag1 = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<ReportRow> rows;
  std::vector<CorrelationRow> correlations;
};

/// Correlation summary of one true trajectory: mean off-diagonal |Type-I|,
/// |Type-II| and |R(1)| for both domains.
std::vector<CorrelationRow> correlation_summary(const ChannelTrajectory& traj, double axis_value,
                                                std::uint64_t seed);

/// Every (axis value, replicate) cell through run_cycle. Rows sorted by
/// (axis value, replicate, predictor order in the config).
ExperimentReport sweep(const ExperimentConfig& config);

inline constexpr std::string_view kResultsCsvHeader =
    "predictor,axis,axis_value,seed,nmse_linear,nmse_db,t_col_s,t_com_s,sum_rate";

std::string results_csv(const ExperimentReport& report);
nlohmann::json summary_json(const ExperimentReport& report, std::string_view timestamp);

/// Writes results.csv, summary.json and (when present) correlations.csv.
void emit(const ExperimentReport& report, const std::filesystem::path& out_dir,
          std::string_view timestamp);

std::string utc_timestamp();

}  // namespace chanpred
