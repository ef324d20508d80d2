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

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "chanpred/runner.hpp"

namespace chanpred {
namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.scenario.num_subcarriers = 6;
  c.scenario.num_paths = 5;
  c.geometry.bs_rows = 2;
  c.geometry.bs_cols = 2;
  c.geometry.ue_antennas = 1;
  c.pilot.pilot_len = 1;
  c.predictors = {PredictorKind::parse("AL-FD"), PredictorKind::parse("SL-AD")};
  c.collection_slots = 8;
  c.train.epochs = 5;
  c.eval = {3, 5};
  c.correlation_window = 12;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Config, DefaultsFollowReferenceProtocol) {
  const ExperimentConfig c = ExperimentConfig::defaults();
  EXPECT_EQ(c.eval.gap_slots, 100u);
  EXPECT_EQ(c.eval.eval_slots, 100u);
  EXPECT_EQ(c.input_order, 2u);
  EXPECT_EQ(c.train.batch_size, 16u);
  EXPECT_EQ(c.train.epochs, 150u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.predictors.back().name(), "OUT");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTripPreservesHash) {
  ExperimentConfig c = tiny_config();
  c.axis = SweepAxis::kUeSpeed;
  c.values = {20, 40};
  c.rate = RateSettings{};
  c.rate->rate.num_ues = 2;
  c.scenario.doppler_model = DopplerModel::kIsotropic;
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  ExperimentConfig other = c;
  other.train.epochs = 6;
  EXPECT_NE(config_hash(other), config_hash(c));
  other = c;
  other.jobs = 4;
  EXPECT_EQ(config_hash(other), config_hash(c));
}

TEST(Config, NoiselessFlagAndPartialDocuments) {
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"pilot": {"noiseless": true}, "collection_slots": 20, "sweep": {"axis": "N", "values": [10, 20]}})"));
  EXPECT_EQ(c.pilot.noise_psd_dbm_hz, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(c.collection_slots, 20u);
  EXPECT_EQ(c.axis, SweepAxis::kCollectionSlots);
  EXPECT_EQ(c.scenario.num_subcarriers, 128u);
  EXPECT_EQ(config_from_json(to_json(c)).pilot.noise_psd_dbm_hz, c.pilot.noise_psd_dbm_hz);
}

TEST(Config, RejectsUnknownKeysAndInconsistencies) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"epochs": 3})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"train": {"epoch": 3}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"sweep": {"axis": "N", "values": []}})")),
               std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"collection_slots": 3})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"predictors": ["XL-AD"]})")), std::invalid_argument);
  EXPECT_THROW(parse_axis("time"), std::invalid_argument);
  ExperimentConfig c = tiny_config();
  c.rate = RateSettings{};
  c.rate->rate.num_ues = 5;  // more users than BS antennas
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ApplyAxis, SetsTheRightField) {
  const ExperimentConfig c = tiny_config();
  EXPECT_EQ(apply_axis(c, SweepAxis::kCollectionSlots, 40).collection_slots, 40u);
  EXPECT_EQ(apply_axis(c, SweepAxis::kAntennaSpacing, 0.1).geometry.spacing_bs, 0.1);
  EXPECT_EQ(apply_axis(c, SweepAxis::kAntennaSpacing, 0.1).geometry.spacing_ue, 0.1);
  EXPECT_EQ(apply_axis(c, SweepAxis::kPilotPower, 20).pilot.pilot_power_dbm, 20.0);
  EXPECT_DOUBLE_EQ(apply_axis(c, SweepAxis::kUeSpeed, 36).scenario.ue_speed_mps, 10.0);
  EXPECT_EQ(apply_axis(c, SweepAxis::kPredictionOrder, 3).prediction_order, 3u);
  EXPECT_THROW(apply_axis(c, SweepAxis::kCollectionSlots, 10.5), std::invalid_argument);
  EXPECT_THROW(apply_axis(c, SweepAxis::kRateGamma, 10), std::invalid_argument);
}

TEST(CycleLayout, DisjointPhasesSeparatedByGap) {
  ExperimentConfig c = tiny_config();
  c.prediction_order = 2;
  c.collection_slots = 9;
  const CycleLayout l = cycle_layout(c);
  EXPECT_EQ(l.train_end, 9u);
  EXPECT_EQ(l.predict_begin - l.train_end, c.eval.gap_slots);
  EXPECT_EQ(l.first_target, l.predict_begin + c.input_order + 1);
  EXPECT_EQ(l.total_slots - l.first_target, c.eval.eval_slots);
}

TEST(RunCycle, DeterministicWithOutdatedBaseline) {
  const ExperimentConfig c = tiny_config();
  const auto a = run_cycle(c, 7);
  const auto b = run_cycle(c, 7);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.back().predictor, "OUT");
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].predictor, b[k].predictor);
    EXPECT_EQ(a[k].nmse.linear, b[k].nmse.linear);
    EXPECT_DOUBLE_EQ(a[k].overhead.t_col_s, 0.016);
  }
  EXPECT_NE(run_cycle(c, 8).front().nmse.linear, a.front().nmse.linear);
}

TEST(RunCycle, SumRateWhenConfigured) {
  ExperimentConfig c = tiny_config();
  c.rate = RateSettings{};
  c.rate->rate.num_ues = 2;
  c.rate->betas = {0.0, 1.0};
  const auto r = run_cycle(c, 3);
  for (const CycleResult& row : r) {
    ASSERT_TRUE(row.sum_rate.has_value());
    ASSERT_EQ(row.sum_rate_per_beta.size(), 2u);
    EXPECT_GT(*row.sum_rate, 0.0);
  }
  // beta = 1 uses only the training-phase (outdated) combiners, identical for every predictor.
  EXPECT_DOUBLE_EQ(r.front().sum_rate_per_beta[1], r.back().sum_rate_per_beta[1]);
}

TEST(Sweep, RowCountsAndSeedDiscipline) {
  ExperimentConfig c = tiny_config();
  c.predictors.push_back(PredictorKind::parse("OUT"));
  c.axis = SweepAxis::kCollectionSlots;
  c.values = {8, 10};
  c.num_seeds = 2;
  const auto two = sweep(c);
  EXPECT_EQ(two.rows.size(), 2u * 2u * 3u);
  for (const ReportRow& r : two.rows) EXPECT_EQ(r.config_hash, two.config_hash);
  c.num_seeds = 3;
  const auto three = sweep(c);
  EXPECT_EQ(three.rows.size(), 2u * 3u * 3u);
  // Row order is (value, replicate, predictor): replicate r of value v sits at the same offset.
  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t k = 0; k < 6; ++k) {
      const ReportRow& a = two.rows[v * 6 + k];
      const ReportRow& b = three.rows[v * 9 + k];
      EXPECT_EQ(a.seed, b.seed);
      EXPECT_EQ(a.predictor, b.predictor);
      EXPECT_EQ(a.nmse_linear, b.nmse_linear);
    }
  }
  c.values.clear();
  EXPECT_THROW(sweep(c), std::invalid_argument);
}

TEST(Sweep, SpacingAxisAddsCorrelations) {
  ExperimentConfig c = tiny_config();
  c.axis = SweepAxis::kAntennaSpacing;
  c.values = {0.1, 0.5};
  const auto r = sweep(c);
  ASSERT_EQ(r.correlations.size(), 4u);  // two values x two domains
  EXPECT_EQ(r.correlations[0].domain, "array");
  EXPECT_EQ(r.correlations[2].axis_value, 0.5);
}

TEST(Emit, StableFilesAndReadableSummary) {
  ExperimentConfig c = tiny_config();
  c.report_correlations = true;
  const auto report = sweep(c);
  const auto dir = std::filesystem::temp_directory_path() / "chanpred_emit_test";
  std::filesystem::remove_all(dir);
  emit(report, dir / "a", "2026-01-01T00:00:00Z");
  emit(report, dir / "b", "2027-06-30T12:00:00Z");
  const std::string csv = slurp(dir / "a" / "results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsCsvHeader);
  EXPECT_EQ(csv, slurp(dir / "b" / "results.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "correlations.csv"));

  auto a = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  auto b = nlohmann::json::parse(slurp(dir / "b" / "summary.json"));
  EXPECT_EQ(a.at("timestamp"), "2026-01-01T00:00:00Z");
  a.erase("timestamp");
  b.erase("timestamp");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.at("rows").size(), report.rows.size());
  EXPECT_EQ(a.at("rows")[0].at("nmse_db").get<double>(), report.rows[0].nmse_db);
  EXPECT_EQ(a.at("config_hash"), report.config_hash);
  // The embedded config reproduces the run.
  EXPECT_EQ(config_hash(config_from_json(a.at("config"))), report.config_hash);
  std::filesystem::remove_all(dir);
}

TEST(Timestamp, Iso8601Utc) {
  const std::string t = utc_timestamp();
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(t[10], 'T');
  EXPECT_EQ(t.back(), 'Z');
}

}  // namespace
}  // namespace chanpred
