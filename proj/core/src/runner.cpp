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

#include "chanpred/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "chanpred/parallel.hpp"

namespace chanpred {

using nlohmann::json;

std::string_view tool_version() { return CHANPRED_VERSION; }

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kCollectionSlots: return "N";
    case SweepAxis::kAntennaSpacing: return "spacing";
    case SweepAxis::kPilotPower: return "pilot_power";
    case SweepAxis::kUeSpeed: return "speed";
    case SweepAxis::kPredictionOrder: return "p";
    case SweepAxis::kRateGamma: return "gamma";
  }
  return "none";
}

SweepAxis parse_axis(std::string_view text) {
  for (SweepAxis a : {SweepAxis::kNone, SweepAxis::kCollectionSlots, SweepAxis::kAntennaSpacing,
                      SweepAxis::kPilotPower, SweepAxis::kUeSpeed, SweepAxis::kPredictionOrder,
                      SweepAxis::kRateGamma}) {
    if (text == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown sweep axis '" + std::string(text) +
                              "' (expected N, spacing, pilot_power, speed, p or gamma)");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  for (const char* name : {"AL-AD", "AL-FD", "SL-AD", "SL-FD", "OUT"}) {
    c.predictors.push_back(PredictorKind::parse(name));
  }
  return c;
}

void ExperimentConfig::validate() const {
  scenario.validate();
  geometry.validate();
  pilot.validate(geometry);
  train.validate();
  if (predictors.empty()) throw std::invalid_argument("config: no predictors requested");
  for (const PredictorKind& k : predictors) k.validate();
  if (input_order == 0 || prediction_order == 0) {
    throw std::invalid_argument("config: input_order and prediction_order must be >= 1");
  }
  if (collection_slots < input_order + prediction_order + 1) {
    throw std::invalid_argument("config: collection_slots N=" + std::to_string(collection_slots) +
                                " must be at least I + p + 1 = " +
                                std::to_string(input_order + prediction_order + 1));
  }
  if (eval.eval_slots == 0) throw std::invalid_argument("config: eval_slots must be >= 1");
  if (axis != SweepAxis::kNone && values.empty()) {
    throw std::invalid_argument("config: sweep axis '" + std::string(to_string(axis)) +
                                "' has no values");
  }
  if (axis == SweepAxis::kNone && !values.empty()) {
    throw std::invalid_argument("config: sweep values given without an axis");
  }
  if (num_seeds == 0) throw std::invalid_argument("config: num_seeds must be >= 1");
  if (jobs == 0) throw std::invalid_argument("config: jobs must be >= 1");
  if (correlation_window < 2) throw std::invalid_argument("config: correlation_window must be >= 2");
  if (axis == SweepAxis::kRateGamma && !rate) {
    throw std::invalid_argument("config: the gamma axis needs a rate section");
  }
  if (rate) {
    if (geometry.ue_antennas != 1) {
      throw std::invalid_argument("config: sum-rate evaluation needs single-antenna UEs");
    }
    if (rate->rate.num_ues == 0 || rate->rate.num_ues > geometry.bs_antennas()) {
      throw std::invalid_argument("config: rate.num_ues must be in [1, M_BS]");
    }
    if (rate->rate.symbols_per_slot <= pilot.pilot_len) {
      throw std::invalid_argument("config: rate.symbols_per_slot must exceed the pilot length");
    }
    if (rate->betas.empty()) throw std::invalid_argument("config: rate.betas is empty");
    for (double b : rate->betas) {
      if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("config: every beta must be in [0, 1]");
    }
    if (!std::isfinite(pilot.noise_psd_dbm_hz)) {
      throw std::invalid_argument("config: sum-rate evaluation needs a finite noise level");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

std::string_view to_string(DopplerModel model) {
  return model == DopplerModel::kIsotropic ? "isotropic" : "clustered";
}

DopplerModel parse_doppler(const std::string& text) {
  if (text == "isotropic") return DopplerModel::kIsotropic;
  if (text == "clustered") return DopplerModel::kClustered;
  throw std::invalid_argument("unknown doppler_model '" + text + "'");
}

void reject_unknown(const json& j, std::string_view section,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) target = it->get<T>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json predictors = json::array();
  for (const PredictorKind& k : c.predictors) predictors.push_back(k.name());
  json pilot = {{"pilot_len", c.pilot.pilot_len}, {"pilot_power_dbm", c.pilot.pilot_power_dbm}};
  if (std::isfinite(c.pilot.noise_psd_dbm_hz)) {
    pilot["noise_psd_dbm_hz"] = c.pilot.noise_psd_dbm_hz;
    pilot["noiseless"] = false;
  } else {
    pilot["noiseless"] = true;
  }
  json rate = nullptr;
  if (c.rate) {
    rate = {{"num_ues", c.rate->rate.num_ues},
            {"gamma_dbm", c.rate->rate.gamma_dbm},
            {"symbols_per_slot", c.rate->rate.symbols_per_slot},
            {"betas", c.rate->betas}};
  }
  return {
      {"scenario",
       {{"carrier_hz", c.scenario.carrier_hz},
        {"subcarrier_spacing_hz", c.scenario.subcarrier_spacing_hz},
        {"num_subcarriers", c.scenario.num_subcarriers},
        {"slot_duration_s", c.scenario.slot_duration_s},
        {"ue_speed_kmh", c.scenario.ue_speed_mps * 3.6},
        {"num_paths", c.scenario.num_paths},
        {"delay_spread_s", c.scenario.delay_spread_s},
        {"path_loss_db", c.scenario.path_loss_db},
        {"doppler_model", to_string(c.scenario.doppler_model)},
        {"doppler_spread_deg", c.scenario.doppler_spread_rad * 180.0 / kPi}}},
      {"geometry",
       {{"bs_rows", c.geometry.bs_rows},
        {"bs_cols", c.geometry.bs_cols},
        {"ue_antennas", c.geometry.ue_antennas},
        {"spacing_bs", c.geometry.spacing_bs},
        {"spacing_ue", c.geometry.spacing_ue}}},
      {"pilot", pilot},
      {"predictors", predictors},
      {"input_order", c.input_order},
      {"prediction_order", c.prediction_order},
      {"collection_slots", c.collection_slots},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"batch_size", c.train.batch_size},
        {"epochs", c.train.epochs},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon}}},
      {"eval", {{"gap_slots", c.eval.gap_slots}, {"eval_slots", c.eval.eval_slots}}},
      {"rate", rate},
      {"sweep", {{"axis", to_string(c.axis)}, {"values", c.values}}},
      {"master_seed", c.master_seed},
      {"num_seeds", c.num_seeds},
      {"jobs", c.jobs},
      {"correlation_window", c.correlation_window},
      {"report_correlations", c.report_correlations},
  };
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, "config",
                 {"scenario", "geometry", "pilot", "predictors", "input_order", "prediction_order",
                  "collection_slots", "train", "eval", "rate", "sweep", "master_seed", "num_seeds",
                  "jobs", "correlation_window", "report_correlations"});
  ExperimentConfig c = ExperimentConfig::defaults();

  if (auto it = j.find("scenario"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "scenario",
                   {"carrier_hz", "subcarrier_spacing_hz", "num_subcarriers", "slot_duration_s",
                    "ue_speed_kmh", "num_paths", "delay_spread_s", "path_loss_db", "doppler_model",
                    "doppler_spread_deg"});
    read(s, "carrier_hz", c.scenario.carrier_hz);
    read(s, "subcarrier_spacing_hz", c.scenario.subcarrier_spacing_hz);
    read(s, "num_subcarriers", c.scenario.num_subcarriers);
    read(s, "slot_duration_s", c.scenario.slot_duration_s);
    if (s.contains("ue_speed_kmh")) c.scenario.ue_speed_mps = kmh_to_mps(s.at("ue_speed_kmh").get<double>());
    read(s, "num_paths", c.scenario.num_paths);
    read(s, "delay_spread_s", c.scenario.delay_spread_s);
    read(s, "path_loss_db", c.scenario.path_loss_db);
    if (s.contains("doppler_model")) c.scenario.doppler_model = parse_doppler(s.at("doppler_model").get<std::string>());
    if (s.contains("doppler_spread_deg")) {
      c.scenario.doppler_spread_rad = s.at("doppler_spread_deg").get<double>() * kPi / 180.0;
    }
  }
  if (auto it = j.find("geometry"); it != j.end()) {
    const json& g = *it;
    reject_unknown(g, "geometry", {"bs_rows", "bs_cols", "ue_antennas", "spacing_bs", "spacing_ue"});
    read(g, "bs_rows", c.geometry.bs_rows);
    read(g, "bs_cols", c.geometry.bs_cols);
    read(g, "ue_antennas", c.geometry.ue_antennas);
    read(g, "spacing_bs", c.geometry.spacing_bs);
    read(g, "spacing_ue", c.geometry.spacing_ue);
  }
  if (auto it = j.find("pilot"); it != j.end()) {
    const json& p = *it;
    reject_unknown(p, "pilot", {"pilot_len", "pilot_power_dbm", "noise_psd_dbm_hz", "noiseless"});
    read(p, "pilot_len", c.pilot.pilot_len);
    read(p, "pilot_power_dbm", c.pilot.pilot_power_dbm);
    read(p, "noise_psd_dbm_hz", c.pilot.noise_psd_dbm_hz);
    if (p.value("noiseless", false)) c.pilot.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
  }
  if (auto it = j.find("predictors"); it != j.end()) {
    c.predictors.clear();
    for (const json& name : *it) c.predictors.push_back(PredictorKind::parse(name.get<std::string>()));
  }
  read(j, "input_order", c.input_order);
  read(j, "prediction_order", c.prediction_order);
  read(j, "collection_slots", c.collection_slots);
  if (auto it = j.find("train"); it != j.end()) {
    const json& t = *it;
    reject_unknown(t, "train", {"learning_rate", "batch_size", "epochs", "beta1", "beta2", "epsilon"});
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "batch_size", c.train.batch_size);
    read(t, "epochs", c.train.epochs);
    read(t, "beta1", c.train.beta1);
    read(t, "beta2", c.train.beta2);
    read(t, "epsilon", c.train.epsilon);
  }
  if (auto it = j.find("eval"); it != j.end()) {
    reject_unknown(*it, "eval", {"gap_slots", "eval_slots"});
    read(*it, "gap_slots", c.eval.gap_slots);
    read(*it, "eval_slots", c.eval.eval_slots);
  }
  if (auto it = j.find("rate"); it != j.end() && !it->is_null()) {
    const json& r = *it;
    reject_unknown(r, "rate", {"num_ues", "gamma_dbm", "symbols_per_slot", "betas"});
    RateSettings settings;
    read(r, "num_ues", settings.rate.num_ues);
    read(r, "gamma_dbm", settings.rate.gamma_dbm);
    read(r, "symbols_per_slot", settings.rate.symbols_per_slot);
    read(r, "betas", settings.betas);
    c.rate = settings;
  }
  if (auto it = j.find("sweep"); it != j.end()) {
    reject_unknown(*it, "sweep", {"axis", "values"});
    if (it->contains("axis")) c.axis = parse_axis(it->at("axis").get<std::string>());
    read(*it, "values", c.values);
  }
  read(j, "master_seed", c.master_seed);
  read(j, "num_seeds", c.num_seeds);
  read(j, "jobs", c.jobs);
  read(j, "correlation_window", c.correlation_window);
  read(j, "report_correlations", c.report_correlations);
  c.pilot.subcarrier_spacing_hz = c.scenario.subcarrier_spacing_hz;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("jobs");  // parallelism never changes results
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Cycles and sweeps
// ---------------------------------------------------------------------------

namespace {

std::size_t as_count(double value, SweepAxis axis) {
  if (!(value >= 1.0) || value != std::floor(value)) {
    throw std::invalid_argument("sweep value " + std::to_string(value) + " for axis '" +
                                std::string(to_string(axis)) + "' must be a positive integer");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

ExperimentConfig apply_axis(const ExperimentConfig& config, SweepAxis axis, double value) {
  ExperimentConfig c = config;
  switch (axis) {
    case SweepAxis::kNone: break;
    case SweepAxis::kCollectionSlots: c.collection_slots = as_count(value, axis); break;
    case SweepAxis::kAntennaSpacing:
      c.geometry.spacing_bs = value;
      c.geometry.spacing_ue = value;
      break;
    case SweepAxis::kPilotPower: c.pilot.pilot_power_dbm = value; break;
    case SweepAxis::kUeSpeed: c.scenario.ue_speed_mps = kmh_to_mps(value); break;
    case SweepAxis::kPredictionOrder: c.prediction_order = as_count(value, axis); break;
    case SweepAxis::kRateGamma:
      if (!c.rate) throw std::invalid_argument("apply_axis: gamma axis needs rate settings");
      c.rate->rate.gamma_dbm = value;
      break;
  }
  c.axis = SweepAxis::kNone;
  c.values.clear();
  return c;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate) {
  return derive_seed(master_seed, Stream::kReplicate, replicate);
}

CycleLayout cycle_layout(const ExperimentConfig& config) {
  CycleLayout l;
  l.train_begin = 0;
  l.train_end = config.collection_slots;
  l.predict_begin = l.train_end + config.eval.gap_slots;
  l.first_target = l.predict_begin + config.input_order + config.prediction_order - 1;
  l.total_slots = l.first_target + config.eval.eval_slots;
  return l;
}

namespace {

CycleChannels realise(const ExperimentConfig& config, std::uint64_t channel_seed,
                      std::uint64_t noise_seed, std::size_t slots) {
  ScenarioConfig scenario = config.scenario;
  scenario.seed = channel_seed;
  CycleChannels r;
  r.truth = generate_trajectory(scenario, config.geometry, slots);
  r.estimated = estimate_trajectory(r.truth, config.pilot, config.geometry, noise_seed);
  return r;
}

std::vector<PredictorKind> with_outdated(std::vector<PredictorKind> kinds) {
  const PredictorKind out{Approach::kOutdated, Domain::kFrequency, false};
  if (std::find(kinds.begin(), kinds.end(), out) == kinds.end()) kinds.push_back(out);
  return kinds;
}

// Sum-rate of every predictor averaged over the evaluation targets. Each UE
// has its own channel realisation and its own trained predictor.
}  // namespace

CycleChannels realise_cycle(const ExperimentConfig& config, std::uint64_t seed) {
  return realise(config, seed, derive_seed(seed, Stream::kNoise), cycle_layout(config).total_slots);
}

TrainConfig cycle_train_config(const ExperimentConfig& config, std::uint64_t seed) {
  TrainConfig train = config.train;
  train.seed = derive_seed(seed, Stream::kTraining);
  return train;
}

std::vector<CMatrix> predict_eval_targets(const TrainedPredictor& predictor,
                                          const ChannelTrajectory& estimated,
                                          const CycleLayout& layout) {
  if (estimated.size() < layout.total_slots) {
    throw std::invalid_argument("predict: trajectory is shorter than the cycle layout");
  }
  const std::size_t input_order = predictor.input_order;
  const std::size_t prediction_order = predictor.prediction_order;
  if (layout.first_target + 1 < input_order + prediction_order) {
    throw std::invalid_argument("predict: layout leaves no room for the input window");
  }
  std::vector<CMatrix> out;
  const std::span<const CMatrix> all(estimated.slots);
  for (std::size_t target = layout.first_target; target < layout.total_slots; ++target) {
    const std::size_t newest = target - prediction_order;
    const auto recent = all.subspan(newest + 1 - input_order, input_order);
    out.push_back(std::move(predict_horizon(predictor, recent).back()));
  }
  return out;
}

std::vector<CMatrix> eval_truth(const ChannelTrajectory& truth, const CycleLayout& layout) {
  if (truth.size() < layout.total_slots) {
    throw std::invalid_argument("eval_truth: trajectory is shorter than the cycle layout");
  }
  return {truth.slots.begin() + static_cast<std::ptrdiff_t>(layout.first_target),
          truth.slots.begin() + static_cast<std::ptrdiff_t>(layout.total_slots)};
}

namespace {

std::vector<std::vector<double>> evaluate_rates(const ExperimentConfig& config,
                                                const std::vector<PredictorKind>& kinds,
                                                std::uint64_t seed, const CycleLayout& layout,
                                                const TrainConfig& train) {
  const RateSettings& settings = *config.rate;
  RateConfig rate = settings.rate;
  rate.sigma2_w = noise_variance(config.pilot);
  rate.pilot_symbols = config.pilot.pilot_len;  // tau of the estimation phase
  const std::size_t users = rate.num_ues;

  std::vector<CycleChannels> ues;
  for (std::size_t u = 0; u < users; ++u) {
    const std::uint64_t ue_seed = derive_seed(seed, Stream::kUser, u);
    ues.push_back(realise(config, ue_seed, derive_seed(ue_seed, Stream::kNoise), layout.total_slots));
  }

  // Training-phase combiners come from the outdated estimates.
  const PredictorKind outdated{Approach::kOutdated, Domain::kFrequency, false};
  std::vector<std::vector<CMatrix>> outdated_pred(users);
  for (std::size_t u = 0; u < users; ++u) {
    const auto p = train_predictor(outdated, ues[u].estimated.window(0, config.collection_slots),
                                   config.input_order, config.prediction_order, train);
    outdated_pred[u] = predict_eval_targets(p, ues[u].estimated, layout);
  }

  std::vector<std::vector<double>> per_kind;
  for (const PredictorKind& kind : kinds) {
    std::vector<std::vector<CMatrix>> predicted(users);
    for (std::size_t u = 0; u < users; ++u) {
      const auto p = train_predictor(kind, ues[u].estimated.window(0, config.collection_slots),
                                     config.input_order, config.prediction_order, train);
      predicted[u] = predict_eval_targets(p, ues[u].estimated, layout);
    }
    std::vector<double> sums(settings.betas.size(), 0.0);
    const std::size_t targets = layout.total_slots - layout.first_target;
    for (std::size_t t = 0; t < targets; ++t) {
      std::vector<CMatrix> truth(users), tr(users), pr(users);
      for (std::size_t u = 0; u < users; ++u) {
        truth[u] = ues[u].truth.slots[layout.first_target + t];
        tr[u] = outdated_pred[u][t];
        pr[u] = predicted[u][t];
      }
      const auto tr_comb = zf_combiners(tr);
      const auto pr_comb = zf_combiners(pr);
      for (std::size_t b = 0; b < settings.betas.size(); ++b) {
        sums[b] += achievable_sum_rate(truth, tr_comb, pr_comb, rate, settings.betas[b]).sum;
      }
    }
    for (double& s : sums) s /= static_cast<double>(targets);
    per_kind.push_back(std::move(sums));
  }
  return per_kind;
}

}  // namespace

std::vector<CycleResult> run_cycle(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const CycleLayout layout = cycle_layout(config);
  const CycleChannels primary = realise_cycle(config, seed);
  const ChannelTrajectory training = primary.estimated.window(0, config.collection_slots);
  const std::vector<CMatrix> truth = eval_truth(primary.truth, layout);
  const TrainConfig train = cycle_train_config(config, seed);

  const std::vector<PredictorKind> kinds = with_outdated(config.predictors);
  std::vector<CycleResult> results;
  for (const PredictorKind& kind : kinds) {
    const TrainedPredictor predictor = train_predictor(kind, training, config.input_order,
                                                       config.prediction_order, train, config.jobs);
    const std::vector<CMatrix> predicted = predict_eval_targets(predictor, primary.estimated, layout);
    CycleResult r;
    r.predictor = kind.name();
    r.nmse = nmse(predicted, truth);
    r.overhead = overhead(config.scenario.slot_duration_s, config.collection_slots,
                          predictor.timing.serial_seconds, 0.0);
    r.t_com_wall_s = predictor.timing.wall_seconds;
    results.push_back(std::move(r));
  }

  if (config.rate) {
    const auto rates = evaluate_rates(config, kinds, seed, layout, train);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      results[k].sum_rate_per_beta = rates[k];
      results[k].sum_rate = rates[k].front();
    }
  }
  return results;
}

std::vector<CorrelationRow> correlation_summary(const ChannelTrajectory& traj, double axis_value,
                                                std::uint64_t seed) {
  std::vector<CorrelationRow> rows;
  for (Domain domain : {Domain::kArray, Domain::kFrequency}) {
    CorrelationRow row;
    row.axis_value = axis_value;
    row.seed = seed;
    row.domain = std::string(to_string(domain));
    row.type1_mean = mean_offdiagonal_magnitude(type1_matrix(traj, domain).values);
    row.type2_mean = mean_offdiagonal_magnitude(type2_averaged(traj, domain).values);
    row.temporal_lag1 = std::abs(temporal_averaged(traj, domain, 1).values(1, 0));
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentReport sweep(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  report.config_hash = config_hash(config);

  const std::vector<double> values =
      config.axis == SweepAxis::kNone ? std::vector<double>{0.0} : config.values;
  const bool correlations =
      config.report_correlations || config.axis == SweepAxis::kAntennaSpacing;
  const std::size_t cells = values.size() * config.num_seeds;

  struct Cell {
    std::vector<ReportRow> rows;
    std::vector<CorrelationRow> correlations;
  };
  std::vector<Cell> results(cells);
  // Parallelism goes to the cells when there are several, otherwise to SL training.
  const std::size_t outer_jobs = cells > 1 ? config.jobs : 1;
  parallel_for(cells, outer_jobs, [&](std::size_t cell) {
    const double value = values[cell / config.num_seeds];
    const std::size_t replicate = cell % config.num_seeds;
    const std::uint64_t seed = replicate_seed(config.master_seed, replicate);
    ExperimentConfig local = apply_axis(config, config.axis, value);
    if (outer_jobs > 1) local.jobs = 1;

    for (const CycleResult& r : run_cycle(local, seed)) {
      ReportRow row;
      row.predictor = r.predictor;
      row.axis = std::string(to_string(config.axis));
      row.axis_value = value;
      row.seed = seed;
      row.replicate = replicate;
      row.nmse_linear = r.nmse.linear;
      row.nmse_db = r.nmse.db;
      row.t_col_s = r.overhead.t_col_s;
      row.t_com_s = r.overhead.t_com_s;
      row.t_com_wall_s = r.t_com_wall_s;
      row.sum_rate = r.sum_rate;
      row.sum_rate_per_beta = r.sum_rate_per_beta;
      row.config_hash = report.config_hash;
      results[cell].rows.push_back(std::move(row));
    }
    if (correlations) {
      ScenarioConfig scenario = local.scenario;
      scenario.seed = seed;
      const auto traj = generate_trajectory(scenario, local.geometry, local.correlation_window);
      results[cell].correlations = correlation_summary(traj, value, seed);
    }
  });

  for (Cell& c : results) {
    std::move(c.rows.begin(), c.rows.end(), std::back_inserter(report.rows));
    std::move(c.correlations.begin(), c.correlations.end(), std::back_inserter(report.correlations));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string results_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << kResultsCsvHeader << '\n';
  for (const ReportRow& r : report.rows) {
    out << r.predictor << ',' << r.axis << ',' << fmt(r.axis_value) << ',' << r.seed << ','
        << fmt(r.nmse_linear) << ',' << fmt(r.nmse_db) << ',' << fmt(r.t_col_s) << ','
        << fmt(r.t_com_s) << ',' << (r.sum_rate ? fmt(*r.sum_rate) : std::string()) << '\n';
  }
  return out.str();
}

json summary_json(const ExperimentReport& report, std::string_view timestamp) {
  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"predictor", r.predictor},
                    {"axis", r.axis},
                    {"axis_value", r.axis_value},
                    {"seed", r.seed},
                    {"replicate", r.replicate},
                    {"nmse_linear", r.nmse_linear},
                    {"nmse_db", r.nmse_db},
                    {"t_col_s", r.t_col_s},
                    {"t_com_s", r.t_com_s},
                    {"t_com_wall_s", r.t_com_wall_s},
                    {"sum_rate", r.sum_rate ? json(*r.sum_rate) : json(nullptr)},
                    {"sum_rate_per_beta", r.sum_rate_per_beta},
                    {"config_hash", r.config_hash}});
  }

  // Median and spread of NMSE per (predictor, axis value), in first-seen order.
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const ReportRow& r : report.rows) {
    auto key = std::make_pair(r.predictor, r.axis_value);
    if (!groups.contains(key)) keys.push_back(key);
    groups[key].push_back(r.nmse_db);
  }
  json cells = json::array();
  for (const auto& key : keys) {
    const auto& v = groups[key];
    cells.push_back({{"predictor", key.first},
                     {"axis_value", key.second},
                     {"seeds", v.size()},
                     {"nmse_db_median", median(v)},
                     {"nmse_db_min", *std::min_element(v.begin(), v.end())},
                     {"nmse_db_max", *std::max_element(v.begin(), v.end())}});
  }

  json correlations = json::array();
  for (const CorrelationRow& c : report.correlations) {
    correlations.push_back({{"axis_value", c.axis_value},
                            {"seed", c.seed},
                            {"domain", c.domain},
                            {"type1_mean", c.type1_mean},
                            {"type2_mean", c.type2_mean},
                            {"temporal_lag1", c.temporal_lag1}});
  }

  return {{"tool", kToolName},
          {"version", tool_version()},
          {"timestamp", timestamp},
          {"config_hash", report.config_hash},
          {"config", to_json(report.config)},
          {"rows", rows},
          {"cells", cells},
          {"correlations", correlations}};
}

void emit(const ExperimentReport& report, const std::filesystem::path& out_dir,
          std::string_view timestamp) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "results.csv", results_csv(report));
  write_file(out_dir / "summary.json", summary_json(report, timestamp).dump(2) + "\n");
  if (!report.correlations.empty()) {
    std::ostringstream out;
    out << "axis_value,seed,domain,type1_mean,type2_mean,temporal_lag1\n";
    for (const CorrelationRow& c : report.correlations) {
      out << fmt(c.axis_value) << ',' << c.seed << ',' << c.domain << ',' << fmt(c.type1_mean)
          << ',' << fmt(c.type2_mean) << ',' << fmt(c.temporal_lag1) << '\n';
    }
    write_file(out_dir / "correlations.csv", out.str());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace chanpred
