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

// chanpred command-line front end. Every subcommand starts from the JSON
// config (or built-in defaults) and applies flag overrides on top.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanpred/channel_model.hpp"
#include "chanpred/estimation.hpp"
#include "chanpred/metrics.hpp"
#include "chanpred/predictors.hpp"
#include "chanpred/runner.hpp"
#include "chanpred/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace chanpred;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "chanpred-out";
  std::vector<std::string> predictors;
  std::string axis;
  std::vector<double> values;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> num_seeds;
  std::optional<std::size_t> slots;
  std::string model_dir = "chanpred-models";
  std::string trajectory;
  std::vector<double> betas;
  std::vector<double> gammas;
  std::size_t max_lag = 5;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig::defaults() : load_config(o.config_path);
  if (!o.predictors.empty()) {
    c.predictors.clear();
    for (const auto& name : o.predictors) c.predictors.push_back(PredictorKind::parse(name));
  }
  if (!o.axis.empty()) c.axis = parse_axis(o.axis);
  if (!o.values.empty()) c.values = o.values;
  if (o.seed) c.master_seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.num_seeds) c.num_seeds = *o.num_seeds;
  c.validate();
  return c;
}

// Single-realisation subcommands use replicate 0 of the master seed, so their
// output matches the first replicate of a sweep with the same config.
std::uint64_t cycle_seed(const ExperimentConfig& c) { return replicate_seed(c.master_seed, 0); }

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Master seed (overrides the config)");
  app->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

int cmd_generate(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const std::uint64_t seed = cycle_seed(c);
  const std::size_t slots = o.slots.value_or(cycle_layout(c).total_slots);
  ScenarioConfig scenario = c.scenario;
  scenario.seed = seed;
  const ChannelTrajectory truth = generate_trajectory(scenario, c.geometry, slots);
  const ChannelTrajectory estimated =
      estimate_trajectory(truth, c.pilot, c.geometry, derive_seed(seed, Stream::kNoise));
  fs::create_directories(o.out_dir);
  save_trajectory(truth, fs::path(o.out_dir) / "true.ctraj");
  save_trajectory(estimated, fs::path(o.out_dir) / "estimated.ctraj");
  const Nmse est_error = nmse(estimated.slots, truth.slots);
  std::printf("wrote %zu slots of %ldx%ld channels to %s (estimation NMSE %.2f dB)\n", truth.size(),
              static_cast<long>(truth.rows()), static_cast<long>(truth.cols()), o.out_dir.c_str(),
              est_error.db);
  return 0;
}

void write_magnitudes(const fs::path& path, const CMatrix& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index col = 0; col < values.cols(); ++col) {
      out << (col ? "," : "") << std::abs(values(r, col));
    }
    out << '\n';
  }
}

int cmd_correlate(const Options& o) {
  const ExperimentConfig c = resolve(o);
  ChannelTrajectory traj;
  if (!o.trajectory.empty()) {
    traj = load_trajectory(o.trajectory);
  } else {
    ScenarioConfig scenario = c.scenario;
    scenario.seed = cycle_seed(c);
    traj = generate_trajectory(scenario, c.geometry, o.slots.value_or(c.correlation_window));
  }
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  std::ofstream temporal(dir / "temporal.csv");
  temporal << "domain,lag,abs,re,im\n";
  std::printf("%-10s %12s %12s %12s\n", "domain", "|type-I|", "|type-II|", "|R(1)|");
  for (Domain d : {Domain::kArray, Domain::kFrequency}) {
    const std::string tag(to_string(d));
    const auto t1 = type1_matrix(traj, d);
    const auto t2 = type2_averaged(traj, d);
    const auto tr = temporal_averaged(traj, d, std::min(o.max_lag, traj.size() - 1));
    write_magnitudes(dir / ("type1_" + tag + ".csv"), t1.values);
    write_magnitudes(dir / ("type2_" + tag + ".csv"), t2.values);
    for (Eigen::Index k = 0; k < tr.values.rows(); ++k) {
      const Complex v = tr.values(k, 0);
      temporal << tag << ',' << k << ',' << std::abs(v) << ',' << v.real() << ',' << v.imag() << '\n';
    }
    std::printf("%-10s %12.4f %12.4f %12.4f\n", tag.c_str(), mean_offdiagonal_magnitude(t1.values),
                mean_offdiagonal_magnitude(t2.values),
                tr.values.rows() > 1 ? std::abs(tr.values(1, 0)) : 1.0);
  }
  return 0;
}

int cmd_train(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const std::uint64_t seed = cycle_seed(c);
  const CycleChannels channels = realise_cycle(c, seed);
  const ChannelTrajectory training = channels.estimated.window(0, c.collection_slots);
  for (const PredictorKind& kind : c.predictors) {
    const TrainedPredictor p = train_predictor(kind, training, c.input_order, c.prediction_order,
                                               cycle_train_config(c, seed), c.jobs);
    const fs::path dir = fs::path(o.model_dir) / kind.name();
    save_predictor(p, dir);
    std::printf("%-11s %5zu networks  T_com %.3f s  -> %s\n", kind.name().c_str(), p.models.size(),
                p.timing.serial_seconds, dir.string().c_str());
  }
  return 0;
}

int cmd_predict(const Options& o) {
  ExperimentConfig c = resolve(o);
  std::vector<fs::path> bundles;
  if (fs::exists(fs::path(o.model_dir) / "predictor.json")) {
    bundles.emplace_back(o.model_dir);
  } else {
    for (const auto& entry : fs::directory_iterator(o.model_dir)) {
      if (fs::exists(entry.path() / "predictor.json")) bundles.push_back(entry.path());
    }
    std::sort(bundles.begin(), bundles.end());
  }
  if (bundles.empty()) throw std::runtime_error("no predictor bundles under " + o.model_dir);

  const std::uint64_t seed = cycle_seed(c);
  std::cout << kResultsCsvHeader << '\n';
  for (const fs::path& dir : bundles) {
    const TrainedPredictor p = load_predictor(dir);
    c.input_order = p.input_order;
    c.prediction_order = p.prediction_order;
    const CycleLayout layout = cycle_layout(c);
    const CycleChannels channels = realise_cycle(c, seed);
    const Nmse e = nmse(predict_eval_targets(p, channels.estimated, layout),
                        eval_truth(channels.truth, layout));
    const OverheadReport oh =
        overhead(c.scenario.slot_duration_s, c.collection_slots, p.timing.serial_seconds, 0.0);
    std::printf("%s,none,0,%llu,%.17g,%.17g,%.17g,%.17g,\n", p.kind.name().c_str(),
                static_cast<unsigned long long>(seed), e.linear, e.db, oh.t_col_s, oh.t_com_s);
  }
  return 0;
}

void print_cells(const ExperimentReport& report) {
  const auto summary = summary_json(report, "");
  std::printf("%-11s %12s %6s %12s %12s %12s\n", "predictor", to_string(report.config.axis).data(),
              "seeds", "median dB", "min dB", "max dB");
  for (const auto& cell : summary.at("cells")) {
    std::printf("%-11s %12g %6zu %12.3f %12.3f %12.3f\n",
                cell.at("predictor").get<std::string>().c_str(), cell.at("axis_value").get<double>(),
                cell.at("seeds").get<std::size_t>(), cell.at("nmse_db_median").get<double>(),
                cell.at("nmse_db_min").get<double>(), cell.at("nmse_db_max").get<double>());
  }
}

int cmd_sweep(const Options& o) {
  const ExperimentReport report = sweep(resolve(o));
  emit(report, o.out_dir, utc_timestamp());
  print_cells(report);
  std::printf("results in %s\n", o.out_dir.c_str());
  return 0;
}

int cmd_rate(const Options& o) {
  Options local = o;
  if (!o.gammas.empty() && o.axis.empty()) {
    local.axis = "gamma";
    local.values = o.gammas;
  }
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig::defaults() : load_config(o.config_path);
  if (!c.rate) c.rate = RateSettings{};
  if (!o.betas.empty()) c.rate->betas = o.betas;
  if (c.geometry.ue_antennas != 1) {
    std::fprintf(stderr, "note: sum-rate evaluation uses single-antenna UEs; setting ue_antennas = 1\n");
    c.geometry.ue_antennas = 1;
  }
  // Re-resolve the flag overrides on top of the rate-enabled config.
  const fs::path tmp = fs::path(o.out_dir) / "resolved_config.json";
  fs::create_directories(o.out_dir);
  {
    std::ofstream out(tmp);
    out << to_json(c).dump(2) << '\n';
  }
  local.config_path = tmp.string();
  const ExperimentReport report = sweep(resolve(local));
  emit(report, o.out_dir, utc_timestamp());
  std::printf("%-11s %12s %20s\n", "predictor", to_string(report.config.axis).data(), "sum-rate (b/s/Hz)");
  for (const ReportRow& r : report.rows) {
    std::printf("%-11s %12g %20.4f\n", r.predictor.c_str(), r.axis_value, r.sum_rate.value_or(NAN));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel prediction experiments for massive MIMO-OFDM: aggregated vs separate learning"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Dump a true and an estimated channel trajectory");
  add_common(generate, o);
  generate->add_option("--slots", o.slots, "Number of slots (default: one full cycle)");
  generate->add_option("--out-dir", o.out_dir, "Output directory");

  auto* correlate = app.add_subcommand("correlate", "Type-I, Type-II and temporal correlation reports");
  add_common(correlate, o);
  correlate->add_option("--trajectory", o.trajectory, "Analyse a saved trajectory instead")
      ->check(CLI::ExistingFile);
  correlate->add_option("--slots", o.slots, "Slots to generate (default: correlation_window)");
  correlate->add_option("--max-lag", o.max_lag, "Largest temporal lag");
  correlate->add_option("--out-dir", o.out_dir, "Output directory");

  auto* train = app.add_subcommand("train", "Train predictors on one collection window and save them");
  add_common(train, o);
  train->add_option("--predictors", o.predictors, "AL-AD, AL-FD, SL-AD, SL-FD, SL-AD-FLIP, SL-FD-FLIP, OUT")
      ->delimiter(',');
  train->add_option("--model-dir", o.model_dir, "Directory receiving one bundle per predictor");

  auto* predict = app.add_subcommand("predict", "Evaluate saved predictors on the evaluation window");
  add_common(predict, o);
  predict->add_option("--model-dir", o.model_dir, "A bundle, or a directory of bundles")
      ->check(CLI::ExistingDirectory);

  for (auto* sub : {app.add_subcommand("sweep", "Full experiment over a sweep axis and seeds"),
                    app.add_subcommand("rate", "Achievable sum-rate with ZF combining")}) {
    add_common(sub, o);
    sub->add_option("--predictors", o.predictors, "Predictor names")->delimiter(',');
    sub->add_option("--axis", o.axis, "N, spacing, pilot_power, speed, p or gamma");
    sub->add_option("--values", o.values, "Sweep values")->delimiter(',');
    sub->add_option("--num-seeds", o.num_seeds, "Replicates per sweep value")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", o.out_dir, "Output directory");
  }
  auto* rate = app.get_subcommand("rate");
  rate->add_option("--gammas", o.gammas, "Transmit powers in dBm (sweeps the gamma axis)")->delimiter(',');
  rate->add_option("--betas", o.betas, "Overhead fractions beta")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*generate) return cmd_generate(o);
    if (*correlate) return cmd_correlate(o);
    if (*train) return cmd_train(o);
    if (*predict) return cmd_predict(o);
    if (app.got_subcommand("sweep")) return cmd_sweep(o);
    if (*rate) return cmd_rate(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "chanpred: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
