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

#include "chanpred/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "chanpred/estimation.hpp"

namespace chanpred {

// ---------------------------------------------------------------------------
// Correlations. Expectations are sample means over the trajectory's slots.
// ---------------------------------------------------------------------------

namespace {

// Slot n laid out as K1 x K2 with sub-channel i in column i.
CMatrix subchannel_block(const CMatrix& h, Domain domain) {
  return domain == Domain::kArray ? h : CMatrix(h.transpose());
}

void require_slots(const ChannelTrajectory& traj, std::size_t minimum, const char* what) {
  if (traj.size() < minimum) {
    throw std::invalid_argument(std::string(what) + ": trajectory needs at least " +
                                std::to_string(minimum) + " slots");
  }
}

// Per-slot blocks with the slot mean removed.
std::vector<CMatrix> centred_blocks(const ChannelTrajectory& traj, Domain domain) {
  std::vector<CMatrix> blocks;
  blocks.reserve(traj.size());
  for (const CMatrix& h : traj.slots) blocks.push_back(subchannel_block(h, domain));
  CMatrix mean = CMatrix::Zero(blocks.front().rows(), blocks.front().cols());
  for (const CMatrix& b : blocks) mean += b;
  mean /= static_cast<double>(blocks.size());
  for (CMatrix& b : blocks) b -= mean;
  return blocks;
}

Complex normalise(Complex cov, double var_a, double var_b, bool same) {
  if (same) return {1.0, 0.0};
  if (!(var_a > 0.0) || !(var_b > 0.0)) return {0.0, 0.0};
  return cov / (std::sqrt(var_a) * std::sqrt(var_b));
}

// Normalises a Hermitian covariance matrix into correlation coefficients.
CMatrix normalise_matrix(const CMatrix& cov) {
  CMatrix r(cov.rows(), cov.cols());
  for (Eigen::Index b = 0; b < cov.cols(); ++b) {
    for (Eigen::Index a = 0; a < cov.rows(); ++a) {
      r(a, b) = normalise(cov(a, b), cov(a, a).real(), cov(b, b).real(), a == b);
    }
  }
  return r;
}

void check_index(std::size_t index, std::size_t bound, const char* what) {
  if (index >= bound) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(index) +
                            " out of range [0, " + std::to_string(bound) + ")");
  }
}

}  // namespace

Complex type1_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t i2) {
  require_slots(traj, 2, "type1_corr");
  const SubchannelShape shape = subchannel_shape(domain, traj.rows(), traj.cols());
  check_index(i, shape.count, "type1_corr: sub-channel");
  check_index(i2, shape.count, "type1_corr: sub-channel");
  const auto blocks = centred_blocks(traj, domain);
  Complex cov{0.0, 0.0};
  double var_a = 0.0;
  double var_b = 0.0;
  for (const CMatrix& b : blocks) {
    const auto a = b.col(static_cast<Eigen::Index>(i));
    const auto c = b.col(static_cast<Eigen::Index>(i2));
    cov += a.dot(c);
    var_a += a.squaredNorm();
    var_b += c.squaredNorm();
  }
  return normalise(cov, var_a, var_b, i == i2);
}

CorrelationReport type1_matrix(const ChannelTrajectory& traj, Domain domain) {
  require_slots(traj, 2, "type1_matrix");
  const auto blocks = centred_blocks(traj, domain);
  const Eigen::Index k2 = blocks.front().cols();
  CMatrix cov = CMatrix::Zero(k2, k2);
  for (const CMatrix& b : blocks) cov.noalias() += b.adjoint() * b;
  cov /= static_cast<double>(blocks.size());
  return {domain, CorrelationKind::kTypeI, normalise_matrix(cov), traj.size(),
          static_cast<std::size_t>(blocks.front().rows())};
}

Complex type2_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t j,
                   std::size_t j2) {
  require_slots(traj, 2, "type2_corr");
  const SubchannelShape shape = subchannel_shape(domain, traj.rows(), traj.cols());
  check_index(i, shape.count, "type2_corr: sub-channel");
  check_index(j, shape.length, "type2_corr: element");
  check_index(j2, shape.length, "type2_corr: element");
  const auto blocks = centred_blocks(traj, domain);
  const auto col = static_cast<Eigen::Index>(i);
  Complex cov{0.0, 0.0};
  double var_a = 0.0;
  double var_b = 0.0;
  for (const CMatrix& b : blocks) {
    const Complex x = b(static_cast<Eigen::Index>(j), col);
    const Complex y = b(static_cast<Eigen::Index>(j2), col);
    cov += std::conj(x) * y;
    var_a += std::norm(x);
    var_b += std::norm(y);
  }
  return normalise(cov, var_a, var_b, j == j2);
}

CorrelationReport type2_averaged(const ChannelTrajectory& traj, Domain domain) {
  require_slots(traj, 2, "type2_averaged");
  const auto blocks = centred_blocks(traj, domain);
  const Eigen::Index k1 = blocks.front().rows();
  const Eigen::Index k2 = blocks.front().cols();
  const auto t = static_cast<Eigen::Index>(blocks.size());
  CMatrix sum = CMatrix::Zero(k1, k1);
  CMatrix samples(t, k1);
  for (Eigen::Index i = 0; i < k2; ++i) {
    for (Eigen::Index n = 0; n < t; ++n) {
      samples.row(n) = blocks[static_cast<std::size_t>(n)].col(i).transpose();
    }
    sum += normalise_matrix(samples.adjoint() * samples);
  }
  return {domain, CorrelationKind::kTypeII, sum / static_cast<double>(k2), traj.size(),
          static_cast<std::size_t>(k2)};
}

Complex temporal_corr(const ChannelTrajectory& traj, Domain domain, std::size_t i, std::size_t k) {
  if (k >= traj.size()) {
    throw std::invalid_argument("temporal_corr: lag " + std::to_string(k) +
                                " must be smaller than the trajectory length " +
                                std::to_string(traj.size()));
  }
  const SubchannelShape shape = subchannel_shape(domain, traj.rows(), traj.cols());
  check_index(i, shape.count, "temporal_corr: sub-channel");
  Complex sum{0.0, 0.0};
  std::size_t terms = 0;
  for (std::size_t n = 0; n + k < traj.size(); ++n) {
    const CVector a = extract_subchannel(traj.slots[n], domain, i);
    const CVector b = extract_subchannel(traj.slots[n + k], domain, i);
    double energy = 0.0;
    for (Eigen::Index e = 0; e < a.size(); ++e) energy += std::norm(a(e));
    if (!(energy > 0.0)) continue;
    Complex inner{0.0, 0.0};
    if (k == 0) {
      inner = energy;
    } else {
      for (Eigen::Index e = 0; e < a.size(); ++e) inner += std::conj(a(e)) * b(e);
    }
    sum += inner / energy;
    ++terms;
  }
  return terms == 0 ? Complex{0.0, 0.0} : sum / static_cast<double>(terms);
}

CorrelationReport temporal_averaged(const ChannelTrajectory& traj, Domain domain,
                                    std::size_t max_lag) {
  if (max_lag >= traj.size()) {
    throw std::invalid_argument("temporal_averaged: max_lag must be smaller than the trajectory");
  }
  const SubchannelShape shape = subchannel_shape(domain, traj.rows(), traj.cols());
  CMatrix values = CMatrix::Zero(static_cast<Eigen::Index>(max_lag + 1), 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < shape.count; ++i) sum += temporal_corr(traj, domain, i, k);
    values(static_cast<Eigen::Index>(k), 0) = sum / static_cast<double>(shape.count);
  }
  return {domain, CorrelationKind::kTemporal, values, traj.size(), shape.count};
}

double mean_offdiagonal_magnitude(const CMatrix& values) {
  if (values.rows() != values.cols()) {
    throw std::invalid_argument("mean_offdiagonal_magnitude: matrix must be square");
  }
  const Eigen::Index n = values.rows();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != b) sum += std::abs(values(a, b));
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

// ---------------------------------------------------------------------------
// NMSE
// ---------------------------------------------------------------------------

double nmse_to_db(double linear) {
  if (!(linear > 0.0)) return kNmseFloorDb;
  return std::max(10.0 * std::log10(linear), kNmseFloorDb);
}

Nmse nmse(std::span<const CMatrix> predicted, std::span<const CMatrix> truth) {
  if (predicted.empty()) throw std::invalid_argument("nmse: empty input");
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("nmse: " + std::to_string(predicted.size()) + " predictions vs " +
                                std::to_string(truth.size()) + " true channels");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    if (predicted[n].rows() != truth[n].rows() || predicted[n].cols() != truth[n].cols()) {
      throw std::invalid_argument("nmse: shape mismatch at slot " + std::to_string(n));
    }
    const double power = truth[n].squaredNorm();
    if (!(power > 0.0)) throw std::invalid_argument("nmse: true channel has zero power");
    sum += (truth[n] - predicted[n]).squaredNorm() / power;
  }
  const double linear = sum / static_cast<double>(truth.size());
  return {linear, nmse_to_db(linear)};
}

// ---------------------------------------------------------------------------
// Zero-forcing combining and achievable rate
// ---------------------------------------------------------------------------

CMatrix zf_combiner(const CMatrix& channel_columns) {
  const Eigen::Index m = channel_columns.rows();
  const Eigen::Index u = channel_columns.cols();
  if (u == 0 || u > m) {
    throw std::invalid_argument("zf_combiner: need 1 <= U <= M, got U=" + std::to_string(u) +
                                ", M=" + std::to_string(m));
  }
  Eigen::ColPivHouseholderQR<CMatrix> qr(channel_columns);
  if (qr.rank() < u) throw std::domain_error("zf_combiner: channel matrix is rank-deficient");
  const CMatrix gram = channel_columns.adjoint() * channel_columns;
  CMatrix combiner = gram.ldlt().solve(channel_columns.adjoint());
  for (Eigen::Index r = 0; r < u; ++r) combiner.row(r).normalize();
  return combiner;
}

std::vector<CMatrix> zf_combiners(std::span<const CMatrix> ue_channels) {
  if (ue_channels.empty()) throw std::invalid_argument("zf_combiners: no UE channels");
  const Eigen::Index m = ue_channels.front().rows();
  const Eigen::Index l = ue_channels.front().cols();
  for (const CMatrix& h : ue_channels) {
    if (h.rows() != m || h.cols() != l) {
      throw std::invalid_argument("zf_combiners: UE channels differ in shape");
    }
  }
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(l));
  CMatrix stacked(m, static_cast<Eigen::Index>(ue_channels.size()));
  for (Eigen::Index sc = 0; sc < l; ++sc) {
    for (std::size_t u = 0; u < ue_channels.size(); ++u) {
      stacked.col(static_cast<Eigen::Index>(u)) = ue_channels[u].col(sc);
    }
    out.push_back(zf_combiner(stacked));
  }
  return out;
}

double RateConfig::gamma_w() const { return dbm_to_watts(gamma_dbm); }

double RateConfig::alpha() const {
  return static_cast<double>(symbols_per_slot - pilot_symbols) /
         static_cast<double>(symbols_per_slot);
}

void RateConfig::validate() const {
  if (num_ues == 0) throw std::invalid_argument("RateConfig: num_ues must be >= 1");
  if (symbols_per_slot == 0 || pilot_symbols >= symbols_per_slot) {
    throw std::invalid_argument("RateConfig: need 0 <= pilot_symbols < symbols_per_slot");
  }
  if (!(sigma2_w > 0.0) || !std::isfinite(sigma2_w)) {
    throw std::invalid_argument("RateConfig: sigma2_w must be positive and finite");
  }
  if (!std::isfinite(gamma_dbm)) throw std::invalid_argument("RateConfig: gamma_dbm must be finite");
}

double ue_rate(std::span<const CMatrix> true_channels, std::span<const CMatrix> combiners,
               std::size_t ue, const RateConfig& config) {
  config.validate();
  const std::size_t users = true_channels.size();
  if (users == 0 || ue >= users) throw std::out_of_range("ue_rate: UE index out of range");
  const Eigen::Index m = true_channels.front().rows();
  const Eigen::Index l = true_channels.front().cols();
  for (const CMatrix& h : true_channels) {
    if (h.rows() != m || h.cols() != l) throw std::invalid_argument("ue_rate: UE channels differ in shape");
  }
  if (combiners.size() != static_cast<std::size_t>(l)) {
    throw std::invalid_argument("ue_rate: need one combiner per subcarrier");
  }
  const double gamma = config.gamma_w();
  const auto u = static_cast<Eigen::Index>(ue);
  double sum = 0.0;
  for (Eigen::Index sc = 0; sc < l; ++sc) {
    const CMatrix& f = combiners[static_cast<std::size_t>(sc)];
    if (f.rows() != static_cast<Eigen::Index>(users) || f.cols() != m) {
      throw std::invalid_argument("ue_rate: combiner must be U x M");
    }
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t v = 0; v < users; ++v) {
      const double gain = std::norm((f.row(u) * true_channels[v].col(sc)).value());
      (v == ue ? signal : interference) += gain;
    }
    sum += std::log2(1.0 + gamma * signal / (gamma * interference + config.sigma2_w));
  }
  return config.alpha() * sum / static_cast<double>(l);
}

RateResult achievable_sum_rate(std::span<const CMatrix> true_channels,
                               std::span<const CMatrix> training_combiners,
                               std::span<const CMatrix> prediction_combiners,
                               const RateConfig& config, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("achievable_sum_rate: beta must be in [0, 1]");
  RateResult out;
  for (std::size_t u = 0; u < true_channels.size(); ++u) {
    out.training.push_back(ue_rate(true_channels, training_combiners, u, config));
    out.prediction.push_back(ue_rate(true_channels, prediction_combiners, u, config));
    out.sum += beta * out.training.back() + (1.0 - beta) * out.prediction.back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overhead and complexity bookkeeping
// ---------------------------------------------------------------------------

OverheadReport overhead(double slot_duration_s, std::size_t slots, double t_com_s, double t_cyc_s) {
  if (!(slot_duration_s > 0.0)) throw std::invalid_argument("overhead: slot duration must be > 0");
  if (t_com_s < 0.0 || t_cyc_s < 0.0) throw std::invalid_argument("overhead: negative duration");
  OverheadReport r;
  r.slot_duration_s = slot_duration_s;
  r.slots = slots;
  r.t_col_s = slot_duration_s * static_cast<double>(slots);
  r.t_com_s = t_com_s;
  r.t_tot_s = r.t_col_s + t_com_s;
  r.t_cyc_s = t_cyc_s;
  // A zero cycle period means "not configured"; beta is then left at 0.
  if (t_cyc_s > 0.0) {
    if (r.t_tot_s > t_cyc_s) {
      throw std::invalid_argument("overhead: T_tot exceeds the cycle period T_cyc");
    }
    r.beta = r.t_tot_s / t_cyc_s;
  }
  return r;
}

double complexity_estimate(const MlpArch& arch, std::size_t epochs, std::size_t n_train) {
  if (arch.hidden_dims.size() != 2 || arch.hidden_dims[0] != arch.hidden_dims[1]) {
    throw std::invalid_argument("complexity_estimate: needs two equal hidden layers");
  }
  const double n_node = static_cast<double>(arch.hidden_dims[0]);
  // K1 (I + 1) for a one-step network: half the input plus output width.
  const double io = static_cast<double>(arch.input_dim + arch.output_dim) / 2.0;
  return static_cast<double>(epochs) * n_node * static_cast<double>(n_train) * (n_node + io);
}

double complexity_for(const PredictorKind& kind, std::size_t m, std::size_t l, std::size_t slots,
                      std::size_t input_order, std::size_t epochs) {
  kind.validate();
  if (kind.approach == Approach::kOutdated) return 0.0;
  if (slots <= input_order) throw std::invalid_argument("complexity_for: need N > I");
  const SubchannelShape shape = subchannel_shape(kind.domain, static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(l));
  const MlpArch arch = MlpArch::for_subchannel(shape.length, input_order, 1);
  std::size_t n_train = slots - input_order;
  if (kind.approach == Approach::kAggregated) n_train *= shape.count;
  if (kind.flip) n_train *= 2;
  return complexity_estimate(arch, epochs, n_train);
}

}  // namespace chanpred
