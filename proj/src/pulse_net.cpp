// Copyright 2026 The nmrpulse Authors
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

#include "nmrpulse/pulse_net.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "nmrpulse/io.hpp"

namespace nmrpulse {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw NmrError("unknown activation '" + s + "'");
}

std::string to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "cosine"; }

LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "constant") return LrSchedule::Constant;
  if (s == "cosine") return LrSchedule::Cosine;
  throw NmrError("unknown lr_schedule '" + s + "'");
}

MlpModel::MlpModel(std::vector<int> layer_dims, std::vector<Activation> hidden_activations,
                   double dropout_rate, double l2_lambda, std::string dataset_format_version)
    : dims_(std::move(layer_dims)), acts_(std::move(hidden_activations)), dropout_(dropout_rate),
      l2_(l2_lambda), dataset_version_(std::move(dataset_format_version)) {
  if (dims_.size() < 2) throw NmrError("mlp: need at least input and output dimensions");
  if (dims_.front() != 8) throw NmrError("mlp: input dimension must be 8 (flattened 2x2 unitary)");
  for (int d : dims_)
    if (d < 1) throw NmrError("mlp: layer dimensions must be positive");
  if (acts_.size() != dims_.size() - 2)
    throw NmrError("mlp: need one activation per hidden layer");
  if (!(dropout_ >= 0.0 && dropout_ < 1.0)) throw NmrError("mlp: dropout rate must lie in [0, 1)");
  if (!(l2_ >= 0.0)) throw NmrError("mlp: l2_lambda must be non-negative");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(dims_[l + 1]) * (static_cast<std::size_t>(dims_[l]) + 1);
  }
  params_.assign(total, 0.0);
  out_scale_.assign(static_cast<std::size_t>(dims_.back()), 1.0);
  out_offset_.assign(static_cast<std::size_t>(dims_.back()), 0.0);
}

MlpModel MlpModel::default_architecture(int output_dim) {
  return MlpModel({8, 256, 512, 512, 256, output_dim},
                  {Activation::Tanh, Activation::Relu, Activation::Relu, Activation::Relu}, 0.1,
                  1e-5);
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
  return offsets_[layer] +
         static_cast<std::size_t>(dims_[layer + 1]) * static_cast<std::size_t>(dims_[layer]);
}

Eigen::Map<const Eigen::MatrixXd> MlpModel::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], dims_[layer + 1], dims_[layer]};
}
Eigen::Map<Eigen::MatrixXd> MlpModel::weight(std::size_t layer) {
  return {params_.data() + offsets_[layer], dims_[layer + 1], dims_[layer]};
}
Eigen::Map<const Eigen::VectorXd> MlpModel::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}
Eigen::Map<Eigen::VectorXd> MlpModel::bias(std::size_t layer) {
  return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

void MlpModel::initialize(std::uint64_t seed) {
  Rng rng = make_stream(seed, 0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double fan_in = dims_[l];
    const double fan_out = dims_[l + 1];
    const bool relu = l < acts_.size() && acts_[l] == Activation::Relu;
    const double sd = relu ? std::sqrt(2.0 / fan_in) : std::sqrt(2.0 / (fan_in + fan_out));
    auto w = weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = sd * normal(rng);
    bias(l).setZero();
  }
}

std::string MlpModel::describe() const {
  std::string s = std::to_string(dims_.front());
  for (std::size_t l = 1; l < dims_.size(); ++l) {
    s += "-" + std::to_string(dims_[l]);
    if (l - 1 < acts_.size()) s += acts_[l - 1] == Activation::Relu ? "r" : "t";
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, " dropout=%g l2=%g", dropout_, l2_);
  return s + buf;
}

DropoutMasks sample_dropout_masks(const MlpModel& model, Eigen::Index batch, Rng& rng) {
  DropoutMasks masks;
  const double p = model.dropout_rate();
  const double keep = 1.0 / (1.0 - p);
  std::bernoulli_distribution drop(p);
  for (std::size_t l = 0; l + 1 < model.layer_count(); ++l) {
    Eigen::MatrixXd m(model.layer_dims()[l + 1], batch);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = (p > 0.0 && drop(rng)) ? 0.0 : keep;
    masks.push_back(std::move(m));
  }
  return masks;
}

DropoutMasks identity_masks(const MlpModel& model, Eigen::Index batch) {
  DropoutMasks masks;
  for (std::size_t l = 0; l + 1 < model.layer_count(); ++l)
    masks.push_back(Eigen::MatrixXd::Ones(model.layer_dims()[l + 1], batch));
  return masks;
}

namespace {

void activate(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::Relu)
    z = z.cwiseMax(0.0);
  else
    z = z.array().tanh().matrix();
}

void check_input(const MlpModel& model, Eigen::Index rows) {
  if (model.layer_count() == 0) throw NmrError("mlp: model is empty");
  if (rows != model.input_dim())
    throw NmrError("mlp: expected " + std::to_string(model.input_dim()) + " input features, got " +
                   std::to_string(rows));
}

Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs,
                              const DropoutMasks* masks) {
  check_input(model, inputs.rows());
  Eigen::MatrixXd a = inputs;
  const std::size_t layers = model.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = model.weight(l) * a;
    z.colwise() += model.bias(l);
    if (l + 1 < layers) {
      activate(model.activations()[l], z);
      if (masks) z.array() *= (*masks)[l].array();
    }
    a = std::move(z);
  }
  a.array().colwise() *= as_vec(model.output_scale()).array();
  a.colwise() += as_vec(model.output_offset());
  return a;
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& features,
                            ForwardMode mode, Rng* rng) {
  const Eigen::Map<const Eigen::MatrixXd> x(features.data(),
                                            static_cast<Eigen::Index>(features.size()), 1);
  check_input(model, x.rows());
  Eigen::MatrixXd out;
  if (mode == ForwardMode::Train && model.dropout_rate() > 0.0) {
    if (!rng) throw NmrError("mlp: train-mode forward needs an rng");
    const auto masks = sample_dropout_masks(model, 1, *rng);
    out = forward_batch(model, x, &masks);
  } else {
    out = forward_batch(model, x, nullptr);
  }
  return {out.data(), out.data() + out.size()};
}

LossAndGradient backprop_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                                   const Eigen::MatrixXd& targets, const DropoutMasks& masks) {
  check_input(model, inputs.rows());
  const std::size_t layers = model.layer_count();
  const Eigen::Index batch = inputs.cols();
  if (targets.rows() != model.output_dim() || targets.cols() != batch)
    throw NmrError("mlp: target shape does not match the model output");
  if (masks.size() != layers - 1) throw NmrError("mlp: wrong number of dropout masks");

  // pre[l] = z_l, post[l] = a_l (post[0] = inputs)
  std::vector<Eigen::MatrixXd> pre(layers), post(layers + 1);
  post[0] = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    pre[l] = model.weight(l) * post[l];
    pre[l].colwise() += model.bias(l);
    if (l + 1 < layers) {
      Eigen::MatrixXd h = pre[l];
      activate(model.activations()[l], h);
      post[l + 1] = h.cwiseProduct(masks[l]);
    } else {
      post[l + 1] = pre[l];
    }
  }
  const auto scale = as_vec(model.output_scale());
  Eigen::MatrixXd pred = post[layers];
  pred.array().colwise() *= scale.array();
  pred.colwise() += as_vec(model.output_offset());

  LossAndGradient out;
  const double count = static_cast<double>(batch) * model.output_dim();
  const Eigen::MatrixXd err = pred - targets;
  out.mse = err.squaredNorm() / count;
  for (std::size_t l = 0; l < layers; ++l) out.l2 += model.l2_lambda() * model.weight(l).squaredNorm();
  out.loss = out.mse + out.l2;
  out.gradient.assign(model.params().size(), 0.0);

  Eigen::MatrixXd delta = (2.0 / count) * err;
  delta.array().colwise() *= scale.array();
  for (std::size_t ll = layers; ll >= 1; --ll) {
    const std::size_t l = ll - 1;
    Eigen::Map<Eigen::MatrixXd> dw(out.gradient.data() + model.weight_offset(l),
                                   model.layer_dims()[l + 1], model.layer_dims()[l]);
    Eigen::Map<Eigen::VectorXd> db(out.gradient.data() + model.bias_offset(l),
                                   model.layer_dims()[l + 1]);
    dw.noalias() = delta * post[l].transpose();
    dw += (2.0 * model.l2_lambda()) * model.weight(l);
    db = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = model.weight(l).transpose() * delta;
    const Eigen::MatrixXd& z = pre[l - 1];
    if (model.activations()[l - 1] == Activation::Relu)
      back.array() *= (z.array() > 0.0).cast<double>();
    else
      back.array() *= 1.0 - z.array().tanh().square();
    delta = back.cwiseProduct(masks[l - 1]);
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw NmrError("train: epochs must be non-negative");
  if (batch_size < 1) throw NmrError("train: batch_size must be positive");
  if (!(lr > 0.0)) throw NmrError("train: lr must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw NmrError("train: train_fraction must lie in (0, 1)");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw NmrError("train: dropout_rate must lie in [0, 1)");
  if (!(l2_lambda >= 0.0)) throw NmrError("train: l2_lambda must be non-negative");
  if (hidden.empty()) throw NmrError("train: need at least one hidden layer");
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_matrices(const PulseDataset& ds,
                                                        const std::vector<std::size_t>& idx) {
  const auto n_out = static_cast<Eigen::Index>(ds.steps());
  Eigen::MatrixXd x(8, static_cast<Eigen::Index>(idx.size()));
  Eigen::MatrixXd y(n_out, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto& s = ds.samples[idx[c]];
    const auto col = static_cast<Eigen::Index>(c);
    x.col(col) = Eigen::Map<const Eigen::VectorXd>(s.features.data(), 8);
    y.col(col) = Eigen::Map<const Eigen::VectorXd>(s.phases.data(), n_out);
  }
  return {std::move(x), std::move(y)};
}

double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets) {
  if (inputs.cols() == 0) return 0.0;
  constexpr Eigen::Index kChunk = 1024;
  double sum = 0.0;
  for (Eigen::Index c0 = 0; c0 < inputs.cols(); c0 += kChunk) {
    const Eigen::Index w = std::min(kChunk, inputs.cols() - c0);
    const Eigen::MatrixXd pred = forward_batch(model, inputs.middleCols(c0, w));
    sum += (pred - targets.middleCols(c0, w)).squaredNorm();
  }
  return sum / (static_cast<double>(inputs.cols()) * static_cast<double>(targets.rows()));
}

TrainResult train(const PulseDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.format_version != kDatasetFormatVersion)
    throw NmrError("train: dataset format '" + dataset.format_version + "' is not '" +
                   kDatasetFormatVersion + "'");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t steps = dataset.steps();

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    if (s.phases.size() != steps || s.features.size() != 8)
      throw NmrError("train: sample " + std::to_string(i) + " has inconsistent lengths");
    if (s.fidelity >= config.fidelity_floor) usable.push_back(i);
  }
  if (usable.size() < 100)
    throw NmrError("train: only " + std::to_string(usable.size()) +
                   " samples pass the fidelity floor; need at least 100");

  Rng split_rng = make_stream(config.seed, 0);
  std::shuffle(usable.begin(), usable.end(), split_rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.train_fraction * usable.size())), 1,
      usable.size() - 1);

  TrainReport report;
  report.samples_total = dataset.samples.size();
  report.samples_used = usable.size();
  report.train_indices.assign(usable.begin(), usable.begin() + static_cast<long>(n_train));
  report.test_indices.assign(usable.begin() + static_cast<long>(n_train), usable.end());
  report.train_count = report.train_indices.size();
  report.test_count = report.test_indices.size();

  const auto [x_train, y_train] = to_matrices(dataset, report.train_indices);
  const auto [x_test, y_test] = to_matrices(dataset, report.test_indices);

  std::vector<int> dims{8};
  std::vector<Activation> acts;
  for (std::size_t h = 0; h < config.hidden.size(); ++h) {
    dims.push_back(config.hidden[h]);
    acts.push_back(h == 0 ? Activation::Tanh : Activation::Relu);
  }
  dims.push_back(static_cast<int>(steps));
  MlpModel model(dims, acts, config.dropout_rate, config.l2_lambda, dataset.format_version);
  model.initialize(config.seed);
  // fixed output affine map from the training-target statistics
  const Eigen::VectorXd mean = y_train.rowwise().mean();
  const Eigen::VectorXd sd =
      ((y_train.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  for (std::size_t k = 0; k < steps; ++k) {
    model.output_offset()[k] = mean(static_cast<Eigen::Index>(k));
    model.output_scale()[k] = std::max(sd(static_cast<Eigen::Index>(k)), 1e-6);
  }
  report.architecture = model.describe();
  report.initial_train_mse = mean_squared_error(model, x_train, y_train);

  AdamParams hp;
  hp.lr = config.lr;
  AdamState adam(model.params().size());
  Rng mask_rng = make_stream(config.seed, 1);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = make_stream(config.seed, 2 + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), epoch_rng);
    if (config.lr_schedule == LrSchedule::Cosine)
      hp.lr = config.lr * (0.01 + 0.99 * 0.5 * (1.0 + std::cos(kPi * epoch / config.epochs)));
    for (std::size_t b0 = 0; b0 < n_train; b0 += bs) {
      const std::size_t w = std::min(bs, n_train - b0);
      Eigen::MatrixXd xb(8, static_cast<Eigen::Index>(w));
      Eigen::MatrixXd yb(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(w));
      for (std::size_t c = 0; c < w; ++c) {
        xb.col(static_cast<Eigen::Index>(c)) = x_train.col(static_cast<Eigen::Index>(order[b0 + c]));
        yb.col(static_cast<Eigen::Index>(c)) = y_train.col(static_cast<Eigen::Index>(order[b0 + c]));
      }
      const auto masks = sample_dropout_masks(model, static_cast<Eigen::Index>(w), mask_rng);
      const auto lg = backprop_gradients(model, xb, yb, masks);
      if (!std::isfinite(lg.loss))
        throw TrainingFailed("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch offset " + std::to_string(b0));
      adam_update(adam, lg.gradient, model.params(), hp, AdamDirection::Descend);
    }
    report.train_mse.push_back(mean_squared_error(model, x_train, y_train));
    report.validation_mse.push_back(mean_squared_error(model, x_test, y_test));
    if (!std::isfinite(report.train_mse.back()) || !std::isfinite(report.validation_mse.back()))
      throw TrainingFailed("train: non-finite mse after epoch " + std::to_string(epoch));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.time_limit_s > 0.0 && elapsed > config.time_limit_s) break;
  }
  report.final_test_mse = mean_squared_error(model, x_test, y_test);
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.model_hash = model_hash(model);
  return {std::move(model), std::move(report)};
}

// --- inference --------------------------------------------------------------

ComplexMatrix to_special_unitary(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw NmrError("to_special_unitary: expected 2x2");
  const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  return u / std::sqrt(det);
}

PulseSequence predict_pulse(const MlpModel& model, const ComplexMatrix& gate, double amplitude_hz,
                            double dt_s) {
  PulseSequence p;
  p.amplitude_hz = amplitude_hz;
  p.dt_s = dt_s;
  p.phases_rad = forward(model, flatten_unitary(to_special_unitary(gate)), ForwardMode::Infer);
  return p;
}

double Evaluation::fraction_above(double threshold) const {
  if (fidelities.empty()) return 0.0;
  const auto n = std::count_if(fidelities.begin(), fidelities.end(),
                               [&](double f) { return f > threshold; });
  return static_cast<double>(n) / static_cast<double>(fidelities.size());
}

namespace {

void evaluate_one(const MlpModel& model, const SpinSystem& sys, const PulseTiming& timing,
                  const ComplexMatrix& gate, double& fid, double& latency) {
  const auto features = flatten_unitary(to_special_unitary(gate));
  const auto t0 = std::chrono::steady_clock::now();
  auto phases = forward(model, features, ForwardMode::Infer);
  latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const PulseSequence pulse{timing.amplitude_hz, timing.dt_s, std::move(phases)};
  fid = fidelity(embed_single(gate, 1, sys.n()), total_propagator(pulse, sys));
}

void summarize(Evaluation& ev) {
  const double n = static_cast<double>(ev.fidelities.size());
  if (n == 0) return;
  ev.mean = std::accumulate(ev.fidelities.begin(), ev.fidelities.end(), 0.0) / n;
  double var = 0.0;
  for (double f : ev.fidelities) var += (f - ev.mean) * (f - ev.mean);
  ev.std = std::sqrt(var / n);
  ev.mean_latency_s = std::accumulate(ev.latency_s.begin(), ev.latency_s.end(), 0.0) / n;
  ev.histogram = make_histogram(ev.fidelities, 0.0, 1.0, 50);
}

void check_timing(const MlpModel& model, const PulseTiming& timing) {
  if (model.layer_count() == 0) throw NmrError("evaluate: empty model");
  if (!(timing.dt_s > 0.0) || timing.amplitude_hz < 0.0)
    throw NmrError("evaluate: invalid pulse timing");
}

}  // namespace

Evaluation evaluate_model(const MlpModel& model, const SpinSystem& sys, const PulseTiming& timing,
                          const std::vector<ComplexMatrix>& gates, int workers) {
  check_timing(model, timing);
  Evaluation ev;
  ev.fidelities.assign(gates.size(), 0.0);
  ev.latency_s.assign(gates.size(), 0.0);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(gates.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    evaluate_one(model, sys, timing, gates[k], ev.fidelities[k], ev.latency_s[k]);
  }
  summarize(ev);
  return ev;
}

Evaluation evaluate_model_serial(const MlpModel& model, const SpinSystem& sys,
                                 const PulseTiming& timing,
                                 const std::vector<ComplexMatrix>& gates) {
  check_timing(model, timing);
  Evaluation ev;
  ev.fidelities.assign(gates.size(), 0.0);
  ev.latency_s.assign(gates.size(), 0.0);
  for (std::size_t k = 0; k < gates.size(); ++k)
    evaluate_one(model, sys, timing, gates[k], ev.fidelities[k], ev.latency_s[k]);
  summarize(ev);
  return ev;
}

std::string to_string(GateFamily f) {
  switch (f) {
    case GateFamily::Ux: return "Ux";
    case GateFamily::Uy: return "Uy";
    case GateFamily::Uz: return "Uz";
  }
  return "?";
}

GateFamily gate_family_from_string(const std::string& s) {
  if (s == "Ux" || s == "x") return GateFamily::Ux;
  if (s == "Uy" || s == "y") return GateFamily::Uy;
  if (s == "Uz" || s == "z") return GateFamily::Uz;
  throw NmrError("unknown gate family '" + s + "'");
}

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

ComplexMatrix family_gate(GateFamily family, double theta) {
  const Axis axis = family == GateFamily::Ux ? Axis::X : family == GateFamily::Uy ? Axis::Y : Axis::Z;
  return hadamard() * expm_hermitian(pauli(axis), theta);
}

ComplexMatrix theta_alpha_gate(double theta, double alpha) {
  const ComplexMatrix gen = std::cos(alpha) * pauli(Axis::X) + std::sin(alpha) * pauli(Axis::Y);
  return expm_hermitian(gen, theta);
}

std::vector<double> open_grid(double span, int divisions) {
  if (divisions < 2) throw NmrError("open_grid: need at least 2 divisions");
  std::vector<double> g;
  for (int k = 1; k < divisions; ++k) g.push_back(span * k / divisions);
  return g;
}

ThetaCurve sweep_theta(const MlpModel& model, const SpinSystem& sys, const PulseTiming& timing,
                       GateFamily family, const std::vector<double>& theta_grid) {
  std::vector<ComplexMatrix> gates;
  for (double t : theta_grid) gates.push_back(family_gate(family, t));
  const auto ev = evaluate_model(model, sys, timing, gates);
  return {family, theta_grid, ev.fidelities};
}

ThetaAlphaSurface sweep_theta_alpha(const MlpModel& model, const SpinSystem& sys,
                                    const PulseTiming& timing,
                                    const std::vector<double>& theta_grid,
                                    const std::vector<double>& alpha_grid) {
  std::vector<ComplexMatrix> gates;
  for (double t : theta_grid)
    for (double a : alpha_grid) gates.push_back(theta_alpha_gate(t, a));
  const auto ev = evaluate_model(model, sys, timing, gates);
  return {theta_grid, alpha_grid, ev.fidelities, ev.mean, ev.std};
}

}  // namespace nmrpulse
