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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/linalg.hpp"
#include "nmrpulse/sampler.hpp"

namespace nmrpulse {

enum class Activation { Relu, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

enum class ForwardMode { Train, Infer };

inline constexpr const char* kModelFormatVersion = "pulse-mlp/1";

/// Fully connected regressor. Parameters live in one flat vector, laid out
/// per layer as W (out x in, column-major) followed by b (out).
/// A fixed per-output affine map y = scale * z + offset follows the last
/// layer; train() fits it to the target statistics and never updates it.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<int> layer_dims, std::vector<Activation> hidden_activations,
           double dropout_rate, double l2_lambda,
           std::string dataset_format_version = kDatasetFormatVersion);

  /// 8 -> 256 -> 512 -> 512 -> 256 -> N, tanh first, ReLU after, dropout 0.1, l2 1e-5.
  static MlpModel default_architecture(int output_dim);

  /// He initialization for ReLU layers, Glorot for tanh and the output layer.
  void initialize(std::uint64_t seed);

  const std::vector<int>& layer_dims() const { return dims_; }
  const std::vector<Activation>& activations() const { return acts_; }
  std::size_t layer_count() const { return dims_.size() - 1; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  double dropout_rate() const { return dropout_; }
  double l2_lambda() const { return l2_; }
  void set_l2_lambda(double l2) { l2_ = l2; }
  const std::string& dataset_format_version() const { return dataset_version_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& output_scale() { return out_scale_; }
  const std::vector<double>& output_scale() const { return out_scale_; }
  std::vector<double>& output_offset() { return out_offset_; }
  const std::vector<double>& output_offset() const { return out_offset_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const;
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  /// Short description such as "8-256t-512r-512r-256r-100 dropout=0.1 l2=1e-05".
  std::string describe() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::vector<int> dims_;
  std::vector<Activation> acts_;
  double dropout_ = 0.0;
  double l2_ = 0.0;
  std::string dataset_version_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
  std::vector<double> out_scale_;
  std::vector<double> out_offset_;
};

/// Inverted-dropout keep masks, one (dim x batch) matrix per hidden layer,
/// entries 0 or 1/(1-p).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

DropoutMasks sample_dropout_masks(const MlpModel& model, Eigen::Index batch, Rng& rng);
/// All-ones masks (no dropout).
DropoutMasks identity_masks(const MlpModel& model, Eigen::Index batch);

/// Column-wise batch forward; `inputs` is input_dim x B.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs,
                              const DropoutMasks* masks = nullptr);

/// Single-sample forward. Train mode needs an rng for the dropout masks.
std::vector<double> forward(const MlpModel& model, const std::vector<double>& features,
                            ForwardMode mode = ForwardMode::Infer, Rng* rng = nullptr);

struct LossAndGradient {
  double mse = 0.0;
  double l2 = 0.0;
  double loss = 0.0;  // mse + l2
  std::vector<double> gradient;
};

/// Exact gradient of mean((y_hat - y)^2) + l2_lambda * sum(W^2) with the
/// given masks held fixed. inputs: input_dim x B, targets: output_dim x B.
LossAndGradient backprop_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                                   const Eigen::MatrixXd& targets, const DropoutMasks& masks);

enum class LrSchedule { Constant, Cosine };
std::string to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double lr = 1e-3;
  LrSchedule lr_schedule = LrSchedule::Constant;
  double dropout_rate = 0.1;
  double l2_lambda = 1e-5;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  double fidelity_floor = 0.99;
  /// Hidden layer widths; the first uses tanh, the rest ReLU.
  std::vector<int> hidden = {256, 512, 512, 256};
  /// Stop when this many seconds have elapsed (0 = no limit).
  double time_limit_s = 0.0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainReport {
  std::string architecture;
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
  double final_test_mse = 0.0;
  double initial_train_mse = 0.0;
  double wall_time_s = 0.0;
  std::string model_hash;
  std::size_t samples_total = 0;
  std::size_t samples_used = 0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  /// Dataset indices of the held-out samples.
  std::vector<std::size_t> test_indices;
  std::vector<std::size_t> train_indices;
};

/// Raised when training diverges (non-finite loss).
class TrainingFailed : public NmrError {
 public:
  using NmrError::NmrError;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Fits an MLP from gate features to GRAPE phases.
TrainResult train(const PulseDataset& dataset, const TrainConfig& config);

/// Stacks features/phases of the given sample indices into column matrices.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_matrices(const PulseDataset& ds,
                                                        const std::vector<std::size_t>& idx);
double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets);

// --- inference and evaluation --------------------------------------------

/// Removes the global phase so that det = 1 (principal square root); the
/// network only sees SU(2) inputs.
ComplexMatrix to_special_unitary(const ComplexMatrix& u);

/// Pulse predicted for the 2x2 gate on qubit 1.
PulseSequence predict_pulse(const MlpModel& model, const ComplexMatrix& gate, double amplitude_hz,
                            double dt_s);

struct PulseTiming {
  double amplitude_hz = 0.0;
  double dt_s = 0.0;
};

struct Evaluation {
  std::vector<double> fidelities;
  std::vector<double> latency_s;
  double mean = 0.0;
  double std = 0.0;
  double mean_latency_s = 0.0;
  Histogram histogram;

  double fraction_above(double threshold) const;
};

/// Fidelity of the network pulse against U (x) I (x) ... for every gate.
/// Latency covers the forward pass only.
Evaluation evaluate_model(const MlpModel& model, const SpinSystem& sys, const PulseTiming& timing,
                          const std::vector<ComplexMatrix>& gates, int workers = 0);
/// Single-threaded reference.
Evaluation evaluate_model_serial(const MlpModel& model, const SpinSystem& sys,
                                 const PulseTiming& timing,
                                 const std::vector<ComplexMatrix>& gates);

enum class GateFamily { Ux, Uy, Uz };
std::string to_string(GateFamily f);
GateFamily gate_family_from_string(const std::string& s);

ComplexMatrix hadamard();
/// H exp(-i theta sigma_axis).
ComplexMatrix family_gate(GateFamily family, double theta);
/// exp(-i theta (cos(alpha) sigma_x + sin(alpha) sigma_y)).
ComplexMatrix theta_alpha_gate(double theta, double alpha);

/// k * span / divisions for k = 1 .. divisions-1, i.e. the open interval (0, span).
std::vector<double> open_grid(double span, int divisions);

struct ThetaCurve {
  GateFamily family = GateFamily::Ux;
  std::vector<double> theta;
  std::vector<double> fidelity;
};

ThetaCurve sweep_theta(const MlpModel& model, const SpinSystem& sys, const PulseTiming& timing,
                       GateFamily family, const std::vector<double>& theta_grid);

struct ThetaAlphaSurface {
  std::vector<double> theta;
  std::vector<double> alpha;
  /// fidelity[i * alpha.size() + j] = F(theta_i, alpha_j)
  std::vector<double> fidelity;
  double mean = 0.0;
  double std = 0.0;

  double at(std::size_t i, std::size_t j) const { return fidelity[i * alpha.size() + j]; }
};

ThetaAlphaSurface sweep_theta_alpha(const MlpModel& model, const SpinSystem& sys,
                                    const PulseTiming& timing,
                                    const std::vector<double>& theta_grid,
                                    const std::vector<double>& alpha_grid);

}  // namespace nmrpulse
