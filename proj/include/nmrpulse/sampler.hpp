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
#include <random>
#include <vector>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/linalg.hpp"

namespace nmrpulse {

/// Rotation about n(theta, phi) by gamma: theta in [0, pi], phi and gamma in [0, 2 pi).
struct AxisAngle {
  double theta = 0.0;
  double phi = 0.0;
  double gamma = 0.0;

  Eigen::Vector3d axis() const;
};

using Rng = std::mt19937_64;

/// Independent stream for (seed, index). Parallel and serial consumers that
/// derive per-item generators this way see identical draws.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// theta = arccos(1 - 2r), r ~ U(0,1); phi, gamma ~ U(0, 2 pi).
AxisAngle sample_axis_angle(Rng& rng);
AxisAngle axis_angle_from_uniforms(double u_phi, double r, double u_gamma);

/// cos(gamma/2) I - i sin(gamma/2) (n . sigma), an SU(2) element.
ComplexMatrix axis_angle_unitary(const AxisAngle& aa);

/// Bumped whenever the feature layout changes.
inline constexpr const char* kDatasetFormatVersion = "pulse-dataset/1";

/// [Re U11, Re U12, Re U21, Re U22, Im U11, Im U12, Im U21, Im U22].
std::vector<double> flatten_unitary(const ComplexMatrix& u);
ComplexMatrix unflatten_unitary(const std::vector<double>& features);

struct PulseSample {
  std::vector<double> features;
  std::vector<double> phases;
  double fidelity = 0.0;
  bool converged = false;
  int iterations = 0;

  friend bool operator==(const PulseSample&, const PulseSample&) = default;
};

struct PulseDataset {
  std::string format_version = kDatasetFormatVersion;
  SpinSystem system = SpinSystem::trivial(1);
  GrapeConfig grape_config;
  std::uint64_t seed = 0;
  bool random_start = false;
  std::vector<PulseSample> samples;

  std::size_t steps() const { return static_cast<std::size_t>(grape_config.steps); }
};

struct DatasetOptions {
  /// Draw initial phases i.i.d. U(0, 2 pi) per sample instead of the common start.
  bool random_start = false;
  /// Worker threads; 0 = OpenMP default.
  int workers = 0;
  /// Fixed gate for every sample (e.g. the single-gate random-start study).
  std::optional<ComplexMatrix> fixed_gate;
};

/// GRAPE-optimized pulses for `count` uniformly sampled qubit-1 gates.
/// Sample i depends only on (seed, i), so the result is independent of the
/// worker count. Non-converged samples are kept and flagged.
PulseDataset generate_dataset(int count, const SpinSystem& sys, const GrapeConfig& config,
                              std::uint64_t seed, const DatasetOptions& options = {});
/// Single-threaded reference of generate_dataset.
PulseDataset generate_dataset_serial(int count, const SpinSystem& sys, const GrapeConfig& config,
                                     std::uint64_t seed, const DatasetOptions& options = {});
/// Computes one sample; exposed so callers can resume partially built datasets.
PulseSample generate_sample(std::size_t index, const SpinSystem& sys, const GrapeConfig& config,
                            std::uint64_t seed, const DatasetOptions& options);

/// Row-major M x M matrix of cosine similarities.
struct SimilarityMatrix {
  std::size_t size = 0;
  std::vector<double> c;

  double operator()(std::size_t i, std::size_t j) const { return c[i * size + j]; }
};

SimilarityMatrix cosine_similarity_matrix(const std::vector<std::vector<double>>& phases);
SimilarityMatrix cosine_similarity_matrix(const PulseDataset& dataset);
/// Single-threaded reference.
SimilarityMatrix cosine_similarity_matrix_serial(const std::vector<std::vector<double>>& phases);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_center(std::size_t b) const { return lo + (static_cast<double>(b) + 0.5) * bin_width(); }
};

/// Fixed-bin histogram; values outside [lo, hi] are clamped into the end bins.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);

struct SimilaritySummary {
  double mean_offdiag = 0.0;
  double min = 0.0;
  Histogram histogram;
};

SimilaritySummary similarity_summary(const SimilarityMatrix& m, std::size_t bins = 40);

}  // namespace nmrpulse
