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

#include "nmrpulse/sampler.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace nmrpulse {

namespace {

// 53-bit uniform in [0, 1), identical across standard libraries.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Eigen::Vector3d AxisAngle::axis() const {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

AxisAngle axis_angle_from_uniforms(double u_phi, double r, double u_gamma) {
  return {std::acos(1.0 - 2.0 * r), kTwoPi * u_phi, kTwoPi * u_gamma};
}

AxisAngle sample_axis_angle(Rng& rng) {
  const double u_phi = uniform01(rng);
  const double r = uniform01(rng);
  const double u_gamma = uniform01(rng);
  return axis_angle_from_uniforms(u_phi, r, u_gamma);
}

ComplexMatrix axis_angle_unitary(const AxisAngle& aa) {
  const Eigen::Vector3d n = aa.axis();
  const double c = std::cos(0.5 * aa.gamma);
  const double s = std::sin(0.5 * aa.gamma);
  const Complex i{0.0, 1.0};
  ComplexMatrix u = c * identity(2) - i * s * (n.x() * pauli(Axis::X) + n.y() * pauli(Axis::Y) +
                                               n.z() * pauli(Axis::Z));
  return u;
}

std::vector<double> flatten_unitary(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw NmrError("flatten_unitary: expected a 2x2 matrix");
  return {u(0, 0).real(), u(0, 1).real(), u(1, 0).real(), u(1, 1).real(),
          u(0, 0).imag(), u(0, 1).imag(), u(1, 0).imag(), u(1, 1).imag()};
}

ComplexMatrix unflatten_unitary(const std::vector<double>& f) {
  if (f.size() != 8) throw NmrError("unflatten_unitary: expected 8 features");
  ComplexMatrix u(2, 2);
  u << Complex{f[0], f[4]}, Complex{f[1], f[5]}, Complex{f[2], f[6]}, Complex{f[3], f[7]};
  return u;
}

PulseSample generate_sample(std::size_t index, const SpinSystem& sys, const GrapeConfig& config,
                            std::uint64_t seed, const DatasetOptions& options) {
  Rng rng = make_stream(seed, index);
  const AxisAngle aa = sample_axis_angle(rng);
  const ComplexMatrix gate = options.fixed_gate ? *options.fixed_gate : axis_angle_unitary(aa);
  GrapeConfig cfg = config;
  if (options.random_start) {
    cfg.initial_phases.resize(static_cast<std::size_t>(cfg.steps));
    for (auto& p : cfg.initial_phases) p = kTwoPi * uniform01(rng);
  }
  const GrapeResult r = grape_optimize(sys, GateSpec{gate, 1}, cfg);
  PulseSample s;
  s.features = flatten_unitary(gate);
  s.phases = r.pulse.phases_rad;
  s.fidelity = r.final_fidelity;
  s.converged = r.converged;
  s.iterations = r.iterations_used;
  return s;
}

namespace {

PulseDataset dataset_header(int count, const SpinSystem& sys, const GrapeConfig& config,
                            std::uint64_t seed, const DatasetOptions& options) {
  if (count < 1) throw NmrError("generate_dataset: count must be >= 1");
  config.validate();
  PulseDataset ds;
  ds.system = sys;
  ds.grape_config = config;
  if (options.random_start) ds.grape_config.initial_phases.clear();
  ds.seed = seed;
  ds.random_start = options.random_start;
  ds.samples.resize(static_cast<std::size_t>(count));
  return ds;
}

}  // namespace

PulseDataset generate_dataset(int count, const SpinSystem& sys, const GrapeConfig& config,
                              std::uint64_t seed, const DatasetOptions& options) {
  PulseDataset ds = dataset_header(count, sys, config, seed, options);
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int i = 0; i < count; ++i)
    ds.samples[static_cast<std::size_t>(i)] =
        generate_sample(static_cast<std::size_t>(i), sys, config, seed, options);
  return ds;
}

PulseDataset generate_dataset_serial(int count, const SpinSystem& sys, const GrapeConfig& config,
                                     std::uint64_t seed, const DatasetOptions& options) {
  PulseDataset ds = dataset_header(count, sys, config, seed, options);
  for (int i = 0; i < count; ++i)
    ds.samples[static_cast<std::size_t>(i)] =
        generate_sample(static_cast<std::size_t>(i), sys, config, seed, options);
  return ds;
}

namespace {

std::vector<double> norms_of(const std::vector<std::vector<double>>& phases) {
  if (phases.size() < 2) throw NmrError("cosine similarity needs at least 2 samples");
  std::vector<double> norms(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].size() != phases[0].size())
      throw NmrError("cosine similarity: phase vectors differ in length");
    double s = 0.0;
    for (double v : phases[i]) s += v * v;
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) throw NmrError("cosine similarity: zero-norm phase vector");
  }
  return norms;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b, double na, double nb) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

}  // namespace

SimilarityMatrix cosine_similarity_matrix(const std::vector<std::vector<double>>& phases) {
  const auto norms = norms_of(phases);
  const std::size_t m = phases.size();
  SimilarityMatrix out{m, std::vector<double>(m * m, 0.0)};
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    out.c[i * m + i] = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = cosine(phases[i], phases[j], norms[i], norms[j]);
      out.c[i * m + j] = v;
      out.c[j * m + i] = v;
    }
  }
  return out;
}

SimilarityMatrix cosine_similarity_matrix_serial(const std::vector<std::vector<double>>& phases) {
  const auto norms = norms_of(phases);
  const std::size_t m = phases.size();
  SimilarityMatrix out{m, std::vector<double>(m * m, 0.0)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.c[i * m + j] = i == j ? 1.0 : cosine(phases[i], phases[j], norms[i], norms[j]);
  return out;
}

SimilarityMatrix cosine_similarity_matrix(const PulseDataset& dataset) {
  std::vector<std::vector<double>> phases;
  phases.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) phases.push_back(s.phases);
  return cosine_similarity_matrix(phases);
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                         std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw NmrError("histogram: need bins > 0 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double v : values) {
    auto b = static_cast<std::int64_t>(std::floor((v - lo) / h.bin_width()));
    b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

SimilaritySummary similarity_summary(const SimilarityMatrix& m, std::size_t bins) {
  if (m.size < 2) throw NmrError("similarity_summary: need at least 2 samples");
  SimilaritySummary s;
  double sum = 0.0;
  s.min = 1.0;
  std::vector<double> offdiag;
  offdiag.reserve(m.size * (m.size - 1));
  for (std::size_t i = 0; i < m.size; ++i)
    for (std::size_t j = 0; j < m.size; ++j) {
      s.min = std::min(s.min, m(i, j));
      if (i == j) continue;
      sum += m(i, j);
      offdiag.push_back(m(i, j));
    }
  s.mean_offdiag = sum / static_cast<double>(offdiag.size());
  s.histogram = make_histogram(offdiag, -1.0, 1.0, bins);
  return s;
}

}  // namespace nmrpulse
