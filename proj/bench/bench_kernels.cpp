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

// Serial references against their OpenMP counterparts. The Arg is the
// OpenMP thread count.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/nmr.hpp"
#include "nmrpulse/pulse_net.hpp"
#include "nmrpulse/sampler.hpp"

namespace nmrpulse {
namespace {

GrapeConfig small_grape() {
  GrapeConfig g;
  g.steps = 40;
  g.dt_s = 1e-4;
  g.max_iterations = 100;
  return g;
}

constexpr int kSamples = 16;

void BM_DatasetSerial(benchmark::State& state) {
  const auto sys = SpinSystem::c2f3i();
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset_serial(kSamples, sys, small_grape(), 1));
  state.SetItemsProcessed(state.iterations() * kSamples);
}
BENCHMARK(BM_DatasetSerial)->Unit(benchmark::kMillisecond);

void BM_DatasetOpenMP(benchmark::State& state) {
  const auto sys = SpinSystem::c2f3i();
  DatasetOptions opts;
  opts.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(kSamples, sys, small_grape(), 1, opts));
  state.SetItemsProcessed(state.iterations() * kSamples);
}

std::vector<std::vector<double>> random_phase_sets(std::size_t count, std::size_t n) {
  Rng rng = make_stream(5, 0);
  std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
  std::vector<std::vector<double>> out(count, std::vector<double>(n));
  for (auto& v : out)
    for (auto& x : v) x = u(rng);
  return out;
}

void BM_SimilaritySerial(benchmark::State& state) {
  const auto phases = random_phase_sets(1000, 100);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity_matrix_serial(phases));
}
BENCHMARK(BM_SimilaritySerial)->Unit(benchmark::kMillisecond);

void BM_SimilarityOpenMP(benchmark::State& state) {
  const auto phases = random_phase_sets(1000, 100);
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity_matrix(phases));
}

MlpModel bench_model() {
  MlpModel m = MlpModel::default_architecture(100);
  m.initialize(3);
  return m;
}

std::vector<ComplexMatrix> bench_gates(int count) {
  std::vector<ComplexMatrix> gates;
  for (int i = 0; i < count; ++i) {
    Rng rng = make_stream(9, static_cast<std::uint64_t>(i));
    gates.push_back(axis_angle_unitary(sample_axis_angle(rng)));
  }
  return gates;
}

void BM_EvaluateSerial(benchmark::State& state) {
  const auto m = bench_model();
  const auto gates = bench_gates(64);
  const auto sys = SpinSystem::c2f3i();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_model_serial(m, sys, {2000.0, 4e-5}, gates));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);

void BM_EvaluateOpenMP(benchmark::State& state) {
  const auto m = bench_model();
  const auto gates = bench_gates(64);
  const auto sys = SpinSystem::c2f3i();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_model(m, sys, {2000.0, 4e-5}, gates, workers));
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_FidDense(benchmark::State& state) {
  const auto sys = SpinSystem::c2f3i();
  const auto rho = thermal_like_state(3);
  const AcquisitionConfig acq{1.0, 16384, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(fid_dense(rho, sys, acq));
}
BENCHMARK(BM_FidDense)->Unit(benchmark::kMillisecond);

void BM_FidOpenMP(benchmark::State& state) {
  const auto sys = SpinSystem::c2f3i();
  const auto rho = thermal_like_state(3);
  const AcquisitionConfig acq{1.0, 16384, 0.3};
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fid(rho, sys, acq));
}

void thread_args(benchmark::internal::Benchmark* b) {
  b->Arg(1);
  if (omp_get_num_procs() > 1) b->Arg(omp_get_num_procs());
}

BENCHMARK(BM_DatasetOpenMP)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimilarityOpenMP)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateOpenMP)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FidOpenMP)->Apply(thread_args)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace nmrpulse

BENCHMARK_MAIN();
