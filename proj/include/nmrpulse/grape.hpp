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

#include <optional>
#include <utility>
#include <vector>

#include "nmrpulse/adam.hpp"
#include "nmrpulse/linalg.hpp"

namespace nmrpulse {

struct GrapeConfig {
  int steps = 200;
  double dt_s = 20e-6;
  double amplitude_hz = 2000.0;
  int max_iterations = 2000;
  AdamParams adam{};
  double target_fidelity = 0.995;
  /// Empty means the constant vector [pi, ..., pi].
  std::vector<double> initial_phases;

  std::vector<double> start_phases() const;
  void validate() const;
  friend bool operator==(const GrapeConfig&, const GrapeConfig&) = default;
};

struct GrapeResult {
  PulseSequence pulse;
  std::vector<double> fidelity_trace;
  double final_fidelity = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

struct FidelityAndGradient {
  double fidelity = 0.0;
  std::vector<double> gradient;
};

/// Exact dF/dphi_k for F = |Tr(U_target^dagger U)|/d.
///
/// Uses the fact that H_free commutes with the collective Z, so each step
/// propagator is u(phi) = D(phi) u(0) D(phi)^dagger with D = exp(-i phi Z/2).
/// Then du/dphi = -i/2 [Z, u] and the whole gradient follows from one forward
/// and one backward sweep with a single eigendecomposition.
FidelityAndGradient fidelity_and_gradient(const PulseSequence& pulse, const SpinSystem& sys,
                                          const ComplexMatrix& target);
std::vector<double> fidelity_gradient(const PulseSequence& pulse, const SpinSystem& sys,
                                      const ComplexMatrix& target);

/// Reference gradient via the Daleckii-Krein divided-difference formula for
/// the Frechet derivative of exp(-i 2 pi H_k dt), one eigendecomposition per
/// step. Independent of the commuting-drift shortcut; kept for testing and
/// for the amplitude derivatives of stability_probe.
struct ReferenceGradient {
  double fidelity = 0.0;
  std::vector<double> d_phase;
  /// dF/dA_k in 1/Hz.
  std::vector<double> d_amplitude;
};
ReferenceGradient reference_gradient(const SpinSystem& sys, double dt_s,
                                     const std::vector<double>& amplitudes_hz,
                                     const std::vector<double>& phases_rad,
                                     const ComplexMatrix& target);

/// Returns the updated (state, phases) pair; ascent on fidelity.
std::pair<AdamState, std::vector<double>> adam_step(AdamState state,
                                                    const std::vector<double>& grads,
                                                    std::vector<double> phases,
                                                    const AdamParams& hp);

/// Phase-only GRAPE with ADAM. Deterministic; amplitude is never modified.
GrapeResult grape_optimize(const SpinSystem& sys, const GateSpec& gate, const GrapeConfig& config);
GrapeResult grape_optimize(const SpinSystem& sys, const ComplexMatrix& target,
                           const GrapeConfig& config);

struct StabilityReport {
  double initial_fidelity = 0.0;
  double final_fidelity = 0.0;
  /// final - initial.
  double gain = 0.0;
  std::vector<double> amplitudes_hz;
  std::vector<double> phases_rad;
  int iterations_used = 0;
};

/// Re-optimizes a converged phase-only pulse with per-step amplitudes freed.
/// Amplitudes are parametrized relative to the fixed amplitude,
/// A_k = A0 (1 + a_k), so the ADAM step size means the same for both blocks.
/// Runs `iterations` steps (config.max_iterations when unset) and stops early
/// once fidelity reaches 1 - 1e-12.
StabilityReport stability_probe(const PulseSequence& pulse, const SpinSystem& sys,
                                const GateSpec& gate, const GrapeConfig& config,
                                std::optional<int> iterations = std::nullopt);

}  // namespace nmrpulse
