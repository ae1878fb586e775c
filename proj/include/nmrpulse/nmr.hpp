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
#include <vector>

#include "nmrpulse/linalg.hpp"

namespace nmrpulse {

struct DensityMatrix {
  ComplexMatrix rho;
  bool trace_normalized = true;

  std::size_t dim() const { return static_cast<std::size_t>(rho.rows()); }
  /// Hermiticity always; unit trace and positivity when trace_normalized.
  void validate() const;
};

/// Real <M_x>(t) samples at t_k = k * dt_acq.
struct FidSignal {
  std::vector<double> samples;
  double dt_acq = 0.0;
  double t2_s = 0.0;

  double time(std::size_t k) const { return static_cast<double>(k) * dt_acq; }
};

/// Rotating-frame spectrum; freqs strictly increasing and symmetric about 0.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> re;
  std::vector<double> im;

  double df() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

struct AcquisitionConfig {
  double duration_s = 1.0;
  int n_samples = 16384;
  double t2_s = 0.3;
};

struct Band {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct BandIntegral {
  double re = 0.0;
  double im = 0.0;
};

DensityMatrix pps_state(int n);
/// I/d + (1/(d n)) sum_i sigma_x^(i): the equilibrium deviation sum_i sigma_z^(i)
/// after a hard (pi/2)_y pulse, scaled so the state stays positive.
DensityMatrix thermal_like_state(int n);

DensityMatrix apply_gate_to_state(const ComplexMatrix& u, const DensityMatrix& rho);

/// Frequencies E_l - E_j (Hz) of every single-spin transition of H_free,
/// where j differs from l by flipping one spin from 0 to 1.
std::vector<double> transition_frequencies(const SpinSystem& sys);

/// Damped <M_x>(t) from the closed-form eigen-expansion of the diagonal H_free.
/// Throws NmrError when the sampling rate is below 4x the largest transition
/// frequency, or T2 <= 0, or n_samples < 2.
FidSignal fid(const DensityMatrix& rho0, const SpinSystem& sys, const AcquisitionConfig& acq);
/// Reference: dense conjugation e^{-iHt} rho e^{iHt} at every sample, serial.
FidSignal fid_dense(const DensityMatrix& rho0, const SpinSystem& sys, const AcquisitionConfig& acq);

/// Continuous-FT approximation sum_k w_k s_k e^{-i 2 pi f t_k} dt with the
/// first point weighted 1/2 (trapezoid rule at t = 0). The Nyquist bin of an
/// even-length transform is dropped so the axis is symmetric.
Spectrum spectrum(const FidSignal& fid);

/// Exact integral of the piecewise-linear interpolant of re(f), im(f) over [f1, f2].
BandIntegral integrate_band(const Spectrum& s, double f1, double f2);
inline BandIntegral integrate_band(const Spectrum& s, const Band& b) {
  return integrate_band(s, b.f1, b.f2);
}

/// tan^-1(Im/Re) on the principal branch (-pi/2, pi/2]. Computed with atan2
/// and folded by pi, so Re = 0 gives +pi/2.
double phase_observable(double re, double im);

/// Band around the lines of `qubit`: centre at its flip frequency without
/// couplings, half-width = (line spread from couplings) + margin.
Band qubit_band(const SpinSystem& sys, int qubit, double margin_hz = 20.0);

/// `window` shifted so it is centred on the largest |X(f)| sample inside it;
/// the half-width is kept. Throws NmrError if the window holds no samples.
Band centred_band(const Spectrum& s, const Band& window);

struct Peak {
  double freq = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

/// Peaks of |X(f)| for f > 0 whose prominence is at least
/// `relative_prominence` times the largest magnitude. A real FID has a
/// conjugate-symmetric spectrum, so the positive half lists every line once.
std::vector<Peak> find_peaks(const Spectrum& s, double relative_prominence = 0.2);

enum class ExperimentMode { Exact, Pulse };

struct ExperimentConfig {
  AcquisitionConfig acquisition{};
  std::optional<Band> band;
  int qubit = 1;
  /// Re-centre the band on the strongest line before integrating.
  bool recentre = true;
};

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::Exact;
  Spectrum spectrum;
  Band band;
  double re = 0.0;
  double im = 0.0;
  double phase = 0.0;
};

/// |0..0> -> U -> FID -> spectrum -> band integral -> phase. Exact mode
/// conjugates with the embedded ideal gate, pulse mode with the pulse's
/// total propagator (`pulse` required).
ExperimentResult run_experiment(const ComplexMatrix& gate, const SpinSystem& sys,
                                const ExperimentConfig& config,
                                ExperimentMode mode = ExperimentMode::Exact,
                                const PulseSequence* pulse = nullptr);

}  // namespace nmrpulse
