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

#include "nmrpulse/nmr.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace nmrpulse {

void DensityMatrix::validate() const {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw NmrError("density matrix must be square");
  if (hermiticity_error(rho) > 1e-12) throw NmrError("density matrix is not hermitian");
  if (!trace_normalized) return;
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > 1e-10) throw NmrError("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) throw NmrError("density matrix is not positive");
}

DensityMatrix pps_state(int n) {
  if (n < 1) throw NmrError("pps_state: n must be >= 1");
  const auto d = Eigen::Index{1} << n;
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return {rho, true};
}

DensityMatrix thermal_like_state(int n) {
  if (n < 1) throw NmrError("thermal_like_state: n must be >= 1");
  const auto d = std::size_t{1} << n;
  const ComplexMatrix deviation = collective(SpinSystem::trivial(n), Axis::Z);
  // hard (pi/2)_y on every spin: exp(-i (pi/4) sigma_y) per spin
  ComplexMatrix rot = identity(1);
  for (int q = 0; q < n; ++q) rot = kron(rot, expm_hermitian(pauli(Axis::Y), kPi / 4.0));
  const ComplexMatrix tipped = rot * deviation * rot.adjoint();
  const double dd = static_cast<double>(d);
  ComplexMatrix rho = identity(d) / dd + tipped / (dd * n);
  return {0.5 * (rho + rho.adjoint()), true};
}

DensityMatrix apply_gate_to_state(const ComplexMatrix& u, const DensityMatrix& rho) {
  if (u.rows() != rho.rho.rows() || u.cols() != rho.rho.cols())
    throw NmrError("apply_gate_to_state: dimension mismatch");
  ComplexMatrix out = u * rho.rho * u.adjoint();
  return {0.5 * (out + out.adjoint()), rho.trace_normalized};
}

std::vector<double> transition_frequencies(const SpinSystem& sys) {
  const RealVector e = free_energies(sys);
  std::vector<double> f;
  const int n = sys.n();
  for (Eigen::Index b = 0; b < e.size(); ++b)
    for (int q = 1; q <= n; ++q) {
      const Eigen::Index bit = Eigen::Index{1} << (n - q);
      if (b & bit) continue;
      f.push_back(e(b) - e(b | bit));
    }
  return f;
}

namespace {

void check_acquisition(const DensityMatrix& rho0, const SpinSystem& sys,
                       const AcquisitionConfig& acq) {
  if (rho0.dim() != sys.dim()) throw NmrError("fid: state dimension does not match the system");
  if (!(acq.t2_s > 0.0)) throw NmrError("fid: T2 must be positive");
  if (acq.n_samples < 2) throw NmrError("fid: need at least 2 samples");
  if (!(acq.duration_s > 0.0)) throw NmrError("fid: duration must be positive");
  double fmax = 0.0;
  for (double f : transition_frequencies(sys)) fmax = std::max(fmax, std::abs(f));
  const double rate = acq.n_samples / acq.duration_s;
  if (rate < 4.0 * fmax)
    throw NmrError("fid: sampling rate " + std::to_string(rate) + " Hz is below 4x the largest " +
                   "transition frequency " + std::to_string(fmax) + " Hz");
}

ComplexMatrix detector(const SpinSystem& sys) {
  // sum_k sigma_x^(k), unscaled regardless of convention
  return collective(SpinSystem::trivial(sys.n()), Axis::X);
}

}  // namespace

FidSignal fid(const DensityMatrix& rho0, const SpinSystem& sys, const AcquisitionConfig& acq) {
  check_acquisition(rho0, sys, acq);
  const RealVector e = free_energies(sys);
  const ComplexMatrix m = detector(sys);
  // s(t) = sum_{l,j} rho_lj M_jl exp(-i 2 pi (E_l - E_j) t)
  std::vector<Complex> amp;
  std::vector<double> freq;
  for (Eigen::Index l = 0; l < e.size(); ++l)
    for (Eigen::Index j = 0; j < e.size(); ++j) {
      const Complex c = rho0.rho(l, j) * m(j, l);
      if (std::abs(c) == 0.0) continue;
      amp.push_back(c);
      freq.push_back(e(l) - e(j));
    }
  FidSignal out;
  out.dt_acq = acq.duration_s / acq.n_samples;
  out.t2_s = acq.t2_s;
  out.samples.assign(static_cast<std::size_t>(acq.n_samples), 0.0);
  const auto n = static_cast<std::int64_t>(acq.n_samples);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * out.dt_acq;
    double s = 0.0;
    for (std::size_t a = 0; a < amp.size(); ++a)
      s += (amp[a] * std::polar(1.0, -kTwoPi * freq[a] * t)).real();
    out.samples[static_cast<std::size_t>(k)] = std::exp(-t / acq.t2_s) * s;
  }
  return out;
}

FidSignal fid_dense(const DensityMatrix& rho0, const SpinSystem& sys, const AcquisitionConfig& acq) {
  check_acquisition(rho0, sys, acq);
  const ComplexMatrix h = free_hamiltonian(sys);
  const ComplexMatrix m = detector(sys);
  FidSignal out;
  out.dt_acq = acq.duration_s / acq.n_samples;
  out.t2_s = acq.t2_s;
  for (int k = 0; k < acq.n_samples; ++k) {
    const double t = k * out.dt_acq;
    const ComplexMatrix u = expm_hermitian(h, kTwoPi * t);
    const ComplexMatrix rho = u * rho0.rho * u.adjoint();
    out.samples.push_back(std::exp(-t / acq.t2_s) * (rho * m).trace().real());
  }
  return out;
}

namespace {

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Spectrum spectrum(const FidSignal& fid) {
  const auto n = fid.samples.size();
  if (n < 2) throw NmrError("spectrum: need at least 2 samples");
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < n; ++k) {
    buf[k][0] = fid.samples[k] * fid.dt_acq * (k == 0 ? 0.5 : 1.0);
    buf[k][1] = 0.0;
  }
  fftw_execute(plan);

  Spectrum s;
  const double df = 1.0 / (static_cast<double>(n) * fid.dt_acq);
  const auto half = static_cast<std::int64_t>((n - 1) / 2);
  for (std::int64_t k = -half; k <= half; ++k) {
    const auto idx = static_cast<std::size_t>(k < 0 ? k + static_cast<std::int64_t>(n) : k);
    s.freqs.push_back(static_cast<double>(k) * df);
    s.re.push_back(buf[idx][0]);
    s.im.push_back(buf[idx][1]);
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return s;
}

BandIntegral integrate_band(const Spectrum& s, double f1, double f2) {
  if (!(f1 < f2)) throw NmrError("integrate_band: need f1 < f2");
  if (s.freqs.size() < 2 || f1 < s.freqs.front() || f2 > s.freqs.back())
    throw NmrError("integrate_band: band lies outside the spectrum range");
  auto interp = [&](const std::vector<double>& y, std::size_t i, double f) {
    const double w = (f - s.freqs[i]) / (s.freqs[i + 1] - s.freqs[i]);
    return (1.0 - w) * y[i] + w * y[i + 1];
  };
  BandIntegral out;
  // segment i spans [freqs[i], freqs[i+1]]
  const auto first = static_cast<std::size_t>(
      std::upper_bound(s.freqs.begin(), s.freqs.end(), f1) - s.freqs.begin());
  for (std::size_t i = first == 0 ? 0 : first - 1; i + 1 < s.freqs.size(); ++i) {
    const double a = std::max(f1, s.freqs[i]);
    const double b = std::min(f2, s.freqs[i + 1]);
    if (b <= a) {
      if (s.freqs[i] >= f2) break;
      continue;
    }
    out.re += 0.5 * (b - a) * (interp(s.re, i, a) + interp(s.re, i, b));
    out.im += 0.5 * (b - a) * (interp(s.im, i, a) + interp(s.im, i, b));
  }
  return out;
}

double phase_observable(double re, double im) {
  if (re == 0.0 && im == 0.0) throw NmrError("phase_observable: Re and Im are both zero");
  double p = std::atan2(im, re);
  if (p > kPi / 2) p -= kPi;
  if (p <= -kPi / 2) p += kPi;
  return p;
}

Band qubit_band(const SpinSystem& sys, int qubit, double margin_hz) {
  if (qubit < 1 || qubit > sys.n()) throw NmrError("qubit_band: qubit out of range");
  const double s = sys.operator_scale();
  double spread = 0.0;
  for (int j = 1; j <= sys.n(); ++j)
    if (j != qubit) spread += std::abs(sys.coupling(qubit, j));
  const double centre = 2.0 * s * sys.offsets_hz()[qubit - 1];
  const double half = 2.0 * s * spread + margin_hz;
  return {centre - half, centre + half};
}

Band centred_band(const Spectrum& s, const Band& window) {
  std::size_t best = s.freqs.size();
  double best_mag = -1.0;
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    if (s.freqs[k] < window.f1 || s.freqs[k] > window.f2) continue;
    const double m = std::hypot(s.re[k], s.im[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  if (best == s.freqs.size()) throw NmrError("centred_band: window holds no spectrum samples");
  const double half = 0.5 * (window.f2 - window.f1);
  return {s.freqs[best] - half, s.freqs[best] + half};
}

std::vector<Peak> find_peaks(const Spectrum& s, double relative_prominence) {
  const std::size_t n = s.freqs.size();
  std::vector<double> mag(n);
  for (std::size_t k = 0; k < n; ++k) mag[k] = std::hypot(s.re[k], s.im[k]);
  const auto zero = static_cast<std::size_t>(
      std::upper_bound(s.freqs.begin(), s.freqs.end(), 0.0) - s.freqs.begin());
  if (zero >= n) return {};
  const double global = *std::max_element(mag.begin() + static_cast<long>(zero), mag.end());
  const double threshold = relative_prominence * global;

  std::vector<Peak> peaks;
  for (std::size_t k = zero + 1; k + 1 < n; ++k) {
    if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])) continue;
    if (mag[k] < threshold) continue;
    // lowest point on each side before reaching something higher
    double left_min = mag[k];
    std::size_t i = k;
    while (i > zero) {
      --i;
      if (mag[i] > mag[k]) break;
      left_min = std::min(left_min, mag[i]);
    }
    double right_min = mag[k];
    for (std::size_t j = k + 1; j < n; ++j) {
      if (mag[j] > mag[k]) break;
      right_min = std::min(right_min, mag[j]);
    }
    const double prominence = mag[k] - std::max(left_min, right_min);
    if (prominence >= threshold) peaks.push_back({s.freqs[k], mag[k], prominence});
  }
  return peaks;
}

ExperimentResult run_experiment(const ComplexMatrix& gate, const SpinSystem& sys,
                                const ExperimentConfig& config, ExperimentMode mode,
                                const PulseSequence* pulse) {
  ComplexMatrix u;
  if (mode == ExperimentMode::Exact) {
    u = embed_single(gate, config.qubit, sys.n());
  } else {
    if (!pulse) throw NmrError("run_experiment: pulse mode needs a pulse");
    u = total_propagator(*pulse, sys);
  }
  const DensityMatrix rho = apply_gate_to_state(u, pps_state(sys.n()));
  ExperimentResult r;
  r.mode = mode;
  r.spectrum = spectrum(fid(rho, sys, config.acquisition));
  r.band = config.band.value_or(qubit_band(sys, config.qubit));
  if (config.recentre) r.band = centred_band(r.spectrum, r.band);
  const auto integral = integrate_band(r.spectrum, r.band);
  r.re = integral.re;
  r.im = integral.im;
  r.phase = phase_observable(r.re, r.im);
  return r;
}

}  // namespace nmrpulse
