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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/nmr.hpp"
#include "nmrpulse/pulse_net.hpp"
#include "test_util.hpp"

namespace nmrpulse {
namespace {

const Complex kI{0.0, 1.0};

// random density matrix: normalized Gram matrix
DensityMatrix random_state(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return {0.5 * (rho + rho.adjoint()), true};
}

double wrap_pi(double x) { return std::remainder(x, kPi); }

TEST(DensityMatrix, PpsState) {
  const DensityMatrix rho = pps_state(3);
  EXPECT_EQ(rho.dim(), 8u);
  EXPECT_EQ(rho.rho(0, 0), Complex(1.0, 0.0));
  EXPECT_EQ(max_abs(rho.rho) , 1.0);
  EXPECT_EQ(rho.rho.cwiseAbs().sum(), 1.0);
  EXPECT_EQ(rho.rho.trace(), Complex(1.0, 0.0));
  EXPECT_NEAR((rho.rho * rho.rho).trace().real(), 1.0, 1e-15);
  EXPECT_NO_THROW(rho.validate());
}

TEST(DensityMatrix, ThermalLikeIsValid) {
  const DensityMatrix rho = thermal_like_state(3);
  EXPECT_NO_THROW(rho.validate());
  // traceless part is proportional to sum sigma_x
  const ComplexMatrix dev = rho.rho - identity(8) / 8.0;
  EXPECT_LT(max_abs(dev - collective(SpinSystem::trivial(3), Axis::X) / 24.0), 1e-14);
}

TEST(DensityMatrix, ValidationCatchesBadStates) {
  DensityMatrix bad{identity(2), true};
  EXPECT_THROW(bad.validate(), NmrError);
  bad.rho = identity(2) / 2.0;
  bad.rho(0, 1) = 0.3;
  EXPECT_THROW(bad.validate(), NmrError);
  DensityMatrix neg{ComplexMatrix::Zero(2, 2), true};
  neg.rho(0, 0) = 1.5;
  neg.rho(1, 1) = -0.5;
  EXPECT_THROW(neg.validate(), NmrError);
}

TEST(ApplyGate, IdentityAndTrace) {
  Rng rng = make_stream(50, 0);
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = random_state(rng, 8);
    EXPECT_LT(max_abs(apply_gate_to_state(identity(8), rho).rho - rho.rho), 1e-15);
    const DensityMatrix out = apply_gate_to_state(testing::random_unitary(rng, 8), rho);
    EXPECT_NEAR(std::abs(out.rho.trace() - Complex{1.0, 0.0}), 0.0, 1e-12);
    EXPECT_LE(hermiticity_error(out.rho), 1e-12);
  }
  EXPECT_THROW(apply_gate_to_state(identity(4), pps_state(3)), NmrError);
}

TEST(ApplyGate, ThetaAlphaStateCoefficients) {
  for (int k = 0; k <= 18; ++k) {
    const double alpha = k * kPi / 9;
    const ComplexMatrix u = embed_single(theta_alpha_gate(kPi / 4, alpha), 1, 3);
    const DensityMatrix rho = apply_gate_to_state(u, pps_state(3));
    // psi = (|000> + c |100>)/sqrt2 with c = -i cos(alpha) + sin(alpha)
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(4) = (-kI * std::cos(alpha) + std::sin(alpha)) / std::sqrt(2.0);
    EXPECT_LT(max_abs(rho.rho - psi * psi.adjoint()), 1e-12) << "k = " << k;
    const Eigen::VectorXcd direct = u.col(0);
    EXPECT_LT((direct - psi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TransitionFrequencies, PaperSystem) {
  const auto f = transition_frequencies(SpinSystem::c2f3i());
  EXPECT_EQ(f.size(), 12u);
  EXPECT_NE(std::find_if(f.begin(), f.end(), [](double x) { return std::abs(x + 2828.0) < 1e-9; }),
            f.end());
  std::vector<double> mags;
  for (double x : f) mags.push_back(std::abs(x));
  std::sort(mags.begin(), mags.end());
  EXPECT_EQ(std::adjacent_find(mags.begin(), mags.end()), mags.end());
}

TEST(Fid, MaximallyMixedIsZero) {
  const DensityMatrix rho{identity(8) / 8.0, true};
  const auto s = fid(rho, SpinSystem::c2f3i(), AcquisitionConfig{});
  for (double v : s.samples) EXPECT_EQ(v, 0.0);
}

TEST(Fid, SingleQubitClosedForm) {
  const double delta = 150.0;
  const SpinSystem sys(1, {delta}, {});
  AcquisitionConfig acq{0.1, 2048, 1e12};
  for (int k = 1; k <= 10; ++k) {
    const double alpha = k * kPi / 9;
    const DensityMatrix rho = apply_gate_to_state(theta_alpha_gate(kPi / 4, alpha), pps_state(1));
    const auto s = fid(rho, sys, acq);
    // omega = 2 pi (E1 - E0); the spectral line sits at E0 - E1 = 2 delta
    const double w = -kTwoPi * 2.0 * delta;
    for (std::size_t i = 0; i < s.samples.size(); i += 37) {
      const double t = s.time(i);
      EXPECT_NEAR(s.samples[i], std::sin(alpha) * std::cos(w * t) - std::cos(alpha) * std::sin(w * t),
                  1e-9);
    }
  }
}

TEST(Fid, DampingHalvesAtT2Ln2) {
  const SpinSystem sys(1, {0.0}, {});
  const DensityMatrix rho = apply_gate_to_state(theta_alpha_gate(kPi / 4, kPi / 2), pps_state(1));
  const double t2 = 0.25;
  const int n = 4096;
  AcquisitionConfig acq{1.0, n, t2};
  const auto s = fid(rho, sys, acq);
  // on resonance the signal is the bare envelope; pick the sample at t = T2 ln 2
  const double t_half = t2 * std::log(2.0);
  const auto k = static_cast<std::size_t>(std::llround(t_half * n));
  EXPECT_NEAR(s.samples[k] / s.samples[0], std::exp(-s.time(k) / t2), 1e-12);
  EXPECT_NEAR(std::exp(-t_half / t2), 0.5, 1e-15);
  EXPECT_NEAR(s.samples[0], 1.0, 1e-12);
}

TEST(Fid, EigenExpansionMatchesDense) {
  Rng rng = make_stream(51, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const SpinSystem sys = testing::random_system(rng, 1 + trial % 3);
    const DensityMatrix rho = random_state(rng, static_cast<Eigen::Index>(sys.dim()));
    const AcquisitionConfig acq{0.02, 1024, 0.03 + 0.001 * (trial % 50)};
    const auto a = fid(rho, sys, acq);
    const auto b = fid_dense(rho, sys, acq);
    for (std::size_t i = 0; i < a.samples.size(); i += 17) EXPECT_NEAR(a.samples[i], b.samples[i], 1e-10);
  }
}

TEST(Fid, Linearity) {
  Rng rng = make_stream(52, 0);
  const SpinSystem sys = SpinSystem::c2f3i();
  const AcquisitionConfig acq{0.2, 4096, 0.3};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const DensityMatrix r1 = random_state(rng, 8), r2 = random_state(rng, 8);
    const double a = u(rng);
    const DensityMatrix mix{a * r1.rho + (1 - a) * r2.rho, true};
    const auto s = fid(mix, sys, acq), s1 = fid(r1, sys, acq), s2 = fid(r2, sys, acq);
    for (std::size_t i = 0; i < s.samples.size(); i += 97)
      EXPECT_NEAR(s.samples[i], a * s1.samples[i] + (1 - a) * s2.samples[i], 1e-12);
  }
}

TEST(Fid, BoundedByDimension) {
  Rng rng = make_stream(53, 0);
  const SpinSystem sys = SpinSystem::c2f3i();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = fid(random_state(rng, 8), sys, AcquisitionConfig{0.05, 1024, 0.3});
    for (double v : s.samples) EXPECT_LE(std::abs(v), 8.0);
  }
}

TEST(Fid, Errors) {
  const SpinSystem sys = SpinSystem::c2f3i();
  EXPECT_THROW(fid(pps_state(3), sys, AcquisitionConfig{1.0, 16384, 0.0}), NmrError);
  EXPECT_THROW(fid(pps_state(3), sys, AcquisitionConfig{1.0, 1, 0.3}), NmrError);
  // 4 kHz sampling < 4 x 2940 Hz
  EXPECT_THROW(fid(pps_state(3), sys, AcquisitionConfig{1.0, 4000, 0.3}), NmrError);
  EXPECT_THROW(fid(pps_state(2), sys, AcquisitionConfig{}), NmrError);
}

TEST(Spectrum, ZeroSignal) {
  FidSignal s{std::vector<double>(64, 0.0), 1e-3, 1.0};
  const auto sp = spectrum(s);
  for (std::size_t k = 0; k < sp.freqs.size(); ++k) {
    EXPECT_EQ(sp.re[k], 0.0);
    EXPECT_EQ(sp.im[k], 0.0);
  }
  EXPECT_THROW(spectrum(FidSignal{{1.0}, 1e-3, 1.0}), NmrError);
}

TEST(Spectrum, AxisIsSymmetricAndIncreasing) {
  for (std::size_t n : {64u, 65u, 16384u}) {
    const auto sp = spectrum(FidSignal{std::vector<double>(n, 1.0), 1e-4, 1.0});
    EXPECT_EQ(sp.freqs.size() % 2, 1u);
    EXPECT_EQ(sp.re.size(), sp.freqs.size());
    for (std::size_t k = 0; k + 1 < sp.freqs.size(); ++k) EXPECT_LT(sp.freqs[k], sp.freqs[k + 1]);
    for (std::size_t k = 0; k < sp.freqs.size(); ++k)
      EXPECT_NEAR(sp.freqs[k], -sp.freqs[sp.freqs.size() - 1 - k], 1e-9);
  }
}

TEST(Spectrum, CosinePeaksInRealPart) {
  const double f0 = 312.0;  // on a bin
  const int n = 4096;
  const double dt = 1.0 / n;
  FidSignal s{{}, dt, 1e12};
  for (int k = 0; k < n; ++k) s.samples.push_back(std::cos(kTwoPi * f0 * k * dt));
  const auto sp = spectrum(s);
  // the mirror line at -f0 has the same height; look at f > 0
  const auto zero = static_cast<long>(sp.freqs.size() / 2);
  const auto it = std::max_element(sp.re.begin() + zero, sp.re.end());
  EXPECT_NEAR(sp.freqs[static_cast<std::size_t>(it - sp.re.begin())], f0, 1e-9);
  // dt * (n/2 - 1/2): the half-weighted first sample
  EXPECT_NEAR(*it, 0.5 - 0.5 / n, 1e-9);
  EXPECT_NEAR(sp.re[static_cast<std::size_t>(zero)], -0.5 * dt, 1e-12);
}

TEST(Spectrum, MatchesDirectSum) {
  Rng rng = make_stream(54, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  FidSignal s{{}, 1e-3, 1.0};
  for (int k = 0; k < 101; ++k) s.samples.push_back(g(rng));
  const auto sp = spectrum(s);
  for (std::size_t b = 0; b < sp.freqs.size(); b += 7) {
    Complex x = 0.0;
    for (std::size_t k = 0; k < s.samples.size(); ++k)
      x += (k == 0 ? 0.5 : 1.0) * s.samples[k] * s.dt_acq *
           std::exp(-kI * kTwoPi * sp.freqs[b] * s.time(k));
    EXPECT_NEAR(sp.re[b], x.real(), 1e-12);
    EXPECT_NEAR(sp.im[b], x.imag(), 1e-12);
  }
}

TEST(Peaks, TwelveForThermalLikeState) {
  const SpinSystem sys = SpinSystem::c2f3i();
  const auto sp = spectrum(fid(thermal_like_state(3), sys, AcquisitionConfig{}));
  const auto peaks = find_peaks(sp, 0.2);
  EXPECT_EQ(peaks.size(), 12u);
  auto lines = transition_frequencies(sys);
  for (auto& f : lines) f = std::abs(f);
  for (const auto& p : peaks) {
    const bool matched = std::any_of(lines.begin(), lines.end(),
                                     [&](double f) { return std::abs(f - p.freq) <= sp.df(); });
    EXPECT_TRUE(matched) << p.freq;
  }
}

TEST(Peaks, SpinHalfAlsoTwelve) {
  const SpinSystem sys = SpinSystem::c2f3i(OperatorConvention::SpinHalf);
  const auto sp = spectrum(fid(thermal_like_state(3), sys, AcquisitionConfig{}));
  EXPECT_EQ(find_peaks(sp, 0.2).size(), 12u);
}

TEST(IntegrateBand, ZeroSpectrumAndErrors) {
  const auto sp = spectrum(FidSignal{std::vector<double>(256, 0.0), 1e-3, 1.0});
  const auto b = integrate_band(sp, -100.0, 100.0);
  EXPECT_EQ(b.re, 0.0);
  EXPECT_EQ(b.im, 0.0);
  EXPECT_THROW(integrate_band(sp, 10.0, 10.0), NmrError);
  EXPECT_THROW(integrate_band(sp, -1000.0, 0.0), NmrError);
}

TEST(IntegrateBand, TrapezoidOnGrid) {
  Spectrum s{{-2, -1, 0, 1, 2}, {0, 1, 2, 1, 0}, {1, 1, 1, 1, 1}};
  const auto b = integrate_band(s, -2, 2);
  EXPECT_DOUBLE_EQ(b.re, 4.0);
  EXPECT_DOUBLE_EQ(b.im, 4.0);
  // partial cell: linear interpolant between -1 and 0
  EXPECT_DOUBLE_EQ(integrate_band(s, -0.5, 0.0).re, 0.5 * (1.5 + 2.0) * 0.5);
}

TEST(IntegrateBand, AdditiveOverSubBands) {
  const SpinSystem sys = SpinSystem::c2f3i();
  const auto sp = spectrum(fid(thermal_like_state(3), sys, AcquisitionConfig{}));
  Rng rng = make_stream(55, 0);
  std::uniform_real_distribution<double> u(-3500.0, 3500.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double a = u(rng), b = u(rng), c = u(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    if (!(a < b && b < c)) continue;
    const auto whole = integrate_band(sp, a, c);
    const auto l = integrate_band(sp, a, b), r = integrate_band(sp, b, c);
    EXPECT_NEAR(whole.re, l.re + r.re, 1e-12);
    EXPECT_NEAR(whole.im, l.im + r.im, 1e-12);
  }
}

TEST(IntegrateBand, EmptyBandIsSmall) {
  // widest peak-free gap of the default system, between the qubit-2 and qubit-3 groups
  const SpinSystem sys = SpinSystem::c2f3i();
  ExperimentConfig cfg;
  const auto r = run_experiment(theta_alpha_gate(kPi / 4, kPi / 3), sys, cfg);
  const Band q2 = qubit_band(sys, 2), q3 = qubit_band(sys, 3);
  const double mid = 0.5 * (q2.f2 + q3.f1);
  const double half = 0.5 * (r.band.f2 - r.band.f1);
  const auto empty = integrate_band(r.spectrum, mid - half, mid + half);
  const double peak = std::hypot(r.re, r.im);
  EXPECT_LE(std::abs(empty.re), 1e-3 * peak);
  EXPECT_LE(std::abs(empty.im), 1e-3 * peak);
}

TEST(IntegrateBand, ThetaAlphaProportionalToSinMinusCos) {
  const SpinSystem sys = SpinSystem::c2f3i();
  ExperimentConfig cfg;
  cfg.acquisition.t2_s = 1.0;
  double norm = 0.0;
  for (int k : {1, 2, 3, 4, 5, 6, 9, 10}) {
    const double alpha = k * kPi / 9;
    const auto r = run_experiment(theta_alpha_gate(kPi / 4, alpha), sys, cfg);
    const double mag = std::hypot(r.re, r.im);
    if (norm == 0.0) norm = mag;
    EXPECT_NEAR(mag, norm, 0.02 * norm);
    EXPECT_NEAR(r.re / mag, std::sin(alpha), 0.02);
    EXPECT_NEAR(r.im / mag, -std::cos(alpha), 0.02);
  }
}

TEST(PhaseObservable, Examples) {
  EXPECT_EQ(phase_observable(1.0, 0.0), 0.0);
  EXPECT_NEAR(phase_observable(std::sin(kPi / 2), -std::cos(kPi / 2)), 0.0, 1e-15);
  EXPECT_NEAR(phase_observable(0.0, 1.0), kPi / 2, 1e-15);
  EXPECT_NEAR(phase_observable(0.0, -1.0), kPi / 2, 1e-15);
  EXPECT_NEAR(phase_observable(-1.0, -1.0), kPi / 4, 1e-15);
  EXPECT_THROW(phase_observable(0.0, 0.0), NmrError);
}

TEST(PhaseObservable, PrincipalBranchProperty) {
  Rng rng = make_stream(56, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double re = g(rng), im = g(rng);
    const double p = phase_observable(re, im);
    EXPECT_GT(p, -kPi / 2);
    EXPECT_LE(p, kPi / 2);
    EXPECT_NEAR(p, std::atan(im / re), 1e-12);
  }
}

TEST(PhaseObservable, EquationFifteenValues) {
  for (int k : {1, 2, 3, 4, 5, 6, 9, 10}) {
    const double alpha = k * kPi / 9;
    const double p = phase_observable(std::sin(alpha), -std::cos(alpha));
    EXPECT_NEAR(wrap_pi(p - std::atan(-1.0 / std::tan(alpha))), 0.0, 1e-12);
  }
}

TEST(QubitBand, Geometry) {
  const Band p = qubit_band(SpinSystem::c2f3i(), 1);
  EXPECT_DOUBLE_EQ(p.f1, -2750.0 - 190.0 - 20.0);
  EXPECT_DOUBLE_EQ(p.f2, -2750.0 + 190.0 + 20.0);
  const Band h = qubit_band(SpinSystem::c2f3i(OperatorConvention::SpinHalf), 1);
  EXPECT_DOUBLE_EQ(h.f1, -1375.0 - 95.0 - 20.0);
  EXPECT_DOUBLE_EQ(h.f2, -1375.0 + 95.0 + 20.0);
  EXPECT_THROW(qubit_band(SpinSystem::c2f3i(), 4), NmrError);
  // every qubit-1 line lies inside
  for (double f : transition_frequencies(SpinSystem::c2f3i()))
    if (f < -2000.0) {
      EXPECT_TRUE(f > p.f1 && f < p.f2) << f;
    }
}

TEST(RunExperiment, ExactModePhaseTracksAlpha) {
  ExperimentConfig cfg;
  cfg.acquisition.t2_s = 1.0;
  double worst = 0.0;
  for (int k : {1, 2, 3, 4, 5, 6, 9, 10}) {
    const double alpha = k * kPi / 9;
    const auto r = run_experiment(theta_alpha_gate(kPi / 4, alpha), SpinSystem::c2f3i(), cfg);
    worst = std::max(worst, std::abs(wrap_pi(r.phase - std::atan(-1.0 / std::tan(alpha)))));
  }
  EXPECT_LE(worst, 0.02);
}

TEST(RunExperiment, EqualOperatorsGiveEqualResults) {
  // one on-resonance spin: a single step with 2 pi A dt = pi/4 at phase pi/2
  // is exactly exp(-i (pi/4) sigma_y), the theta = pi/4, alpha = pi/2 gate
  const SpinSystem sys(1, {0.0}, {});
  const double dt = 1e-4;
  const PulseSequence p{(kPi / 4) / (kTwoPi * dt), dt, {kPi / 2}};
  const ComplexMatrix gate = theta_alpha_gate(kPi / 4, kPi / 2);
  ASSERT_NEAR(fidelity(gate, total_propagator(p, sys)), 1.0, 1e-15);
  ExperimentConfig cfg;
  const auto exact = run_experiment(gate, sys, cfg);
  const auto pulse = run_experiment(gate, sys, cfg, ExperimentMode::Pulse, &p);
  EXPECT_NEAR(pulse.re, exact.re, 1e-6);
  EXPECT_NEAR(pulse.im, exact.im, 1e-6);
  EXPECT_NEAR(pulse.phase, exact.phase, 1e-6);
  EXPECT_NEAR(exact.phase, 0.0, 1e-6);
  EXPECT_THROW(run_experiment(gate, sys, cfg, ExperimentMode::Pulse, nullptr), NmrError);
}

TEST(RunExperiment, GrapePulseCloseToExact) {
  const SpinSystem sys = SpinSystem::c2f3i();
  const ComplexMatrix gate = theta_alpha_gate(kPi / 4, kPi / 3);
  GrapeConfig gc;
  const auto g = grape_optimize(sys, GateSpec{gate, 1}, gc);
  ASSERT_TRUE(g.converged);
  ExperimentConfig cfg;
  const auto exact = run_experiment(gate, sys, cfg);
  const auto pulse = run_experiment(gate, sys, cfg, ExperimentMode::Pulse, &g.pulse);
  // fidelity >= 0.95 is the bar for a 0.1 rad phase match
  EXPECT_NEAR(wrap_pi(pulse.phase - exact.phase), 0.0, 0.1);
}

}  // namespace
}  // namespace nmrpulse
