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

#include "nmrpulse/grape.hpp"

#include <cmath>

namespace nmrpulse {

std::vector<double> GrapeConfig::start_phases() const {
  if (initial_phases.empty()) return std::vector<double>(static_cast<std::size_t>(steps), kPi);
  return initial_phases;
}

void GrapeConfig::validate() const {
  if (steps < 1) throw NmrError("grape: steps must be >= 1");
  if (!(dt_s > 0.0)) throw NmrError("grape: dt must be positive");
  if (!(amplitude_hz >= 0.0)) throw NmrError("grape: amplitude must be non-negative");
  if (max_iterations < 1) throw NmrError("grape: max_iterations must be >= 1");
  if (!(target_fidelity > 0.0 && target_fidelity <= 1.0))
    throw NmrError("grape: target_fidelity must lie in (0, 1]");
  if (!initial_phases.empty() && initial_phases.size() != static_cast<std::size_t>(steps))
    throw NmrError("grape: initial_phases length differs from steps");
  adam.validate();
}

namespace {

template <int D>
FidelityAndGradient covariant_gradient(const PulseSequence& pulse, const SpinSystem& sys,
                                       const ComplexMatrix& target_dyn) {
  using Mat = Eigen::Matrix<Complex, D, D>;
  using Vec = Eigen::Matrix<Complex, D, 1>;
  const auto d = static_cast<Eigen::Index>(sys.dim());
  const std::size_t steps = pulse.steps();

  const ComplexMatrix h0 = free_hamiltonian(sys) + pulse.amplitude_hz * collective(sys, Axis::X);
  const Mat u0 = expm_hermitian(h0, kTwoPi * pulse.dt_s);
  const RealVector z = collective_z_diagonal(sys.n());
  const Mat target = target_dyn;

  // rotor[k](a) = exp(-i phi_k z_a / 2)
  std::vector<Vec> rotor(steps, Vec(d));
  for (std::size_t k = 0; k < steps; ++k)
    for (Eigen::Index a = 0; a < d; ++a)
      rotor[k](a) = std::polar(1.0, -0.5 * pulse.phases_rad[k] * z(a));

  // forward[k] = u_k ... u_1, forward[0] = I
  std::vector<Mat> forward(steps + 1, Mat::Identity(d, d));
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vec& r = rotor[k - 1];
    Mat tmp = r.conjugate().asDiagonal() * forward[k - 1];
    forward[k].noalias() = r.asDiagonal() * (u0 * tmp);
  }

  FidelityAndGradient out;
  out.gradient.assign(steps, 0.0);
  const Complex g = (target.conjugate().cwiseProduct(forward[steps])).sum();
  const double mag = std::abs(g);
  out.fidelity = mag / static_cast<double>(d);
  if (mag < 1e-300) return out;

  // s_k = Tr(Q_k Z P_k) with Q_k = T^dagger u_N ... u_{k+1}
  auto s_of = [&](const Mat& q, const Mat& p) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) acc += q(a, b) * z(b) * p(b, a);
    return acc;
  };
  Mat q = target.adjoint();
  Complex s_next = s_of(q, forward[steps]);
  const Complex minus_half_i{0.0, -0.5};
  const double scale = 1.0 / (mag * static_cast<double>(d));
  for (std::size_t k = steps; k >= 1; --k) {
    const Vec& r = rotor[k - 1];
    Mat tmp = q * r.asDiagonal();
    q.noalias() = (tmp * u0) * r.conjugate().asDiagonal();
    const Complex s_prev = s_of(q, forward[k - 1]);
    const Complex dg = minus_half_i * (s_next - s_prev);
    out.gradient[k - 1] = (std::conj(g) * dg).real() * scale;
    s_next = s_prev;
  }
  return out;
}

}  // namespace

FidelityAndGradient fidelity_and_gradient(const PulseSequence& pulse, const SpinSystem& sys,
                                          const ComplexMatrix& target) {
  pulse.validate();
  const auto d = static_cast<Eigen::Index>(sys.dim());
  if (target.rows() != d || target.cols() != d)
    throw NmrError("fidelity_gradient: target dimension does not match the spin system");
  switch (d) {
    case 2: return covariant_gradient<2>(pulse, sys, target);
    case 4: return covariant_gradient<4>(pulse, sys, target);
    case 8: return covariant_gradient<8>(pulse, sys, target);
    default: return covariant_gradient<Eigen::Dynamic>(pulse, sys, target);
  }
}

std::vector<double> fidelity_gradient(const PulseSequence& pulse, const SpinSystem& sys,
                                      const ComplexMatrix& target) {
  return fidelity_and_gradient(pulse, sys, target).gradient;
}

ReferenceGradient reference_gradient(const SpinSystem& sys, double dt_s,
                                     const std::vector<double>& amplitudes_hz,
                                     const std::vector<double>& phases_rad,
                                     const ComplexMatrix& target) {
  const std::size_t steps = phases_rad.size();
  if (steps == 0 || amplitudes_hz.size() != steps)
    throw NmrError("reference_gradient: amplitudes and phases must have equal non-zero length");
  const auto d = static_cast<Eigen::Index>(sys.dim());
  if (target.rows() != d || target.cols() != d)
    throw NmrError("reference_gradient: target dimension mismatch");
  const double tau = kTwoPi * dt_s;
  const ComplexMatrix h0 = free_hamiltonian(sys);
  const ComplexMatrix x = collective(sys, Axis::X);
  const ComplexMatrix y = collective(sys, Axis::Y);

  struct Step {
    ComplexMatrix v;
    RealVector w;
    ComplexMatrix u;
  };
  std::vector<Step> st(steps);
  std::vector<ComplexMatrix> forward(steps + 1);
  forward[0] = identity(sys.dim());
  for (std::size_t k = 0; k < steps; ++k) {
    ComplexMatrix h = h0 + amplitudes_hz[k] * (std::cos(phases_rad[k]) * x +
                                               std::sin(phases_rad[k]) * y);
    h = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
    st[k].v = eig.eigenvectors();
    st[k].w = eig.eigenvalues();
    Eigen::VectorXcd e(d);
    for (Eigen::Index a = 0; a < d; ++a) e(a) = std::polar(1.0, -tau * st[k].w(a));
    st[k].u = st[k].v * e.asDiagonal() * st[k].v.adjoint();
    forward[k + 1] = st[k].u * forward[k];
  }

  ReferenceGradient out;
  out.d_phase.assign(steps, 0.0);
  out.d_amplitude.assign(steps, 0.0);
  const Complex g = trace_overlap(target, forward[steps]);
  const double mag = std::abs(g);
  out.fidelity = mag / static_cast<double>(d);
  if (mag < 1e-300) return out;
  const double scale = 1.0 / (mag * static_cast<double>(d));

  ComplexMatrix q = target.adjoint();  // Q_k = T^dagger u_N ... u_{k+1}
  for (std::size_t kk = steps; kk >= 1; --kk) {
    const std::size_t k = kk - 1;
    const auto& s = st[k];
    // divided differences of f(l) = exp(-i tau l), written to stay stable as
    // l_a -> l_b: f[a,b] = -i tau exp(-i tau m) sinc(tau delta / 2)
    ComplexMatrix gamma(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) {
        const double mid = 0.5 * (s.w(a) + s.w(b));
        const double half = 0.5 * tau * (s.w(a) - s.w(b));
        const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
        gamma(a, b) = Complex{0.0, -tau} * std::polar(1.0, -tau * mid) * sinc;
      }
    const ComplexMatrix w = s.v.adjoint() * forward[k] * q * s.v;
    const double c = std::cos(phases_rad[k]);
    const double sn = std::sin(phases_rad[k]);
    const ComplexMatrix dh_phase = amplitudes_hz[k] * (-sn * x + c * y);
    const ComplexMatrix dh_amp = c * x + sn * y;
    auto directional = [&](const ComplexMatrix& dh) {
      const ComplexMatrix rot = s.v.adjoint() * dh * s.v;
      // Tr(Q du P) = sum_ab gamma_ab rot_ab w_ba
      return (gamma.cwiseProduct(rot).cwiseProduct(w.transpose())).sum();
    };
    out.d_phase[k] = (std::conj(g) * directional(dh_phase)).real() * scale;
    out.d_amplitude[k] = (std::conj(g) * directional(dh_amp)).real() * scale;
    q = q * s.u;
  }
  return out;
}

std::pair<AdamState, std::vector<double>> adam_step(AdamState state,
                                                    const std::vector<double>& grads,
                                                    std::vector<double> phases,
                                                    const AdamParams& hp) {
  adam_update(state, grads, phases, hp, AdamDirection::Ascend);
  return {std::move(state), std::move(phases)};
}

GrapeResult grape_optimize(const SpinSystem& sys, const ComplexMatrix& target,
                           const GrapeConfig& config) {
  config.validate();
  if (!is_unitary(target, 1e-9)) throw NmrError("grape: target is not unitary");
  GrapeResult result;
  result.pulse.amplitude_hz = config.amplitude_hz;
  result.pulse.dt_s = config.dt_s;
  result.pulse.phases_rad = config.start_phases();
  AdamState adam(result.pulse.steps());
  for (int iter = 0;; ++iter) {
    const auto fg = fidelity_and_gradient(result.pulse, sys, target);
    result.fidelity_trace.push_back(fg.fidelity);
    result.iterations_used = iter;
    if (fg.fidelity >= config.target_fidelity) {
      result.converged = true;
      break;
    }
    if (iter >= config.max_iterations) break;
    adam_update(adam, fg.gradient, result.pulse.phases_rad, config.adam, AdamDirection::Ascend);
  }
  result.final_fidelity = fidelity(target, total_propagator(result.pulse, sys));
  return result;
}

GrapeResult grape_optimize(const SpinSystem& sys, const GateSpec& gate, const GrapeConfig& config) {
  if (!is_unitary(gate.gate, 1e-10)) throw NmrError("grape: gate is not unitary");
  return grape_optimize(sys, kron_embed(gate, sys.n()), config);
}

StabilityReport stability_probe(const PulseSequence& pulse, const SpinSystem& sys,
                                const GateSpec& gate, const GrapeConfig& config,
                                std::optional<int> iterations) {
  pulse.validate();
  config.adam.validate();
  const ComplexMatrix target = kron_embed(gate, sys.n());
  const std::size_t steps = pulse.steps();
  const double a0 = pulse.amplitude_hz;
  const int max_iter = iterations.value_or(config.max_iterations);

  // params = [phi_1..phi_N, a_1..a_N]
  std::vector<double> params(2 * steps, 0.0);
  std::copy(pulse.phases_rad.begin(), pulse.phases_rad.end(), params.begin());
  auto amplitudes = [&](const std::vector<double>& p) {
    std::vector<double> amp(steps);
    for (std::size_t k = 0; k < steps; ++k) amp[k] = a0 * (1.0 + p[steps + k]);
    return amp;
  };

  StabilityReport report;
  std::vector<double> best = params;
  double best_f = -1.0;
  AdamState adam(params.size());
  std::vector<double> grads(params.size());
  for (int iter = 0;; ++iter) {
    const std::vector<double> phases(params.begin(), params.begin() + static_cast<long>(steps));
    const auto rg = reference_gradient(sys, pulse.dt_s, amplitudes(params), phases, target);
    if (iter == 0) report.initial_fidelity = rg.fidelity;
    if (rg.fidelity > best_f) {
      best_f = rg.fidelity;
      best = params;
      report.iterations_used = iter;
    }
    if (rg.fidelity >= 1.0 - 1e-12 || iter >= max_iter) break;
    for (std::size_t k = 0; k < steps; ++k) {
      grads[k] = rg.d_phase[k];
      grads[steps + k] = rg.d_amplitude[k] * a0;
    }
    adam_update(adam, grads, params, config.adam, AdamDirection::Ascend);
  }
  report.final_fidelity = best_f;
  report.gain = best_f - report.initial_fidelity;
  report.amplitudes_hz = amplitudes(best);
  report.phases_rad.assign(best.begin(), best.begin() + static_cast<long>(steps));
  return report;
}

}  // namespace nmrpulse
