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

#include "nmrpulse/linalg.hpp"

#include <cmath>

namespace nmrpulse {

std::string to_string(OperatorConvention c) {
  return c == OperatorConvention::Pauli ? "pauli" : "spin_half";
}

OperatorConvention convention_from_string(const std::string& s) {
  if (s == "pauli") return OperatorConvention::Pauli;
  if (s == "spin_half") return OperatorConvention::SpinHalf;
  throw NmrError("unknown operator_convention '" + s + "'");
}

SpinSystem::SpinSystem(int n, std::vector<double> offsets_hz, std::vector<Coupling> couplings,
                       OperatorConvention convention)
    : n_(n), offsets_(std::move(offsets_hz)), couplings_(std::move(couplings)),
      convention_(convention) {
  if (n_ < 1 || n_ > 10) throw NmrError("spin system needs 1 <= n <= 10");
  if (static_cast<int>(offsets_.size()) != n_)
    throw NmrError("expected " + std::to_string(n_) + " offsets, got " +
                   std::to_string(offsets_.size()));
  for (std::size_t a = 0; a < couplings_.size(); ++a) {
    const auto& c = couplings_[a];
    if (c.i < 1 || c.j > n_ || c.i >= c.j)
      throw NmrError("coupling indices must satisfy 1 <= i < j <= n");
    for (std::size_t b = 0; b < a; ++b)
      if (couplings_[b].i == c.i && couplings_[b].j == c.j)
        throw NmrError("duplicate coupling J" + std::to_string(c.i) + std::to_string(c.j));
  }
}

SpinSystem SpinSystem::c2f3i(OperatorConvention convention) {
  return SpinSystem(3, {-1375.0, 56.0, 1035.0}, {{1, 2, -67.0}, {1, 3, 28.0}, {2, 3, 38.0}},
                    convention);
}

SpinSystem SpinSystem::trivial(int n) {
  return SpinSystem(n, std::vector<double>(static_cast<std::size_t>(n), 0.0), {});
}

double SpinSystem::operator_scale() const {
  return convention_ == OperatorConvention::Pauli ? 1.0 : 0.5;
}

double SpinSystem::coupling(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const auto& c : couplings_)
    if (c.i == i && c.j == j) return c.value_hz;
  return 0.0;
}

void PulseSequence::validate() const {
  if (phases_rad.empty()) throw NmrError("pulse needs at least one step");
  if (!(dt_s > 0.0)) throw NmrError("pulse dt must be positive");
  if (!(amplitude_hz >= 0.0)) throw NmrError("pulse amplitude must be non-negative");
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double unitarity_error(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

double hermiticity_error(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return INFINITY;
  return max_abs(h - h.adjoint());
}

bool is_unitary(const ComplexMatrix& u, double tol) { return unitarity_error(u) <= tol; }
bool is_hermitian(const ComplexMatrix& h, double tol) { return hermiticity_error(h) <= tol; }

ComplexMatrix pauli(Axis axis) {
  const Complex i{0.0, 1.0};
  ComplexMatrix m(2, 2);
  switch (axis) {
    case Axis::X: m << 0.0, 1.0, 1.0, 0.0; break;
    case Axis::Y: m << 0.0, -i, i, 0.0; break;
    case Axis::Z: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

ComplexMatrix embed_single(const ComplexMatrix& op, int target, int n) {
  if (op.rows() != 2 || op.cols() != 2) throw NmrError("single-qubit operator must be 2x2");
  if (n < 1 || target < 1 || target > n)
    throw NmrError("target qubit " + std::to_string(target) + " out of range [1, " +
                   std::to_string(n) + "]");
  const ComplexMatrix left = identity(std::size_t{1} << (target - 1));
  const ComplexMatrix right = identity(std::size_t{1} << (n - target));
  return kron(kron(left, op), right);
}

ComplexMatrix kron_embed(const GateSpec& gate, int n) {
  return embed_single(gate.gate, gate.target_qubit, n);
}

ComplexMatrix collective(const SpinSystem& sys, Axis axis) {
  const auto d = static_cast<Eigen::Index>(sys.dim());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  const ComplexMatrix p = sys.operator_scale() * pauli(axis);
  for (int q = 1; q <= sys.n(); ++q) out += embed_single(p, q, sys.n());
  return out;
}

RealVector collective_z_diagonal(int n) {
  const auto d = Eigen::Index{1} << n;
  RealVector z(d);
  for (Eigen::Index b = 0; b < d; ++b) {
    int s = 0;
    for (int q = 0; q < n; ++q) s += ((b >> q) & 1) ? -1 : 1;
    z(b) = s;
  }
  return z;
}

namespace {

// +1 for |0>, -1 for |1> on 1-based qubit q of n (qubit 1 is the most significant bit).
int z_sign(Eigen::Index basis, int q, int n) { return ((basis >> (n - q)) & 1) ? -1 : 1; }

}  // namespace

RealVector free_energies(const SpinSystem& sys) {
  const int n = sys.n();
  const auto d = static_cast<Eigen::Index>(sys.dim());
  const double s = sys.operator_scale();
  RealVector e = RealVector::Zero(d);
  for (Eigen::Index b = 0; b < d; ++b) {
    double v = 0.0;
    for (int q = 1; q <= n; ++q) v += s * sys.offsets_hz()[q - 1] * z_sign(b, q, n);
    for (const auto& c : sys.couplings())
      v += s * s * c.value_hz * z_sign(b, c.i, n) * z_sign(b, c.j, n);
    e(b) = v;
  }
  return e;
}

ComplexMatrix free_hamiltonian(const SpinSystem& sys) {
  return free_energies(sys).cast<Complex>().asDiagonal();
}

ComplexMatrix control_hamiltonian(const SpinSystem& sys, double amplitude_hz, double phase_rad) {
  if (amplitude_hz < 0.0) throw NmrError("control amplitude must be non-negative");
  const ComplexMatrix x = collective(sys, Axis::X);
  const ComplexMatrix y = collective(sys, Axis::Y);
  ComplexMatrix h = amplitude_hz * (std::cos(phase_rad) * x + std::sin(phase_rad) * y);
  // enforce exact hermiticity
  return 0.5 * (h + h.adjoint());
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double scale) {
  if (h.rows() != h.cols()) throw NmrError("expm_hermitian: matrix is not square");
  const double tol = 1e-12 * std::max(1.0, max_abs(h));
  if (hermiticity_error(h) > tol) throw NmrError("expm_hermitian: matrix is not hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  const RealVector& w = eig.eigenvalues();
  const ComplexMatrix& v = eig.eigenvectors();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, -scale * w(k));
  return v * phases.asDiagonal() * v.adjoint();
}

ComplexMatrix step_propagator(const SpinSystem& sys, double amplitude_hz, double phase_rad,
                              double dt_s) {
  const ComplexMatrix h = free_hamiltonian(sys) + control_hamiltonian(sys, amplitude_hz, phase_rad);
  return expm_hermitian(h, kTwoPi * dt_s);
}

ComplexMatrix partial_propagator(const PulseSequence& pulse, const SpinSystem& sys,
                                 std::size_t first, std::size_t last) {
  pulse.validate();
  if (first > last || last > pulse.steps()) throw NmrError("partial_propagator: bad step range");
  const ComplexMatrix h0 = free_hamiltonian(sys);
  const ComplexMatrix x = collective(sys, Axis::X);
  const ComplexMatrix y = collective(sys, Axis::Y);
  ComplexMatrix u = identity(sys.dim());
  for (std::size_t k = first; k < last; ++k) {
    const double phi = pulse.phases_rad[k];
    ComplexMatrix h = h0 + pulse.amplitude_hz * (std::cos(phi) * x + std::sin(phi) * y);
    h = 0.5 * (h + h.adjoint());
    u = expm_hermitian(h, kTwoPi * pulse.dt_s) * u;
  }
  return u;
}

ComplexMatrix total_propagator(const PulseSequence& pulse, const SpinSystem& sys) {
  return partial_propagator(pulse, sys, 0, pulse.steps());
}

Complex trace_overlap(const ComplexMatrix& target, const ComplexMatrix& v) {
  if (target.rows() != v.rows() || target.cols() != v.cols() || target.rows() != target.cols())
    throw NmrError("fidelity: dimension mismatch");
  // Tr(U^dagger V) = sum_ij conj(U_ij) V_ij
  return (target.conjugate().cwiseProduct(v)).sum();
}

double fidelity(const ComplexMatrix& target, const ComplexMatrix& v) {
  return std::abs(trace_overlap(target, v)) / static_cast<double>(target.rows());
}

}  // namespace nmrpulse
