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

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nmrpulse {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Raised for malformed inputs: wrong dimensions, out-of-range indices,
/// non-hermitian operands and similar contract violations.
class NmrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Axis { X, Y, Z };

/// `Pauli` uses sigma exactly; `SpinHalf` replaces every sigma by sigma/2.
enum class OperatorConvention { Pauli, SpinHalf };

std::string to_string(OperatorConvention c);
OperatorConvention convention_from_string(const std::string& s);

struct Coupling {
  int i = 0;  // 1-based, i < j
  int j = 0;
  double value_hz = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Rotating-frame drift parameters of an n-spin homonuclear system.
/// Offsets and couplings are in Hz; the 2*pi factor is applied only when
/// propagating.
class SpinSystem {
 public:
  SpinSystem(int n, std::vector<double> offsets_hz, std::vector<Coupling> couplings,
             OperatorConvention convention = OperatorConvention::Pauli);

  /// Offsets -1375/56/1035 Hz, J12=-67, J13=28, J23=38 Hz (C2F3I at 1 T).
  static SpinSystem c2f3i(OperatorConvention convention = OperatorConvention::Pauli);
  /// n spins with all offsets and couplings zero.
  static SpinSystem trivial(int n);

  int n() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  const std::vector<double>& offsets_hz() const { return offsets_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }
  OperatorConvention convention() const { return convention_; }
  /// 1 for Pauli, 1/2 for SpinHalf.
  double operator_scale() const;
  /// J_ij for 1-based i != j, zero when not listed.
  double coupling(int i, int j) const;

  friend bool operator==(const SpinSystem&, const SpinSystem&) = default;

 private:
  int n_;
  std::vector<double> offsets_;
  std::vector<Coupling> couplings_;
  OperatorConvention convention_;
};

/// Phase-only piecewise-constant pulse: fixed amplitude, one phase per step.
struct PulseSequence {
  double amplitude_hz = 0.0;
  double dt_s = 0.0;
  std::vector<double> phases_rad;

  std::size_t steps() const { return phases_rad.size(); }
  double duration_s() const { return dt_s * static_cast<double>(steps()); }
  /// Throws NmrError unless N >= 1, dt > 0 and amplitude >= 0.
  void validate() const;

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;
};

/// A 2x2 unitary acting on one qubit (1-based index, qubit 1 leftmost).
struct GateSpec {
  ComplexMatrix gate;
  int target_qubit = 1;
};

// --- checks -----------------------------------------------------------------

double max_abs(const ComplexMatrix& m);
/// max |U^dagger U - I|
double unitarity_error(const ComplexMatrix& u);
double hermiticity_error(const ComplexMatrix& h);
bool is_unitary(const ComplexMatrix& u, double tol = 1e-10);
bool is_hermitian(const ComplexMatrix& h, double tol = 1e-12);

// --- operators ----------------------------------------------------------------

ComplexMatrix pauli(Axis axis);
ComplexMatrix identity(std::size_t dim);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// `op` (2x2) on qubit `target` of n, identity elsewhere.
ComplexMatrix embed_single(const ComplexMatrix& op, int target, int n);
ComplexMatrix kron_embed(const GateSpec& gate, int n);

/// sum_i sigma_axis^(i), convention-scaled.
ComplexMatrix collective(const SpinSystem& sys, Axis axis);
/// Diagonal of sum_i sigma_z^(i) (unscaled, entries in {-n..n}).
RealVector collective_z_diagonal(int n);

/// Diagonal of H_free in Hz.
RealVector free_energies(const SpinSystem& sys);
ComplexMatrix free_hamiltonian(const SpinSystem& sys);
ComplexMatrix control_hamiltonian(const SpinSystem& sys, double amplitude_hz, double phase_rad);

/// exp(-i * scale * H) for hermitian H via eigendecomposition.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double scale);

/// exp(-i 2 pi (H_free + H_ctrl(A, phi)) dt) for a single step.
ComplexMatrix step_propagator(const SpinSystem& sys, double amplitude_hz, double phase_rad,
                              double dt_s);

/// u_N ... u_2 u_1 with step 1 applied first.
ComplexMatrix total_propagator(const PulseSequence& pulse, const SpinSystem& sys);
/// Propagator over steps [first, last).
ComplexMatrix partial_propagator(const PulseSequence& pulse, const SpinSystem& sys,
                                 std::size_t first, std::size_t last);

/// |Tr(U^dagger V)| / d.
double fidelity(const ComplexMatrix& target, const ComplexMatrix& v);
Complex trace_overlap(const ComplexMatrix& target, const ComplexMatrix& v);

}  // namespace nmrpulse
