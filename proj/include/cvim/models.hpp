// Copyright 2026 The cvim Authors
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

#ifndef CVIM_MODELS_HPP
#define CVIM_MODELS_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvim/fockspace.hpp"

namespace cvim {

// Units: rates in rad/us (numerically the quoted MHz values), times in us,
// hbar = 1.

/// N coupled Kerr parametric oscillators in the frame rotating at half the
/// (common) pump frequency.
struct KPOSystemParams {
  double detuning = -1.0;
  std::vector<double> kerr;         // K_n > 0
  double loss = 0.0;                // kappa >= 0
  Eigen::MatrixXd coupling;         // J, symmetric, zero diagonal
  std::vector<double> drive_scale;  // relative two-photon drive per mode

  int modes() const { return static_cast<int>(kerr.size()); }

  /// Uniform Kerr, unit drive scale.
  static KPOSystemParams uniform(double detuning, double kerr, double loss, Eigen::MatrixXd coupling);

  /// Throws ParameterError naming the violated rule. The vacuum-start check
  /// requires detuning + lambda_max(J) < 0, the exact condition under which
  /// the undriven vacuum is the extremal state of the quadratic part.
  void validate() const;
};

enum class RampDirection { up, down };

/// Linear ramp eps(t) = eps_max t/T (up) or eps_max (1 - t/T) (down).
struct DriveSchedule {
  double epsilon_max = 1.0;
  double duration = 1.0;
  RampDirection direction = RampDirection::up;

  double operator()(double t) const {
    const double s = t / duration;
    return direction == RampDirection::up ? epsilon_max * s : epsilon_max * (1.0 - s);
  }
  double slope() const { return direction == RampDirection::up ? epsilon_max / duration : -epsilon_max / duration; }
  void validate() const;
};

struct QubitAnnealerParams {
  Eigen::MatrixXd cost;  // C, symmetric, zero diagonal
  double epsilon_max = 6.0;
  double duration = 100.0;
  double dephasing = 0.0;

  int qubits() const { return static_cast<int>(cost.rows()); }
  void validate() const;
};

/// H(t) = static_part + sum_k eps_k(t) drive_parts[k]. Every model here uses
/// one global schedule, so the drive parts are usually summed before
/// propagation.
struct SplitHamiltonian {
  Operator static_part;
  std::vector<Operator> drive_parts;

  Operator drive_total() const;
  Operator at(double epsilon) const;
};

SplitHamiltonian kpo_hamiltonian(double detuning, double kerr, int dim);

/// Resonant N-KPO Hamiltonian:
///   sum_n D a_n^dag a_n + sum_{n!=m} J_nm a_n^dag a_m - sum_n K_n a_n^dag a_n^dag a_n a_n
/// with drive_parts[n] = drive_scale[n] (a_n^2 + a_n^dag^2).
SplitHamiltonian cvim_hamiltonian(const KPOSystemParams& params, const FockDims& dims);

enum class NormalModeForm { exact, rotating_wave };

/// Two identical KPOs written in the symmetric d=(a+b)/sqrt2 (mode 0) and
/// antisymmetric c=(a-b)/sqrt2 (mode 1) basis:
///   H_d(D+J, K/2) + H_c(D-J, K/2) - 2K d^dag d c^dag c
///   - (K/2)(d^dag d^dag c c + c^dag c^dag d d)     [exact form only]
SplitHamiltonian two_kpo_normal_mode_hamiltonian(double detuning, double coupling, double kerr, const FockDims& dims,
                                                 NormalModeForm form = NormalModeForm::exact);

inline constexpr int kMaxAnnealerQubits = 12;

/// H_ising = sum_{i<j} C_ij Z_i Z_j (static), H_transverse = sum_j X_j (drive).
/// Qubit 0 is the leftmost tensor factor; basis |0> is s = +1.
SplitHamiltonian qubit_annealer_hamiltonian(const QubitAnnealerParams& params);

/// Superconducting circuit description of a chain of flux-pumped split
/// junctions closed by a common shunt.
struct CircuitParams {
  struct Oscillator {
    double charging_energy;   // E_C
    double josephson_energy;  // E_J
    double dc_flux;           // Phi_dc (rad)
    double ac_flux;           // delta Phi_ac
  };
  enum class Shunt { inductor, junction };

  std::vector<Oscillator> oscillators;
  Shunt shunt = Shunt::inductor;
  double shunt_inductance = 1.0;  // L_eff, inductor shunt
  double shunt_josephson = 0.0;   // E_J^(0), junction shunt at half flux
  double detuning = -1.0;         // chosen pump detuning; Omega_n = 2(omega_n - detuning)
  double loss = 0.0;
};

struct CircuitModel {
  KPOSystemParams params;
  std::vector<double> frequency;   // omega_n
  std::vector<double> pump;        // Omega_n
  std::vector<double> impedance;   // Z_n
  std::vector<double> drive;       // eps_n
  double drive_max = 0.0;          // max_n eps_n, so eps_n = drive_max * drive_scale[n]
  std::vector<std::string> warnings;
};

CircuitModel circuit_to_model(const CircuitParams& circuit);

/// Smallest-magnitude solution of phi = ratio sin(N phi); exactly zero when
/// N * ratio <= 1.
double shunt_equilibrium_phase(double ratio, int n);

}  // namespace cvim

#endif  // CVIM_MODELS_HPP
