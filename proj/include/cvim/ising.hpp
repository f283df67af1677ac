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

#ifndef CVIM_ISING_HPP
#define CVIM_ISING_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvim/dynamics.hpp"
#include "cvim/fockspace.hpp"

namespace cvim {

using Spins = std::vector<int>;

/// Ising cost E(s) = sum_{i<j} C_ij s_i s_j with C symmetric, zero diagonal.
struct IsingProblem {
  Eigen::MatrixXd cost;
  std::vector<long> assets;     // empty unless built from a partition problem
  std::optional<double> scale;  // J0

  int size() const { return static_cast<int>(cost.rows()); }
  double energy(std::span<const int> spins) const;
  void validate() const;
};

struct GroundSolution {
  std::vector<Spins> configs;
  double energy = 0.0;

  bool contains(std::span<const int> spins) const;
};

/// C_ij = A_i A_j / max_{k!=l} A_k A_l.
IsingProblem npp_to_ising(std::span<const long> assets);

/// Symmetric input; the diagonal is forced to zero.
IsingProblem ising_from_matrix(Eigen::MatrixXd cost);

/// J = -C, the coupling that makes the oscillator network favour the
/// problem's ground state.
Eigen::MatrixXd cvim_coupling(const IsingProblem& problem);

inline constexpr int kMaxBruteForceSpins = 24;

GroundSolution brute_force_ground(const IsingProblem& problem);

inline constexpr double kDefaultAmplitudeFloor = 0.1;

/// Name of the <a_i^dag a_j> observable recorded by CVIM runs.
std::string correlation_name(int i, int j);
std::string photon_number_name(int i);

/// <a_i^dag a_j> for every pair i<j plus <a_i^dag a_i> for every mode.
std::vector<Observable> cvim_observables(const FockDims& dims);

/// Phase-lock criterion: every pair carries |<a_i^dag a_j>| >= floor and
/// sign cos arg <a_i^dag a_j> = s_i s_j for some ground configuration.
bool success_cvim(const TrajectoryRecord& record, const GroundSolution& ground,
                  double amplitude_floor = kDefaultAmplitudeFloor);

/// Population of the ground manifold in a qubit-register state.
double success_qubit(const StateVector& final_state, const GroundSolution& ground);

/// Computational basis index of a spin configuration (qubit 0 leftmost,
/// |0> = spin up).
Index spin_basis_index(std::span<const int> spins);
Spins spins_from_index(Index index, int n);

/// One positive integer per line; blank lines and '#' comments ignored.
std::vector<long> read_asset_file(const std::filesystem::path& path);

}  // namespace cvim

#endif  // CVIM_ISING_HPP
