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

#include "cvim/ising.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cvim {

double IsingProblem::energy(std::span<const int> spins) const {
  if (static_cast<int>(spins.size()) != size()) throw DimensionError("IsingProblem::energy: wrong spin count");
  double e = 0.0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j) e += cost(i, j) * spins[static_cast<std::size_t>(i)] * spins[static_cast<std::size_t>(j)];
  return e;
}

void IsingProblem::validate() const {
  if (cost.rows() != cost.cols()) throw ParameterError("IsingProblem: cost matrix must be square");
  if (cost.rows() < 1) throw ParameterError("IsingProblem: empty cost matrix");
  if ((cost - cost.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ParameterError("IsingProblem: cost must be symmetric");
  if (cost.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ParameterError("IsingProblem: diagonal must be zero");
}

bool GroundSolution::contains(std::span<const int> spins) const {
  return std::any_of(configs.begin(), configs.end(),
                     [&](const Spins& c) { return std::equal(c.begin(), c.end(), spins.begin(), spins.end()); });
}

IsingProblem npp_to_ising(std::span<const long> assets) {
  if (assets.size() < 2) throw ParameterError("npp_to_ising: need at least two assets");
  for (long a : assets)
    if (a <= 0) throw ParameterError("npp_to_ising: assets must be positive integers");
  const auto n = static_cast<Index>(assets.size());
  double max_product = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) max_product = std::max(max_product, static_cast<double>(assets[static_cast<std::size_t>(i)]) * static_cast<double>(assets[static_cast<std::size_t>(j)]));
  IsingProblem p;
  p.scale = 1.0 / max_product;
  p.assets.assign(assets.begin(), assets.end());
  p.cost = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) p.cost(i, j) = *p.scale * static_cast<double>(assets[static_cast<std::size_t>(i)]) * static_cast<double>(assets[static_cast<std::size_t>(j)]);
  return p;
}

IsingProblem ising_from_matrix(Eigen::MatrixXd cost) {
  if (cost.rows() != cost.cols() || cost.rows() < 1) throw ParameterError("ising_from_matrix: need a square matrix");
  cost.diagonal().setZero();
  IsingProblem p;
  p.cost = std::move(cost);
  p.validate();
  return p;
}

Eigen::MatrixXd cvim_coupling(const IsingProblem& problem) {
  problem.validate();
  return -problem.cost;
}

GroundSolution brute_force_ground(const IsingProblem& problem) {
  problem.validate();
  const int n = problem.size();
  if (n > kMaxBruteForceSpins)
    throw CapacityError("brute_force_ground: " + std::to_string(n) + " spins exceeds " + std::to_string(kMaxBruteForceSpins));
  const Index count = Index{1} << n;
  std::vector<double> energies(static_cast<std::size_t>(count));
  double best = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < count; ++s) {
    const Spins spins = spins_from_index(s, n);
    energies[static_cast<std::size_t>(s)] = problem.energy(spins);
    best = std::min(best, energies[static_cast<std::size_t>(s)]);
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  GroundSolution g;
  g.energy = best;
  for (Index s = 0; s < count; ++s)
    if (energies[static_cast<std::size_t>(s)] <= best + tol) g.configs.push_back(spins_from_index(s, n));
  return g;
}

std::string correlation_name(int i, int j) { return "corr_" + std::to_string(i) + "_" + std::to_string(j); }
std::string photon_number_name(int i) { return "n_" + std::to_string(i); }

std::vector<Observable> cvim_observables(const FockDims& dims) {
  std::vector<Observable> obs;
  std::vector<Operator> a;
  for (int k = 0; k < dims.modes(); ++k) a.push_back(destroy(k, dims));
  for (int i = 0; i < dims.modes(); ++i)
    for (int j = i + 1; j < dims.modes(); ++j)
      obs.push_back(Observable::expectation(correlation_name(i, j), a[static_cast<std::size_t>(i)].adjoint() * a[static_cast<std::size_t>(j)]));
  for (int i = 0; i < dims.modes(); ++i)
    obs.push_back(Observable::expectation(photon_number_name(i), a[static_cast<std::size_t>(i)].adjoint() * a[static_cast<std::size_t>(i)]));
  return obs;
}

bool success_cvim(const TrajectoryRecord& record, const GroundSolution& ground, double amplitude_floor) {
  if (ground.configs.empty()) throw EvaluationError("success_cvim: empty ground solution");
  const int n = static_cast<int>(ground.configs.front().size());
  if (record.sample_times.empty()) throw EvaluationError("success_cvim: record has no samples");
  std::vector<int> measured;  // sign cos arg <a_i^dag a_j> per pair i<j
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Complex c = record.final_value(correlation_name(i, j));
      if (std::abs(c) < amplitude_floor) return false;
      // cos(arg c) has the sign of Re c.
      if (c.real() == 0.0) return false;
      measured.push_back(c.real() > 0.0 ? 1 : -1);
    }
  return std::any_of(ground.configs.begin(), ground.configs.end(), [&](const Spins& s) {
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++k)
        if (s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)] != measured[k]) return false;
    return true;
  });
}

double success_qubit(const StateVector& final_state, const GroundSolution& ground) {
  const double nn = final_state.amplitudes.squaredNorm();
  if (!(nn > 0.0)) throw DegenerateStateError("success_qubit: zero-norm state");
  double p = 0.0;
  for (const auto& s : ground.configs) {
    const Index idx = spin_basis_index(s);
    if (idx >= final_state.amplitudes.size()) throw DimensionError("success_qubit: state is not a qubit register of matching size");
    p += std::norm(final_state.amplitudes(idx));
  }
  return std::clamp(p / nn, 0.0, 1.0);
}

Index spin_basis_index(std::span<const int> spins) {
  Index idx = 0;
  for (int s : spins) {
    if (s != 1 && s != -1) throw ParameterError("spin values must be +1 or -1");
    idx = (idx << 1) | (s == -1 ? 1 : 0);
  }
  return idx;
}

Spins spins_from_index(Index index, int n) {
  Spins s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((index >> (n - 1 - i)) & 1) ? -1 : 1;
  return s;
}

std::vector<long> read_asset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file " + path.string());
  std::vector<long> assets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long v;
    if (!(ls >> v)) {
      std::string rest;
      if (std::istringstream(line) >> rest) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected a positive integer");
      continue;
    }
    std::string extra;
    if (ls >> extra) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": one integer per line");
    if (v <= 0) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": assets must be positive");
    assets.push_back(v);
  }
  return assets;
}

}  // namespace cvim
