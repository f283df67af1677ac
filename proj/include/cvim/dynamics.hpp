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

#ifndef CVIM_DYNAMICS_HPP
#define CVIM_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvim/fockspace.hpp"
#include "cvim/models.hpp"

namespace cvim {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double jump_time_resolution = 1e-3;  // us
  double initial_step = 1e-3;
  double max_norm_drift = 1e-6;        // coherent runs only
};

/// Collapse operator with rate: contributes rate * op rho op^dag to the
/// master equation and -(i/2) rate op^dag op to the effective Hamiltonian.
struct JumpChannel {
  Operator op;
  double rate = 0.0;
};

struct JumpEvent {
  double time = 0.0;
  int channel = 0;
};

/// Named scalar evaluated on the normalized state at every sample.
class Observable {
 public:
  static Observable expectation(std::string name, Operator op);
  /// |<ref|psi>|^2.
  static Observable fidelity(std::string name, StateVector reference);

  const std::string& name() const { return name_; }
  /// Fidelities and Hermitian expectations are real-valued.
  bool is_real() const { return real_; }
  Complex operator()(const Vector& psi) const;

 private:
  std::string name_;
  std::optional<Operator> op_;
  std::optional<Vector> reference_;
  bool real_ = true;
};

struct TrajectoryRecord {
  std::vector<double> sample_times;
  std::vector<std::string> names;
  std::vector<std::vector<Complex>> series;  // series[observable][sample]
  std::vector<JumpEvent> jumps;
  StateVector final_state;
  std::uint64_t seed = 0;
  double max_leakage = 0.0;  // population in the top two Fock levels
  double norm_drift = 0.0;   // |1 - |psi(T)|| for coherent runs
  long steps = 0;

  const std::vector<Complex>& observable(std::string_view name) const;
  Complex final_value(std::string_view name) const { return observable(name).back(); }
};

/// Everything that defines one trajectory except its seed.
struct TrajectoryProblem {
  SplitHamiltonian hamiltonian;
  DriveSchedule schedule;
  std::vector<JumpChannel> channels;
  StateVector initial;
  std::vector<double> sample_times;
  std::vector<Observable> observables;
  bool track_leakage = false;
  IntegratorOptions options;
};

/// `count` equally spaced times on [0, duration], both ends included.
std::vector<double> uniform_samples(double duration, int count = 400);

using JumpHook = std::function<void(const JumpEvent&, const StateVector& before, const StateVector& after)>;

/// Schrodinger evolution under H(t) = H_static + eps(t) sum_k H_drive[k].
TrajectoryRecord evolve_coherent(const SplitHamiltonian& h, const DriveSchedule& schedule, const StateVector& psi0,
                                 const std::vector<double>& sample_times, const std::vector<Observable>& observables = {},
                                 const IntegratorOptions& options = {});

/// First-order Monte-Carlo wave-function unraveling of the Lindblad equation.
/// Deterministic given `seed`.
TrajectoryRecord mcwf_trajectory(const TrajectoryProblem& problem, std::uint64_t seed, const JumpHook& on_jump = {});

inline constexpr Index kMaxLindbladDimension = 200;

/// Dense master-equation integration; returns rho at every sample time.
std::vector<DensityMatrix> lindblad_evolve(const SplitHamiltonian& h, const DriveSchedule& schedule,
                                           const std::vector<JumpChannel>& channels, const DensityMatrix& rho0,
                                           const std::vector<double>& sample_times,
                                           const IntegratorOptions& options = {});

/// Per-trajectory score in [0, 1]: boolean success or a ground population.
using Evaluator = std::function<double(const TrajectoryRecord&)>;

struct TrajectoryOutcome {
  std::optional<TrajectoryRecord> record;
  double score = 0.0;
  std::string error;

  bool ok() const { return record.has_value(); }
};

struct EnsembleResult {
  int n_traj = 0;
  int n_failed = 0;
  double success_fraction = 0.0;
  double stderr_success = 0.0;
  double mean_jump_count = 0.0;
  double stderr_jumps = 0.0;
  double max_leakage = 0.0;
  std::vector<double> sample_times;
  std::vector<std::string> names;
  std::vector<std::vector<Complex>> mean_series;
  std::vector<std::string> failures;
  std::vector<TrajectoryRecord> records;  // only with keep_records

  int n_effective() const { return n_traj - n_failed; }
};

struct EnsembleOptions {
  int workers = 1;
  bool keep_records = false;
  double max_failure_fraction = 0.1;
};

/// Seed of trajectory `index` in an ensemble.
inline std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) { return base_seed ^ index; }

/// Runs one trajectory and scores it; failures are captured, not thrown.
TrajectoryOutcome run_outcome(const TrajectoryProblem& problem, std::uint64_t seed, const Evaluator& evaluate,
                              bool keep_final_state);

/// Order-independent reduction over outcomes listed by trajectory index.
EnsembleResult aggregate_ensemble(std::vector<TrajectoryOutcome> outcomes, const EnsembleOptions& options = {});

EnsembleResult ensemble_run(const TrajectoryProblem& problem, int n_traj, std::uint64_t base_seed,
                            const Evaluator& evaluate, const EnsembleOptions& options = {});

/// True when no channel has a positive rate, i.e. every trajectory is the
/// same deterministic coherent run.
bool is_closed(const std::vector<JumpChannel>& channels);

}  // namespace cvim

#endif  // CVIM_DYNAMICS_HPP
