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


#ifndef CVIM_HARNESS_HPP
#define CVIM_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvim/config.hpp"
#include "cvim/dynamics.hpp"
#include "cvim/ising.hpp"

namespace cvim {

struct CellResult {
  double duration = 0.0;  // T (us)
  double rate = 0.0;      // kappa or gamma (1/us)
  std::uint64_t seed = 0;
  EnsembleResult ensemble;
  bool valid = true;      // every trajectory stayed below the leakage threshold
  std::string error;      // set when the ensemble itself failed

  /// Ramp-rate axis value (d eps / dt)^-1 = T / eps_max.
  double inverse_ramp_rate(double epsilon_max) const { return duration / epsilon_max; }
};

struct SweepResult {
  SweepConfig config;
  GroundSolution ground;
  std::vector<CellResult> cells;  // T-major, rate-minor, both ascending
  double wall_seconds = 0.0;
};

/// Seed of one grid cell. Derived from the cell coordinates, so a cell
/// reproduces exactly when run on its own.
std::uint64_t cell_seed(std::uint64_t base_seed, double duration, double rate);

/// Static and drive parts shared by all cells of a sweep.
SplitHamiltonian sweep_hamiltonian(const SweepConfig& config);

/// Single-cell trajectory problem, sampled only at t = T.
TrajectoryProblem cell_problem(const SweepConfig& config, const SplitHamiltonian& h, double duration, double rate);

/// Ground state of the annealer Hamiltonian at drive `epsilon` by exact
/// diagonalization.
StateVector annealer_ground_state(const SplitHamiltonian& h, double epsilon);

Evaluator cell_evaluator(const SweepConfig& config, const GroundSolution& ground);

using CellHook = std::function<void(const CellResult&)>;

SweepResult run_sweep(const SweepConfig& config, const CellHook& on_cell = {});

/// Columns: T_us, rate_per_us, success, mean_jumps, stderr_success, n_traj.
void write_grid_csv(std::ostream& os, const SweepResult& result);

nlohmann::json sweep_manifest(const SweepResult& result);

struct SeriesColumn {
  std::string name;
  std::vector<Complex> values;
  bool real = true;
};

/// Columns: t_us, then one per real observable or `.re`/`.im` pairs.
void write_timeseries_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SeriesColumn>& columns);

std::vector<SeriesColumn> series_columns(const TrajectoryRecord& record, const std::vector<Observable>& observables);

std::filesystem::path manifest_path(const std::filesystem::path& csv);

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view text);

/// CSV plus manifest; returns the paths written.
std::vector<std::filesystem::path> write_sweep(const SweepResult& result, const std::filesystem::path& csv_path);

std::string code_version();

enum class Preset { fig2a, fig2b, fig3a_slice, fig3c_slice };

std::optional<Preset> preset_from_name(std::string_view name);
std::string_view preset_name(Preset p);

struct PresetOptions {
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  int workers = 1;
  std::optional<int> n_traj;
};

/// Desk-scale sweep configuration for the grid presets.
SweepConfig preset_sweep_config(Preset p);

/// Two coupled KPOs (Delta = -1, J = -0.5, K = 0.7) ramped to eps = 2 over 400 us
/// from vacuum, sampled at 401 points. Observables: fid_vac, fid_phi_plus,
/// fid_phi_minus, fid_psi_plus, n_0, n_1, corr_0_1.
TrajectoryProblem two_kpo_anneal_problem(double loss);

std::vector<std::filesystem::path> run_preset(Preset p, const PresetOptions& options);

}  // namespace cvim

#endif  // CVIM_HARNESS_HPP
