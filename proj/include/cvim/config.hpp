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


#ifndef CVIM_CONFIG_HPP
#define CVIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvim/ising.hpp"

namespace cvim {

enum class Machine { cvim, qubit };

std::string_view machine_name(Machine m);

/// A fully resolved sweep description. Every field has a value after
/// validate_config; `warnings` collects non-fatal notes (deduplicated grid
/// values, undersized truncation).
struct SweepConfig {
  Machine machine = Machine::cvim;
  IsingProblem problem;

  // [physics]
  double detuning = -1.5;
  double kerr = 0.6;
  double epsilon_max = 2.0;
  std::vector<double> drive_scale;  // empty means all ones
  int fock_dim = 0;
  int recommended_fock_dim = 0;     // ceil(4|alpha|^2 + 6) from the steady amplitude at epsilon_max
  bool fock_dim_auto = true;
  double amplitude_floor = kDefaultAmplitudeFloor;

  // [sweep]
  std::vector<double> ramp_durations;
  std::vector<double> rates;
  int n_traj = 40;
  std::uint64_t base_seed = 1;
  int workers = 1;

  // [output]
  std::filesystem::path output_path = "sweep.csv";

  std::vector<std::string> warnings;

  /// Fully resolved echo, suitable for the run manifest and for re-parsing.
  nlohmann::json to_json() const;
  std::string to_ini() const;
};

/// Parse INI text. Relative file references resolve against `base_dir`.
SweepConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");

/// Read, parse, default and check a configuration file.
SweepConfig validate_config(const std::filesystem::path& path);

/// Re-check invariants after programmatic edits (CLI overrides).
void check_config(SweepConfig& config);

/// Predicted per-mode |alpha|^2 at epsilon_max, using the soft-mode coupling
/// lambda_max(J) in the steady-state amplitude.
double predicted_photon_number(const SweepConfig& config);

inline constexpr double kLeakageThreshold = 1e-4;
inline constexpr double kMaxStateDimension = 4.0e6;

std::vector<double> default_ramp_durations(Machine m);
std::vector<double> default_rates();

}  // namespace cvim

#endif  // CVIM_CONFIG_HPP
