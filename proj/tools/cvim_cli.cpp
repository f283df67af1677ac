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


#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvim/config.hpp"
#include "cvim/errors.hpp"
#include "cvim/harness.hpp"
#include "cvim/ising.hpp"
#include "cvim/semiclassical.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> n_traj;
  fs::path out_dir = ".";
};

std::string spins_text(const cvim::Spins& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::string(s[i] > 0 ? "+1" : "-1");
  return out + ")";
}

void print_warnings(const cvim::SweepConfig& c) {
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_sweep(const fs::path& config_path, const GlobalFlags& g) {
  cvim::SweepConfig c = cvim::validate_config(config_path);
  if (g.seed) c.base_seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  if (g.n_traj) c.n_traj = *g.n_traj;
  cvim::check_config(c);
  print_warnings(c);
  const auto r = cvim::run_sweep(c, [&](const cvim::CellResult& cell) {
    std::fprintf(stderr, "cell T=%g rate=%g success=%.4f jumps=%.3f%s\n", cell.duration, cell.rate,
                 cell.ensemble.success_fraction, cell.ensemble.mean_jump_count, cell.valid ? "" : " [invalid]");
  });
  const fs::path csv = c.output_path.is_absolute() ? c.output_path : g.out_dir / c.output_path;
  for (const auto& p : cvim::write_sweep(r, csv)) std::cout << p.generic_string() << "\n";
  return 0;
}

int cmd_preset(const std::string& name, const GlobalFlags& g) {
  const auto p = cvim::preset_from_name(name);
  if (!p) {
    std::cerr << "unknown preset '" << name << "' (fig2a, fig2b, fig3a_slice, fig3c_slice)\n";
    return 2;
  }
  cvim::PresetOptions o;
  o.out_dir = g.out_dir;
  if (g.seed) o.seed = *g.seed;
  if (g.workers) o.workers = *g.workers;
  o.n_traj = g.n_traj;
  if (*p == cvim::Preset::fig3a_slice || *p == cvim::Preset::fig3c_slice) print_warnings(cvim::preset_sweep_config(*p));
  for (const auto& path : cvim::run_preset(*p, o)) std::cout << path.generic_string() << "\n";
  return 0;
}

int cmd_oracle(const fs::path& file) {
  const auto ext = file.extension().string();
  cvim::IsingProblem problem;
  if (ext == ".ini" || ext == ".toml" || ext == ".cfg")
    problem = cvim::validate_config(file).problem;
  else
    problem = cvim::npp_to_ising(cvim::read_asset_file(file));
  const auto g = cvim::brute_force_ground(problem);
  std::printf("energy %.12g\n", g.energy);
  for (const auto& s : g.configs) std::cout << "config " << spins_text(s) << "\n";
  return 0;
}

int cmd_thresholds(double detuning, double coupling, double loss, std::optional<double> kerr,
                   std::optional<double> epsilon) {
  const auto t = cvim::bifurcation_thresholds(detuning, coupling, loss);
  std::printf("eps_soft %.12g\neps_hard %.12g\n", t.soft, t.hard);
  if (kerr && epsilon) {
    const auto a = cvim::steady_amplitude(detuning, coupling, *kerr, *epsilon, loss);
    std::printf("alpha_abs %.12g\nalpha_phase %.12g\nphoton_number %.12g\n", std::abs(a), std::arg(a) + 0.0, std::norm(a));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable Ising machine simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cvim::code_version());

  GlobalFlags g;
  std::uint64_t seed = 0;
  int workers = 0, n_traj = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Base random seed")->check(CLI::NonNegativeNumber);
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* ntraj_opt = app.add_option("--n-traj", n_traj, "Trajectories per grid cell")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for CSV and manifest output");

  fs::path config_path, oracle_path;
  std::string preset;
  double detuning = -1.0, coupling = -0.5, loss = 0.0, kerr = 0.0, epsilon = 0.0;

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a config file")->fallthrough();
  sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  auto* pre = app.add_subcommand("preset", "Run a built-in experiment")->fallthrough();
  pre->add_option("name", preset, "fig2a | fig2b | fig3a_slice | fig3c_slice")->required();
  auto* oracle = app.add_subcommand("oracle", "Brute-force Ising ground states of a problem file")->fallthrough();
  oracle->add_option("problem-file", oracle_path, "Asset list (one integer per line) or config file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* thr = app.add_subcommand("thresholds", "Soft and hard bifurcation thresholds")->fallthrough();
  thr->add_option("--detuning", detuning, "Detuning")->capture_default_str();
  thr->add_option("--coupling", coupling, "Coupling J")->capture_default_str();
  thr->add_option("--loss", loss, "Photon loss rate")->capture_default_str();
  auto* kerr_opt = thr->add_option("--kerr", kerr, "Kerr strength (with --epsilon: steady amplitude)");
  auto* eps_opt = thr->add_option("--epsilon", epsilon, "Drive strength (with --kerr)");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*workers_opt) g.workers = workers;
  if (*ntraj_opt) g.n_traj = n_traj;

  try {
    if (*sweep) return cmd_sweep(config_path, g);
    if (*pre) return cmd_preset(preset, g);
    if (*oracle) return cmd_oracle(oracle_path);
    if (*thr)
      return cmd_thresholds(detuning, coupling, loss, *kerr_opt ? std::optional(kerr) : std::nullopt,
                            *eps_opt ? std::optional(epsilon) : std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
