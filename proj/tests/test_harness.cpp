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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cvim/harness.hpp"

using namespace cvim;

namespace {

SweepConfig small_config(const std::string& machine, const std::string& sweep) {
  return parse_config("[machine]\ntype = " + machine + "\n[problem]\nassets = 1, 1\n[sweep]\n" + sweep);
}

std::string grid_csv(const SweepResult& r) {
  std::ostringstream os;
  write_grid_csv(os, r);
  return os.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("closed two-spin sweep cell succeeds without jumps") {
  const SweepResult r = run_sweep(small_config("cvim", "ramp_durations = 10\nrates = 0\nn_traj = 3\n"));
  REQUIRE(r.cells.size() == 1);
  const CellResult& cell = r.cells[0];
  CHECK(cell.valid);
  CHECK(cell.ensemble.success_fraction == 1.0);
  CHECK(cell.ensemble.mean_jump_count == 0.0);
  CHECK(cell.ensemble.n_traj == 3);
  CHECK(cell.inverse_ramp_rate(r.config.epsilon_max) == doctest::Approx(5.0));
  CHECK(r.ground.energy == doctest::Approx(-1.0));
}

TEST_CASE("grid CSV layout") {
  const SweepResult r = run_sweep(small_config("cvim", "ramp_durations = 5, 10\nrates = 0, 0.01\nn_traj = 2\n"));
  const auto rows = lines(grid_csv(r));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "T_us,rate_per_us,success,mean_jumps,stderr_success,n_traj");
  CHECK(rows[1].rfind("5,0,", 0) == 0);
  CHECK(rows[2].rfind("5,0.01,", 0) == 0);
  CHECK(rows[4].rfind("10,0.01,", 0) == 0);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].substr(rows[k].rfind(',') + 1) == "2");
}

TEST_CASE("same seed gives a byte-identical grid, independent of worker count") {
  SweepConfig c = small_config("cvim", "ramp_durations = 5, 8\nrates = 0.05, 0.2\nn_traj = 6\nseed = 21\n");
  const std::string a = grid_csv(run_sweep(c));
  const std::string b = grid_csv(run_sweep(c));
  c.workers = 3;
  const std::string d = grid_csv(run_sweep(c));
  CHECK(a == b);
  CHECK(a == d);
  c.base_seed = 22;
  CHECK(grid_csv(run_sweep(c)) != a);
}

TEST_CASE("a cell's result does not depend on the rest of the grid") {
  const SweepResult wide = run_sweep(small_config("cvim", "ramp_durations = 5, 8\nrates = 0.05, 0.2\nn_traj = 6\n"));
  const SweepResult narrow = run_sweep(small_config("cvim", "ramp_durations = 8\nrates = 0.2\nn_traj = 6\n"));
  const CellResult& a = wide.cells.back();
  const CellResult& b = narrow.cells.front();
  CHECK(a.duration == b.duration);
  CHECK(a.seed == b.seed);
  CHECK(a.ensemble.mean_jump_count == b.ensemble.mean_jump_count);
  CHECK(a.ensemble.success_fraction == b.ensemble.success_fraction);
}

TEST_CASE("cell seeds are distinct across the grid") {
  std::set<std::uint64_t> seeds;
  for (double t : {25.0, 50.0, 100.0, 200.0})
    for (double r : default_rates()) seeds.insert(cell_seed(1, t, r));
  CHECK(seeds.size() == 16);
  CHECK(cell_seed(1, 25.0, 0.01) == cell_seed(1, 25.0, 0.01));
  CHECK(cell_seed(1, 25.0, 0.01) != cell_seed(2, 25.0, 0.01));
}

TEST_CASE("qubit annealer: a dephasing event costs success") {
  const SweepConfig c = small_config("qubit", "ramp_durations = 75\nrates = 0.01\nn_traj = 40\n");
  const GroundSolution ground = brute_force_ground(c.problem);
  const SplitHamiltonian h = sweep_hamiltonian(c);

  const TrajectoryProblem closed = cell_problem(c, h, 75.0, 0.0);
  CHECK(success_qubit(mcwf_trajectory(closed, 1).final_state, ground) > 0.95);

  EnsembleOptions keep;
  keep.keep_records = true;
  const EnsembleResult e = ensemble_run(cell_problem(c, h, 75.0, 0.01), 40, 3, cell_evaluator(c, ground), keep);
  double quiet = 0.0, noisy = 0.0;
  int n_quiet = 0, n_noisy = 0;
  for (const TrajectoryRecord& r : e.records) {
    const double s = success_qubit(r.final_state, ground);
    if (r.jumps.empty()) quiet += s, ++n_quiet;
    else noisy += s, ++n_noisy;
  }
  REQUIRE(n_quiet > 0);
  REQUIRE(n_noisy > 0);
  CHECK(quiet / n_quiet > 0.95);
  CHECK(noisy / n_noisy < 0.8);
}

TEST_CASE("annealer start state is the transverse-field ground state") {
  const SweepConfig c = small_config("qubit", "ramp_durations = 75\nrates = 0\n");
  const SplitHamiltonian h = sweep_hamiltonian(c);
  const StateVector g = annealer_ground_state(h, c.epsilon_max);
  const Vector hg = h.at(c.epsilon_max).matrix * g.amplitudes;
  const Complex e = g.amplitudes.dot(hg);
  CHECK((hg - e * g.amplitudes).norm() < 1e-10);
  CHECK(std::abs(g.norm() - 1.0) < 1e-12);
}

TEST_CASE("time-series CSV splits complex columns") {
  std::ostringstream os;
  write_timeseries_csv(os, {0.0, 0.5},
                       {{"n_0", {Complex(1.0), Complex(2.0)}, true},
                        {"corr_0_1", {Complex(0.5, -0.25), Complex(0.0, 1.0)}, false}});
  const auto rows = lines(os.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "t_us,n_0,corr_0_1.re,corr_0_1.im");
  CHECK(rows[1] == "0,1,0.5,-0.25");
  CHECK(rows[2] == "0.5,2,0,1");
  std::ostringstream bad;
  CHECK_THROWS_AS(write_timeseries_csv(bad, {0.0}, {{"x", {}, true}}), DimensionError);
}

TEST_CASE("series columns follow observable realness") {
  const FockDims d{6, 6};
  TrajectoryRecord r;
  r.sample_times = {0.0};
  const auto obs = cvim_observables(d);
  for (const auto& o : obs) {
    r.names.push_back(o.name());
    r.series.push_back({o(vacuum(d).amplitudes)});
  }
  const auto cols = series_columns(r, obs);
  REQUIRE(cols.size() == 3);
  CHECK_FALSE(cols[0].real);
  CHECK(cols[1].real);
}

TEST_CASE("sweep output writes a CSV and a manifest beside it") {
  const auto dir = std::filesystem::temp_directory_path() / "cvim_harness_test";
  std::filesystem::remove_all(dir);
  const SweepResult r = run_sweep(small_config("cvim", "ramp_durations = 5\nrates = 0, 0.05\nn_traj = 2\nseed = 4\n"));
  const auto written = write_sweep(r, dir / "nested" / "grid.csv");
  REQUIRE(written.size() == 2);
  CHECK(std::filesystem::exists(dir / "nested" / "grid.csv"));
  CHECK(manifest_path(dir / "nested" / "grid.csv") == dir / "nested" / "grid.json");
  std::ifstream in(dir / "nested" / "grid.json");
  const nlohmann::json m = nlohmann::json::parse(in);
  CHECK(m["seed"] == 4);
  CHECK(m["config"]["sweep"]["rates"].size() == 2);
  CHECK(m["wall_clock_seconds"].get<double>() >= 0.0);
  CHECK(m["truncation"]["fock_dim"] == r.config.fock_dim);
  CHECK(m["truncation"]["all_cells_valid"] == true);
  CHECK(m["truncation"]["max_leakage"].get<double>() < kLeakageThreshold);
  CHECK(m["cells"].size() == 2);
  CHECK(m.contains("code_version"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("preset names") {
  for (Preset p : {Preset::fig2a, Preset::fig2b, Preset::fig3a_slice, Preset::fig3c_slice})
    CHECK(preset_from_name(preset_name(p)) == p);
  CHECK_FALSE(preset_from_name("fig9").has_value());
  const SweepConfig a = preset_sweep_config(Preset::fig3a_slice);
  CHECK(a.machine == Machine::cvim);
  CHECK(a.problem.assets == std::vector<long>{4, 5, 6, 7});
  const SweepConfig q = preset_sweep_config(Preset::fig3c_slice);
  CHECK(q.machine == Machine::qubit);
  CHECK(q.epsilon_max == 6.0);
}

}  // TEST_SUITE
