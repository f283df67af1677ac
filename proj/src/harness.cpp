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


#include "cvim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "cvim/errors.hpp"
#include "cvim/semiclassical.hpp"

#ifndef CVIM_VERSION
#define CVIM_VERSION "unknown"
#endif

namespace cvim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct CellTask {
  TrajectoryProblem problem;
  bool closed = false;
  std::vector<TrajectoryOutcome> outcomes;
};

}  // namespace

std::string code_version() { return CVIM_VERSION; }

std::uint64_t cell_seed(std::uint64_t base_seed, double duration, double rate) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(duration));
  return splitmix64(h ^ std::bit_cast<std::uint64_t>(rate));
}

SplitHamiltonian sweep_hamiltonian(const SweepConfig& c) {
  if (c.machine == Machine::qubit) {
    QubitAnnealerParams p{c.problem.cost, c.epsilon_max, 1.0, 0.0};
    return qubit_annealer_hamiltonian(p);
  }
  KPOSystemParams p = KPOSystemParams::uniform(c.detuning, c.kerr, 0.0, cvim_coupling(c.problem));
  if (!c.drive_scale.empty()) p.drive_scale = c.drive_scale;
  return cvim_hamiltonian(p, FockDims::uniform(c.problem.size(), c.fock_dim));
}

StateVector annealer_ground_state(const SplitHamiltonian& h, double epsilon) {
  const DenseMatrix m = h.at(epsilon).dense();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m);
  const auto& e = es.eigenvalues();
  if (e.size() > 1 && e(1) - e(0) < 1e-9)
    throw DegenerateStateError("annealer_ground_state: ground state of H(eps) is degenerate");
  Vector v = es.eigenvectors().col(0);
  // Fix the global phase so the largest component is real and positive.
  Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::polar(1.0, -std::arg(v(k)));
  return StateVector(v, h.static_part.dims);
}

TrajectoryProblem cell_problem(const SweepConfig& c, const SplitHamiltonian& h, double duration, double rate) {
  TrajectoryProblem p;
  p.hamiltonian = h;
  p.sample_times = {duration};
  const FockDims& dims = h.static_part.dims;
  const int n = c.problem.size();
  if (c.machine == Machine::qubit) {
    p.schedule = DriveSchedule{c.epsilon_max, duration, RampDirection::down};
    p.initial = annealer_ground_state(h, c.epsilon_max);
    for (int k = 0; k < n; ++k) p.channels.push_back({embed(sigma_z(), k, dims), rate});
  } else {
    p.schedule = DriveSchedule{c.epsilon_max, duration, RampDirection::up};
    p.initial = vacuum(dims);
    for (int k = 0; k < n; ++k) p.channels.push_back({destroy(k, dims), rate});
    p.observables = cvim_observables(dims);
    p.track_leakage = true;
  }
  return p;
}

Evaluator cell_evaluator(const SweepConfig& c, const GroundSolution& ground) {
  if (c.machine == Machine::qubit)
    return [ground](const TrajectoryRecord& r) { return success_qubit(r.final_state, ground); };
  const double floor = c.amplitude_floor;
  return [ground, floor](const TrajectoryRecord& r) { return success_cvim(r, ground, floor) ? 1.0 : 0.0; };
}

SweepResult run_sweep(const SweepConfig& config, const CellHook& on_cell) {
  const auto t0 = Clock::now();
  SweepConfig c = config;
  check_config(c);

  SweepResult result;
  result.config = c;
  result.ground = brute_force_ground(c.problem);
  const SplitHamiltonian h = sweep_hamiltonian(c);
  const Evaluator evaluate = cell_evaluator(c, result.ground);

  std::vector<CellTask> tasks;
  for (double duration : c.ramp_durations)
    for (double rate : c.rates) {
      CellResult cell;
      cell.duration = duration;
      cell.rate = rate;
      cell.seed = cell_seed(c.base_seed, duration, rate);
      result.cells.push_back(cell);
      CellTask task;
      task.problem = cell_problem(c, h, duration, rate);
      task.closed = is_closed(task.problem.channels);
      task.outcomes.resize(task.closed ? 1 : static_cast<std::size_t>(c.n_traj));
      tasks.push_back(std::move(task));
    }

  // Flat queue of (cell, trajectory) pairs; the longest ramps go first so
  // the pool drains evenly.
  std::vector<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    for (std::size_t k = 0; k < tasks[i].outcomes.size(); ++k) queue.emplace_back(i, k);
  std::stable_sort(queue.begin(), queue.end(), [&](const auto& a, const auto& b) {
    return result.cells[a.first].duration > result.cells[b.first].duration;
  });

  std::vector<std::atomic<std::size_t>> remaining(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) remaining[i] = tasks[i].outcomes.size();
  std::mutex finish_mutex;

  const auto finish_cell = [&](std::size_t i) {
    CellTask& task = tasks[i];
    CellResult& cell = result.cells[i];
    std::vector<TrajectoryOutcome> outcomes;
    if (task.closed) {
      outcomes.assign(static_cast<std::size_t>(c.n_traj), task.outcomes.front());
    } else {
      outcomes = std::move(task.outcomes);
    }
    task.outcomes.clear();
    try {
      cell.ensemble = aggregate_ensemble(std::move(outcomes));
      cell.valid = cell.ensemble.max_leakage <= kLeakageThreshold;
    } catch (const std::exception& e) {
      cell.valid = false;
      cell.error = e.what();
      cell.ensemble.n_traj = c.n_traj;
      cell.ensemble.n_failed = c.n_traj;
      cell.ensemble.success_fraction = std::nan("");
      cell.ensemble.stderr_success = std::nan("");
      cell.ensemble.mean_jump_count = std::nan("");
    }
    std::lock_guard lock(finish_mutex);
    if (on_cell) on_cell(cell);
  };

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t q = next++; q < queue.size(); q = next++) {
      const auto [i, k] = queue[q];
      tasks[i].outcomes[k] = run_outcome(tasks[i].problem, trajectory_seed(result.cells[i].seed, k), evaluate, false);
      if (--remaining[i] == 0) finish_cell(i);
    }
  };
  const int workers = std::clamp<int>(c.workers, 1, static_cast<int>(std::max<std::size_t>(queue.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  result.wall_seconds = seconds_since(t0);
  return result;
}

void write_grid_csv(std::ostream& os, const SweepResult& result) {
  os << "T_us,rate_per_us,success,mean_jumps,stderr_success,n_traj\n";
  for (const auto& cell : result.cells)
    os << num(cell.duration) << ',' << num(cell.rate) << ',' << num(cell.ensemble.success_fraction) << ','
       << num(cell.ensemble.mean_jump_count) << ',' << num(cell.ensemble.stderr_success) << ','
       << cell.ensemble.n_effective() << '\n';
}

nlohmann::json sweep_manifest(const SweepResult& result) {
  const SweepConfig& c = result.config;
  nlohmann::json j;
  j["kind"] = "sweep";
  j["code_version"] = code_version();
  j["config"] = c.to_json();
  j["seed"] = c.base_seed;
  j["wall_clock_seconds"] = result.wall_seconds;
  j["warnings"] = c.warnings;
  j["ground"] = {{"energy", result.ground.energy}, {"configs", result.ground.configs}};
  nlohmann::json trunc;
  if (c.machine == Machine::cvim) {
    trunc["fock_dim"] = c.fock_dim;
    trunc["recommended_fock_dim"] = c.recommended_fock_dim;
    trunc["predicted_photon_number"] = predicted_photon_number(c);
  }
  trunc["leakage_threshold"] = kLeakageThreshold;
  double worst = 0.0;
  bool all_valid = true;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    worst = std::max(worst, cell.ensemble.max_leakage);
    all_valid = all_valid && cell.valid;
    nlohmann::json e{{"T_us", cell.duration},
                     {"rate_per_us", cell.rate},
                     {"inverse_ramp_rate", cell.inverse_ramp_rate(c.epsilon_max)},
                     {"seed", cell.seed},
                     {"valid", cell.valid},
                     {"max_leakage", cell.ensemble.max_leakage},
                     {"n_failed", cell.ensemble.n_failed},
                     {"stderr_jumps", cell.ensemble.stderr_jumps}};
    if (!cell.error.empty()) e["error"] = cell.error;
    if (!cell.ensemble.failures.empty()) e["failures"] = cell.ensemble.failures;
    cells.push_back(e);
  }
  trunc["max_leakage"] = worst;
  trunc["all_cells_valid"] = all_valid;
  j["truncation"] = trunc;
  j["cells"] = cells;
  return j;
}

std::vector<SeriesColumn> series_columns(const TrajectoryRecord& record, const std::vector<Observable>& observables) {
  std::vector<SeriesColumn> out;
  for (std::size_t k = 0; k < record.names.size(); ++k) {
    const bool real = k < observables.size() ? observables[k].is_real() : false;
    out.push_back({record.names[k], record.series[k], real});
  }
  return out;
}

void write_timeseries_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SeriesColumn>& columns) {
  os << "t_us";
  for (const auto& col : columns) {
    if (col.values.size() != times.size()) throw DimensionError("write_timeseries_csv: column " + col.name + " length mismatch");
    if (col.real) os << ',' << col.name;
    else os << ',' << col.name << ".re," << col.name << ".im";
  }
  os << '\n';
  for (std::size_t t = 0; t < times.size(); ++t) {
    os << num(times[t]);
    for (const auto& col : columns) {
      os << ',' << num(col.values[t].real());
      if (!col.real) os << ',' << num(col.values[t].imag());
    }
    os << '\n';
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  return p.replace_extension(".json");
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::filesystem::path> write_sweep(const SweepResult& result, const std::filesystem::path& csv_path) {
  std::ostringstream csv;
  write_grid_csv(csv, result);
  write_file(csv_path, csv.str());
  const auto mpath = manifest_path(csv_path);
  write_file(mpath, sweep_manifest(result).dump(2) + "\n");
  return {csv_path, mpath};
}

// ---------------------------------------------------------------------------
// Presets

std::optional<Preset> preset_from_name(std::string_view name) {
  for (Preset p : {Preset::fig2a, Preset::fig2b, Preset::fig3a_slice, Preset::fig3c_slice})
    if (preset_name(p) == name) return p;
  return std::nullopt;
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::fig2a: return "fig2a";
    case Preset::fig2b: return "fig2b";
    case Preset::fig3a_slice: return "fig3a_slice";
    case Preset::fig3c_slice: return "fig3c_slice";
  }
  return "";
}

SweepConfig preset_sweep_config(Preset p) {
  const std::string assets = "[problem]\nassets = 4, 5, 6, 7\n";
  std::string text;
  if (p == Preset::fig3a_slice) {
    text = "[machine]\ntype = cvim\n" + assets +
           "[physics]\ndetuning = -1.5\nkerr = 0.6\nepsilon_max = 2\nfock_dim = 10\n"
           "[output]\npath = fig3a_slice.csv\n";
  } else if (p == Preset::fig3c_slice) {
    text = "[machine]\ntype = qubit\n" + assets + "[physics]\nepsilon_max = 6\n[output]\npath = fig3c_slice.csv\n";
  } else {
    throw ParameterError("preset_sweep_config: " + std::string(preset_name(p)) + " is not a grid preset");
  }
  return parse_config(text);
}

namespace {

struct TwoModeSetup {
  double detuning = -1.0, coupling = -0.5, kerr = 0.7, epsilon_max = 2.0, duration = 400.0;
  int dim = 20;

  KPOSystemParams params(double loss) const {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, coupling, coupling, 0.0;
    return KPOSystemParams::uniform(detuning, kerr, loss, j);
  }
  FockDims dims() const { return FockDims::uniform(2, dim); }

  std::vector<Observable> observables() const {
    const FockDims d = dims();
    const double alpha = std::abs(steady_amplitude(detuning, coupling, kerr, epsilon_max, 0.0));
    const std::vector<Complex> anti{alpha, -alpha}, ferro{alpha, alpha};
    return {Observable::fidelity("fid_vac", vacuum(d)),
            Observable::fidelity("fid_phi_plus", cat_state(d, anti, +1)),
            Observable::fidelity("fid_phi_minus", cat_state(d, anti, -1)),
            Observable::fidelity("fid_psi_plus", cat_state(d, ferro, +1)),
            Observable::expectation(photon_number_name(0), destroy(0, d).adjoint() * destroy(0, d)),
            Observable::expectation(photon_number_name(1), destroy(1, d).adjoint() * destroy(1, d)),
            Observable::expectation(correlation_name(0, 1), destroy(0, d).adjoint() * destroy(1, d))};
  }

  nlohmann::json echo(double loss) const {
    return {{"detuning", detuning}, {"coupling", coupling}, {"kerr", kerr},         {"loss", loss},
            {"epsilon_max", epsilon_max}, {"duration_us", duration}, {"fock_dim", dim},
            {"cat_amplitude", std::abs(steady_amplitude(detuning, coupling, kerr, epsilon_max, 0.0))}};
  }
};

std::vector<std::filesystem::path> run_two_mode_preset(Preset p, const PresetOptions& o) {
  const auto t0 = Clock::now();
  const TwoModeSetup s;
  const double loss = p == Preset::fig2a ? 0.0 : 0.01;
  const TrajectoryProblem prob = two_kpo_anneal_problem(loss);
  const TrajectoryRecord rec = mcwf_trajectory(prob, o.seed);

  const std::string stem(preset_name(p));
  const auto csv_path = o.out_dir / (stem + ".csv");
  std::ostringstream csv;
  write_timeseries_csv(csv, rec.sample_times, series_columns(rec, prob.observables));
  std::vector<std::filesystem::path> written{csv_path};
  write_file(csv_path, csv.str());

  nlohmann::json m;
  m["kind"] = "timeseries";
  m["preset"] = stem;
  m["code_version"] = code_version();
  m["config"] = s.echo(loss);
  m["seed"] = o.seed;
  m["truncation"] = {{"fock_dim", s.dim},
                     {"max_leakage", rec.max_leakage},
                     {"leakage_threshold", kLeakageThreshold},
                     {"valid", rec.max_leakage <= kLeakageThreshold},
                     {"norm_drift", rec.norm_drift}};
  m["steps"] = rec.steps;
  m["jump_count"] = rec.jumps.size();

  if (p == Preset::fig2b) {
    const auto jumps_path = o.out_dir / (stem + "_jumps.csv");
    std::ostringstream jc;
    jc << "t_us,mode\n";
    for (const auto& ev : rec.jumps) jc << num(ev.time) << ',' << ev.channel << '\n';
    write_file(jumps_path, jc.str());
    written.push_back(jumps_path);
  }
  m["wall_clock_seconds"] = seconds_since(t0);
  for (std::size_t k = 0, n = written.size(); k < n; ++k) {
    const auto mp = manifest_path(written[k]);
    nlohmann::json mk = m;
    mk["csv"] = written[k].filename().generic_string();
    write_file(mp, mk.dump(2) + "\n");
    written.push_back(mp);
  }
  return written;
}

}  // namespace

TrajectoryProblem two_kpo_anneal_problem(double loss) {
  const TwoModeSetup s;
  const FockDims dims = s.dims();
  TrajectoryProblem prob;
  prob.hamiltonian = cvim_hamiltonian(s.params(loss), dims);
  prob.schedule = DriveSchedule{s.epsilon_max, s.duration, RampDirection::up};
  prob.initial = vacuum(dims);
  prob.sample_times = uniform_samples(s.duration, 401);
  prob.observables = s.observables();
  prob.track_leakage = true;
  if (loss > 0.0)
    for (int k = 0; k < 2; ++k) prob.channels.push_back({destroy(k, dims), loss});
  return prob;
}

std::vector<std::filesystem::path> run_preset(Preset p, const PresetOptions& o) {
  if (p == Preset::fig2a || p == Preset::fig2b) return run_two_mode_preset(p, o);
  SweepConfig c = preset_sweep_config(p);
  c.base_seed = o.seed;
  c.workers = o.workers;
  if (o.n_traj) c.n_traj = *o.n_traj;
  check_config(c);
  const SweepResult r = run_sweep(c);
  return write_sweep(r, o.out_dir / c.output_path.filename());
}

}  // namespace cvim
