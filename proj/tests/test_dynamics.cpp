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
#include <random>

#include "cvim/dynamics.hpp"
#include "support.hpp"

using namespace cvim;

namespace {

constexpr double kTinyDrive = 1e-12;
constexpr double kTinyKerr = 1e-300;

/// A lossy oscillator with negligible drive and Kerr: a pure-decay reference.
TrajectoryProblem decay_problem(int dim, int n0, double kappa, double duration) {
  const FockDims d{dim};
  TrajectoryProblem p;
  p.hamiltonian = kpo_hamiltonian(-1.0, kTinyKerr, dim);
  p.schedule = DriveSchedule{kTinyDrive, duration, RampDirection::up};
  p.channels = {{destroy(0, d), kappa}};
  p.initial = basis_state(d, std::vector<int>{n0});
  p.sample_times = uniform_samples(duration, 11);
  p.observables = {Observable::expectation("n", destroy(0, d).adjoint() * destroy(0, d))};
  return p;
}

TrajectoryProblem pair_problem(int dim, double kappa, double duration) {
  const FockDims d{dim, dim};
  Eigen::MatrixXd j(2, 2);
  j << 0.0, -0.5, -0.5, 0.0;
  TrajectoryProblem p;
  p.hamiltonian = cvim_hamiltonian(KPOSystemParams::uniform(-1.0, 0.7, kappa, j), d);
  p.schedule = DriveSchedule{1.0, duration, RampDirection::up};
  p.channels = {{destroy(0, d), kappa}, {destroy(1, d), kappa}};
  p.initial = vacuum(d);
  p.sample_times = uniform_samples(duration, 21);
  p.observables = {Observable::expectation("parity", parity_operator(d)),
                   Observable::expectation("n_0", destroy(0, d).adjoint() * destroy(0, d))};
  return p;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("uniform samples include both ends") {
  const auto s = uniform_samples(10.0, 5);
  REQUIRE(s.size() == 5);
  CHECK(s.front() == 0.0);
  CHECK(s.back() == 10.0);
  CHECK(s[2] == doctest::Approx(5.0));
  CHECK_THROWS_AS(uniform_samples(1.0, 1), ParameterError);
}

TEST_CASE("single-photon decay statistics follow exp(-kappa t)") {
  const double kappa = 0.5, duration = 2.0;
  const TrajectoryProblem p = decay_problem(6, 1, kappa, duration);
  const int n = 500;
  int survived = 0;
  for (int s = 0; s < n; ++s) survived += mcwf_trajectory(p, static_cast<std::uint64_t>(s)).jumps.empty();
  const double expected = std::exp(-kappa * duration);
  const double sigma = std::sqrt(expected * (1.0 - expected) / n);
  CHECK(std::abs(survived / double(n) - expected) < 3.0 * sigma);
}

TEST_CASE("every photon eventually leaves: jump count equals the initial Fock number") {
  const TrajectoryProblem p = decay_problem(6, 3, 1.0, 30.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TrajectoryRecord r = mcwf_trajectory(p, s);
    CHECK(r.jumps.size() == 3);
    for (std::size_t k = 1; k < r.jumps.size(); ++k) CHECK(r.jumps[k].time >= r.jumps[k - 1].time);
    CHECK(std::abs(r.final_value("n")) < 1e-9);
  }
}

TEST_CASE("Lindblad photon number decays as n0 exp(-kappa t)") {
  const double kappa = 0.3;
  const TrajectoryProblem p = decay_problem(6, 2, kappa, 5.0);
  const auto rhos = lindblad_evolve(p.hamiltonian, p.schedule, p.channels, DensityMatrix::from_state(p.initial),
                                    p.sample_times);
  const Operator n = destroy(0, FockDims{6}).adjoint() * destroy(0, FockDims{6});
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    CHECK(std::abs(expectation(rhos[k], n).real() - 2.0 * std::exp(-kappa * p.sample_times[k])) < 1e-6);
    CHECK(std::abs(rhos[k].trace() - 1.0) < 1e-9);
  }
  const FockDims big{15, 15};
  const SplitHamiltonian hbig =
      cvim_hamiltonian(KPOSystemParams::uniform(-1.0, 0.5, 0.0, Eigen::MatrixXd::Zero(2, 2)), big);
  CHECK_THROWS_AS(lindblad_evolve(hbig, p.schedule, {}, DensityMatrix::from_state(vacuum(big)), {0.0}), CapacityError);
}

TEST_CASE("trajectory ensemble tracks the Lindblad oracle") {
  const TrajectoryProblem p = pair_problem(5, 0.2, 6.0);
  const auto rhos = lindblad_evolve(p.hamiltonian, p.schedule, p.channels, DensityMatrix::from_state(p.initial),
                                    p.sample_times);
  const Operator n0 = destroy(0, p.initial.dims).adjoint() * destroy(0, p.initial.dims);
  const int n = 200;
  std::vector<double> last(n);
  for (int s = 0; s < n; ++s) last[s] = mcwf_trajectory(p, static_cast<std::uint64_t>(s)).final_value("n_0").real();
  double mean = 0.0, var = 0.0;
  for (double x : last) mean += x / n;
  for (double x : last) var += (x - mean) * (x - mean) / (n - 1);
  const double exact = expectation(rhos.back(), n0).real();
  CHECK(std::abs(mean - exact) < 4.0 * std::sqrt(var / n) + 1e-3);
}

TEST_CASE("closed trajectories coincide with coherent evolution") {
  TrajectoryProblem p = pair_problem(8, 0.0, 10.0);
  p.channels.clear();
  const TrajectoryRecord a = mcwf_trajectory(p, 3);
  const TrajectoryRecord b = evolve_coherent(p.hamiltonian, p.schedule, p.initial, p.sample_times, p.observables);
  CHECK(a.jumps.empty());
  CHECK(fidelity(a.final_state, b.final_state) > 1.0 - 1e-9);
  CHECK(b.norm_drift < 1e-6);
  CHECK(is_closed(p.channels));
  CHECK(is_closed({{destroy(0, p.initial.dims), 0.0}}));
  CHECK_FALSE(is_closed({{destroy(0, p.initial.dims), 0.1}}));
}

TEST_CASE("Fock eigenstates are stationary without drive") {
  const TrajectoryProblem p = decay_problem(8, 3, 0.0, 20.0);
  const TrajectoryRecord r = evolve_coherent(p.hamiltonian, p.schedule, p.initial, p.sample_times, p.observables);
  CHECK(fidelity(r.final_state, p.initial) > 1.0 - 1e-9);
  for (const Complex& v : r.observable("n")) CHECK(std::abs(v - 3.0) < 1e-9);
}

TEST_CASE("coherent drive conserves total parity along the path") {
  TrajectoryProblem p = pair_problem(8, 0.0, 20.0);
  const TrajectoryRecord r = evolve_coherent(p.hamiltonian, p.schedule, p.initial, p.sample_times, p.observables);
  for (const Complex& v : r.observable("parity")) CHECK(std::abs(v - 1.0) < 1e-8);
  CHECK(std::abs(r.final_value("n_0")) > 1e-3);
}

TEST_CASE("each jump flips total parity in the lossy pair") {
  const TrajectoryProblem p = pair_problem(6, 0.3, 12.0);
  int checked = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Operator par = parity_operator(p.initial.dims);
    const TrajectoryRecord r =
        mcwf_trajectory(p, s, [&](const JumpEvent&, const StateVector& before, const StateVector& after) {
          CHECK(std::abs(expectation(before.normalized(), par).real() + expectation(after.normalized(), par).real()) <
                1e-8);
          CHECK(std::abs(after.norm() - 1.0) < 1e-12);
          ++checked;
        });
    const double expected = (r.jumps.size() % 2 == 0) ? 1.0 : -1.0;
    CHECK(std::abs(r.final_value("parity").real() - expected) < 1e-8);
  }
  CHECK(checked > 0);
}

TEST_CASE("trajectories are reproducible from their seed") {
  const TrajectoryProblem p = pair_problem(6, 0.3, 12.0);
  const TrajectoryRecord a = mcwf_trajectory(p, 42), b = mcwf_trajectory(p, 42);
  REQUIRE(a.jumps.size() == b.jumps.size());
  for (std::size_t k = 0; k < a.jumps.size(); ++k) {
    CHECK(a.jumps[k].time == b.jumps[k].time);
    CHECK(a.jumps[k].channel == b.jumps[k].channel);
  }
  CHECK((a.final_state.amplitudes - b.final_state.amplitudes).norm() == 0.0);
  CHECK(a.seed == 42);

  bool any_differs = false;
  for (std::uint64_t s = 43; s < 48 && !any_differs; ++s) {
    const TrajectoryRecord c = mcwf_trajectory(p, s);
    any_differs = c.jumps.size() != a.jumps.size() ||
                  (!c.jumps.empty() && c.jumps.front().time != a.jumps.front().time);
  }
  CHECK(any_differs);
}

TEST_CASE("observables: fidelities and Hermitian expectations are real") {
  const FockDims d{6};
  const Observable n = Observable::expectation("n", destroy(0, d).adjoint() * destroy(0, d));
  const Observable a = Observable::expectation("a", destroy(0, d));
  const Observable f = Observable::fidelity("f", basis_state(d, std::vector<int>{1}));
  CHECK(n.is_real());
  CHECK_FALSE(a.is_real());
  CHECK(f.is_real());
  const Vector psi = coherent_state(6, Complex(0.0, 0.2)).amplitudes;
  CHECK(std::abs(n(psi).imag()) < 1e-15);
  CHECK(a(psi).imag() > 0.19);
  CHECK(f(psi).real() == doctest::Approx(std::norm(psi(1))));
  CHECK_THROWS_AS(n(Vector::Zero(5)), DimensionError);
}

TEST_CASE("leakage tracking reports the top-level population") {
  TrajectoryProblem p = decay_problem(6, 5, 0.0, 1.0);
  p.track_leakage = true;
  CHECK(mcwf_trajectory(p, 0).max_leakage == doctest::Approx(1.0));
  p.initial = basis_state(FockDims{6}, std::vector<int>{3});
  CHECK(mcwf_trajectory(p, 0).max_leakage < 1e-12);
}

TEST_CASE("invalid problems are rejected") {
  TrajectoryProblem p = decay_problem(6, 1, 0.1, 1.0);
  p.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(mcwf_trajectory(p, 0), ParameterError);
  p.sample_times = {2.0};
  CHECK_THROWS_AS(mcwf_trajectory(p, 0), ParameterError);
  p = decay_problem(6, 1, 0.1, 1.0);
  p.channels[0].rate = -1.0;
  CHECK_THROWS_AS(mcwf_trajectory(p, 0), ParameterError);
  p = decay_problem(6, 1, 0.1, 1.0);
  p.initial = vacuum(FockDims{5});
  CHECK_THROWS_AS(mcwf_trajectory(p, 0), DimensionError);
}

TEST_CASE("ensemble aggregation statistics") {
  const TrajectoryProblem p = decay_problem(6, 1, 0.5, 2.0);
  const Evaluator survived = [](const TrajectoryRecord& r) { return r.jumps.empty() ? 1.0 : 0.0; };
  const EnsembleResult e = ensemble_run(p, 60, 7, survived);
  CHECK(e.n_traj == 60);
  CHECK(e.n_failed == 0);
  const double p_hat = e.success_fraction;
  CHECK(e.stderr_success == doctest::Approx(std::sqrt(p_hat * (1.0 - p_hat) / 59.0)));
  CHECK(e.mean_jump_count == doctest::Approx(1.0 - p_hat));
  REQUIRE(e.names.size() == 1);
  // Averaged photon number matches the exact decay law within a few standard errors.
  CHECK(std::abs(e.mean_series[0].back().real() - std::exp(-1.0)) < 0.2);

  // Threads only change scheduling, never results.
  EnsembleOptions two;
  two.workers = 2;
  const EnsembleResult e2 = ensemble_run(p, 60, 7, survived, two);
  CHECK(e2.success_fraction == e.success_fraction);
  CHECK(e2.mean_series[0].back() == e.mean_series[0].back());
  CHECK(trajectory_seed(7, 3) == (7u ^ 3u));
}

TEST_CASE("ensemble failure policy") {
  std::vector<TrajectoryOutcome> outcomes(20);
  for (auto& o : outcomes) {
    o.record = TrajectoryRecord{};
    o.score = 1.0;
  }
  outcomes[0].record.reset();
  outcomes[0].error = "boom";
  outcomes[1].record.reset();
  outcomes[1].error = "boom";
  const EnsembleResult r = aggregate_ensemble(outcomes);
  CHECK(r.n_failed == 2);
  CHECK(r.n_effective() == 18);
  CHECK(r.success_fraction == 1.0);
  CHECK(r.failures.size() == 2);
  outcomes[2].record.reset();
  CHECK_THROWS_AS(aggregate_ensemble(outcomes), EnsembleError);

  const TrajectoryProblem p = decay_problem(6, 1, 0.5, 2.0);
  const TrajectoryOutcome bad = run_outcome(p, 0, [](const TrajectoryRecord&) { return 2.0; }, false);
  CHECK_FALSE(bad.ok());
  CHECK(bad.error.find("outside [0, 1]") != std::string::npos);
}

}  // TEST_SUITE
