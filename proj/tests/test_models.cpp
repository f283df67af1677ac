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
#include "cvim/ising.hpp"
#include "cvim/models.hpp"
#include "support.hpp"

using namespace cvim;

namespace {

Eigen::MatrixXd pair_coupling(double j) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, j, j, 0.0;
  return m;
}

/// Eigenvalues of `h` restricted to states with total photon number <= nmax.
Eigen::VectorXd low_block_spectrum(const Operator& h, int nmax) {
  std::vector<Index> keep;
  for (Index k = 0; k < h.dims.total(); ++k) {
    const auto occ = h.dims.occupation(k);
    if (occ[0] + occ[1] <= nmax) keep.push_back(k);
  }
  const DenseMatrix full = h.dense();
  DenseMatrix block(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      block(static_cast<Index>(i), static_cast<Index>(j)) = full(keep[i], keep[j]);
  return test::sorted_eigenvalues(block);
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("single KPO: vacuum is an eigenstate and the one-photon level sits at the detuning") {
  const double delta = -1.0, k = 0.7;
  const SplitHamiltonian h = kpo_hamiltonian(delta, k, 12);
  const FockDims d{12};
  CHECK((h.static_part.matrix * vacuum(d).amplitudes).norm() < 1e-15);
  CHECK(std::abs(h.static_part.matrix.coeff(1, 1) - Complex(delta)) < 1e-15);
  // Kerr shifts level n by -K n (n - 1).
  CHECK(std::abs(h.static_part.matrix.coeff(3, 3) - Complex(3 * delta - 6 * k)) < 1e-12);
  CHECK(hermiticity_error(h.static_part) < 1e-15);
  CHECK(hermiticity_error(h.drive_total()) < 1e-15);
  CHECK_THROWS_AS(kpo_hamiltonian(delta, k, 3), DimensionError);
}

TEST_CASE("single KPO without Kerr: Bogoliubov spectrum below |Delta|/2, unbounded above") {
  // H = Delta n + eps (a^2 + a^dagger^2) with Delta < 0 has the top levels
  // (|Delta| - w)/2 - m w, w = sqrt(Delta^2 - 4 eps^2), while 2|eps| < |Delta|.
  const double delta = -1.0;
  const SplitHamiltonian h = kpo_hamiltonian(delta, 0.0 + 1e-300, 120);
  for (double eps : {0.1, 0.3}) {
    const Eigen::VectorXd e = test::sorted_eigenvalues(h.at(eps).dense());
    const double w = std::sqrt(delta * delta - 4.0 * eps * eps);
    for (int m = 0; m < 3; ++m) CHECK(std::abs(e(e.size() - 1 - m) - ((std::abs(delta) - w) / 2.0 - m * w)) < 1e-6);
  }
  // Above |Delta|/2 the quadratic form is indefinite: the top level runs away with truncation.
  const double top60 = test::sorted_eigenvalues(kpo_hamiltonian(delta, 1e-300, 60).at(0.7).dense()).maxCoeff();
  const double top120 = test::sorted_eigenvalues(h.at(0.7).dense()).maxCoeff();
  CHECK(top120 > top60 + 5.0);
}

TEST_CASE("N = 1 machine reduces to the single KPO") {
  const SplitHamiltonian a = kpo_hamiltonian(-1.2, 0.4, 9);
  const SplitHamiltonian b = cvim_hamiltonian(KPOSystemParams::uniform(-1.2, 0.4, 0.0, Eigen::MatrixXd::Zero(1, 1)),
                                              FockDims{9});
  CHECK(test::max_abs_dense(a.static_part.dense() - b.static_part.dense()) < 1e-15);
  CHECK(test::max_abs_dense(a.drive_total().dense() - b.drive_total().dense()) < 1e-15);
}

TEST_CASE("two-KPO machine conserves total parity") {
  const FockDims d{10, 10};
  const SplitHamiltonian h = cvim_hamiltonian(KPOSystemParams::uniform(-1.0, 0.7, 0.0, pair_coupling(-0.5)), d);
  const Operator p = parity_operator(d);
  for (double eps : {0.0, 0.25, 1.0, 2.0}) CHECK(max_abs(commutator(h.at(eps), p)) < 1e-10);
  CHECK(hermiticity_error(h.static_part) < 1e-10);
}

TEST_CASE("property: random machines are Hermitian and parity-conserving") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.3, 0.3), kd(0.1, 1.0), ed(0.0, 3.0);
  const FockDims d{4, 5, 4};
  const Operator p = parity_operator(d);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) j(a, b) = j(b, a) = u(rng);
    KPOSystemParams params = KPOSystemParams::uniform(-1.5, kd(rng), 0.0, j);
    params.kerr = {kd(rng), kd(rng), kd(rng)};
    params.drive_scale = {1.0, 0.8, 1.2};
    const SplitHamiltonian h = cvim_hamiltonian(params, d);
    const Operator ht = h.at(ed(rng));
    CHECK(hermiticity_error(ht) < 1e-10);
    CHECK(max_abs(commutator(ht, p)) < 1e-10);
  }
}

TEST_CASE("uncoupled KPOs evolve as a product state") {
  const int dim = 10;
  const FockDims d{dim, dim};
  const DriveSchedule ramp{0.6, 6.0, RampDirection::up};
  const SplitHamiltonian single = kpo_hamiltonian(-1.0, 0.7, dim);
  const SplitHamiltonian pair = cvim_hamiltonian(KPOSystemParams::uniform(-1.0, 0.7, 0.0, pair_coupling(0.0)), d);
  const StateVector a0 = basis_state(FockDims{dim}, std::vector<int>{1});
  const StateVector b0 = vacuum(FockDims{dim});
  const std::vector<StateVector> factors{a0, b0};
  const std::vector<double> samples{6.0};
  const auto ra = evolve_coherent(single, ramp, a0, samples);
  const auto rb = evolve_coherent(single, ramp, b0, samples);
  const auto rab = evolve_coherent(pair, ramp, product_state(factors), samples);
  const std::vector<StateVector> finals{ra.final_state, rb.final_state};
  CHECK(fidelity(product_state(finals), rab.final_state) > 1.0 - 1e-7);
}

TEST_CASE("normal-mode form with the remainder is unitarily equivalent to the lab frame") {
  const double delta = -1.0, j = -0.5, k = 0.7;
  const FockDims d{12, 12};
  const SplitHamiltonian lab = cvim_hamiltonian(KPOSystemParams::uniform(delta, k, 0.0, pair_coupling(j)), d);
  const SplitHamiltonian nm = two_kpo_normal_mode_hamiltonian(delta, j, k, d, NormalModeForm::exact);
  // The beam splitter maps the n_tot <= 11 block of the truncated space onto itself.
  for (double eps : {0.0, 0.4, 1.3}) {
    const Eigen::VectorXd a = low_block_spectrum(lab.at(eps), 11);
    const Eigen::VectorXd b = low_block_spectrum(nm.at(eps), 11);
    REQUIRE(a.size() == b.size());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("normal-mode detunings and the K = 0 limit") {
  const double delta = -1.0, j = -0.5;
  const FockDims d{6, 6};
  const SplitHamiltonian rwa = two_kpo_normal_mode_hamiltonian(delta, j, 0.7, d, NormalModeForm::rotating_wave);
  const Index d1 = d.flat_index(std::vector<int>{1, 0}), c1 = d.flat_index(std::vector<int>{0, 1});
  CHECK(std::abs(rwa.static_part.matrix.coeff(d1, d1) - Complex(delta + j)) < 1e-14);
  CHECK(std::abs(rwa.static_part.matrix.coeff(c1, c1) - Complex(delta - j)) < 1e-14);
  // The rotating-wave form conserves each normal-mode parity separately.
  const Operator pd = embed(parity_operator(FockDims{6}), 0, d);
  CHECK(max_abs(commutator(rwa.static_part, pd)) < 1e-12);

  const SplitHamiltonian free = two_kpo_normal_mode_hamiltonian(delta, j, 0.0, d, NormalModeForm::exact);
  const Operator nd = destroy(0, d).adjoint() * destroy(0, d), nc = destroy(1, d).adjoint() * destroy(1, d);
  CHECK(test::max_abs_dense(free.static_part.dense() - ((delta + j) * nd + (delta - j) * nc).dense()) < 1e-14);
}

TEST_CASE("qubit annealer: Ising diagonal matches the brute-force energies") {
  const std::vector<long> assets{4, 5, 6, 7};
  const IsingProblem prob = npp_to_ising(assets);
  const SplitHamiltonian h = qubit_annealer_hamiltonian(QubitAnnealerParams{prob.cost, 6.0, 100.0, 0.0});
  const DenseMatrix hi = h.static_part.dense();
  CHECK(test::max_abs_dense(hi - DenseMatrix(hi.diagonal().asDiagonal())) == 0.0);
  for (Index s = 0; s < 16; ++s) CHECK(std::abs(hi(s, s).real() - prob.energy(spins_from_index(s, 4))) < 1e-12);
}

TEST_CASE("qubit annealer: strong transverse field ground state is the all-minus product") {
  const IsingProblem prob = npp_to_ising(std::vector<long>{4, 5, 6, 7});
  const SplitHamiltonian h = qubit_annealer_hamiltonian(QubitAnnealerParams{prob.cost, 6.0, 100.0, 0.0});
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.at(6.0).dense());
  const Vector g = es.eigenvectors().col(0);
  const Vector minus = Vector::Constant(16, Complex(0.25)).cwiseProduct(Vector::NullaryExpr(16, [](Index s) {
    return Complex(std::popcount(static_cast<unsigned>(s)) % 2 ? -1.0 : 1.0);
  }));
  CHECK(std::norm(minus.dot(g)) > 0.99);
  CHECK_THROWS_AS(qubit_annealer_hamiltonian(QubitAnnealerParams{Eigen::MatrixXd::Zero(13, 13), 6.0, 1.0, 0.0}),
                  CapacityError);
}

TEST_CASE("drive schedules") {
  const DriveSchedule up{2.0, 400.0, RampDirection::up}, down{6.0, 300.0, RampDirection::down};
  CHECK(up(0.0) == 0.0);
  CHECK(up(100.0) == doctest::Approx(0.5));
  CHECK(up(400.0) == doctest::Approx(2.0));
  CHECK(down(0.0) == doctest::Approx(6.0));
  CHECK(down(300.0) == doctest::Approx(0.0));
  CHECK(up.slope() == doctest::Approx(0.005));
  CHECK_THROWS_AS((DriveSchedule{0.0, 1.0, RampDirection::up}.validate()), ParameterError);
  CHECK_THROWS_AS((DriveSchedule{1.0, -1.0, RampDirection::up}.validate()), ParameterError);
}

TEST_CASE("parameter validation names the violated rule") {
  KPOSystemParams p = KPOSystemParams::uniform(-1.0, 0.7, 0.0, pair_coupling(-0.5));
  CHECK_NOTHROW(p.validate());
  KPOSystemParams bad = p;
  bad.coupling(0, 1) = 0.3;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = p;
  bad.kerr[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = p;
  bad.loss = -0.1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = KPOSystemParams::uniform(-0.4, 0.7, 0.0, pair_coupling(0.5));
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("vacuum start"), ParameterError);
}

TEST_CASE("circuit formulas") {
  CircuitParams c;
  c.oscillators = {{0.2, 50.0, 0.0, 0.01}, {0.2, 50.0, 0.0, 0.01}};
  c.shunt_inductance = 10.0;
  const CircuitModel m = circuit_to_model(c);
  CHECK(m.frequency[0] == doctest::Approx(4.0 * std::sqrt(10.0)).epsilon(1e-12));
  CHECK(m.frequency[0] == doctest::Approx(12.649).epsilon(1e-4));
  CHECK(m.params.kerr[0] == doctest::Approx(0.1));
  CHECK(m.impedance[0] == doctest::Approx(1.6 / m.frequency[0]));
  CHECK(m.params.coupling(0, 1) > 0.0);
  CHECK(m.params.coupling(0, 1) == doctest::Approx(m.impedance[0] / 20.0));
  // Phi_dc = 0 gives no parametric drive.
  CHECK(m.drive[0] == 0.0);

  CircuitParams biased = c;
  for (auto& o : biased.oscillators) o.dc_flux = 0.3;
  const CircuitModel mb = circuit_to_model(biased);
  const double omega = 4.0 * std::sqrt(0.2 * 50.0 * std::cos(0.3));
  CHECK(mb.frequency[0] == doctest::Approx(omega));
  CHECK(mb.drive[0] == doctest::Approx(0.25 * 50.0 * (1.6 / omega) * std::sin(0.3) * 0.01));

  CircuitParams junction = c;
  junction.shunt = CircuitParams::Shunt::junction;
  junction.shunt_josephson = 5.0;
  CHECK(circuit_to_model(junction).params.coupling(0, 1) < 0.0);
  junction.shunt_josephson = 25.0;
  CHECK_THROWS_AS(circuit_to_model(junction), StabilityError);

  CircuitParams weak = c;
  weak.oscillators[0].josephson_energy = 1.0;
  CHECK_FALSE(circuit_to_model(weak).warnings.empty());
}

TEST_CASE("shunt equilibrium phase") {
  CHECK(shunt_equilibrium_phase(0.2, 4) == 0.0);
  CHECK(shunt_equilibrium_phase(0.25, 4) == 0.0);
  const double phi = shunt_equilibrium_phase(0.3, 4);
  CHECK(phi > 0.0);
  CHECK(phi < M_PI / 4.0);
  CHECK(std::abs(phi - 0.3 * std::sin(4.0 * phi)) < 1e-10);
}

}  // TEST_SUITE
