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

#include "cvim/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cvim {
namespace {

constexpr double kHermiticityTolerance = 1e-10;

void check_symmetric_zero_diagonal(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) throw ParameterError(std::string(name) + ": matrix must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ParameterError(std::string(name) + ": matrix must be symmetric");
  if (m.diagonal().cwiseAbs().maxCoeff() > 0.0) throw ParameterError(std::string(name) + ": diagonal must be zero");
}

void check_hermitian(const Operator& op, const char* what) {
  const double err = hermiticity_error(op);
  if (err > kHermiticityTolerance) {
    std::ostringstream os;
    os << what << ": built operator is not Hermitian (error " << err << ")";
    throw ParameterError(os.str());
  }
}

}  // namespace

KPOSystemParams KPOSystemParams::uniform(double detuning, double kerr, double loss, Eigen::MatrixXd coupling) {
  KPOSystemParams p;
  const auto n = static_cast<std::size_t>(coupling.rows());
  p.detuning = detuning;
  p.kerr.assign(n, kerr);
  p.loss = loss;
  p.coupling = std::move(coupling);
  p.drive_scale.assign(n, 1.0);
  return p;
}

void KPOSystemParams::validate() const {
  const int n = modes();
  if (n < 1) throw ParameterError("KPOSystemParams: at least one mode");
  if (coupling.rows() != n || coupling.cols() != n) throw ParameterError("KPOSystemParams: coupling must be N x N");
  check_symmetric_zero_diagonal(coupling, "KPOSystemParams.coupling");
  for (double k : kerr)
    if (!(k > 0.0)) throw ParameterError("KPOSystemParams.kerr: every K_n must be > 0");
  if (!(loss >= 0.0)) throw ParameterError("KPOSystemParams.loss: kappa must be >= 0");
  if (static_cast<int>(drive_scale.size()) != n) throw ParameterError("KPOSystemParams.drive_scale: one entry per mode");
  const double lambda_max = n == 1 ? 0.0 : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(coupling).eigenvalues().maxCoeff();
  if (!(detuning + lambda_max < 0.0)) {
    std::ostringstream os;
    os << "KPOSystemParams.detuning: vacuum start requires detuning + lambda_max(J) < 0, got " << detuning << " + "
       << lambda_max;
    throw ParameterError(os.str());
  }
}

void DriveSchedule::validate() const {
  if (!(epsilon_max > 0.0)) throw ParameterError("DriveSchedule.epsilon_max must be > 0");
  if (!(duration > 0.0)) throw ParameterError("DriveSchedule.duration must be > 0");
}

void QubitAnnealerParams::validate() const {
  check_symmetric_zero_diagonal(cost, "QubitAnnealerParams.cost");
  if (!(dephasing >= 0.0)) throw ParameterError("QubitAnnealerParams.dephasing must be >= 0");
}

Operator SplitHamiltonian::drive_total() const {
  Operator total(SparseMatrix(static_part.size(), static_part.size()), static_part.dims);
  for (const auto& d : drive_parts) total += d;
  return total;
}

Operator SplitHamiltonian::at(double epsilon) const { return static_part + epsilon * drive_total(); }

SplitHamiltonian kpo_hamiltonian(double detuning, double kerr, int dim) {
  if (dim < 4) throw DimensionError("kpo_hamiltonian: dimension must be >= 4");
  const Operator a = destroy(dim);
  const Operator ad = a.adjoint();
  SplitHamiltonian h{detuning * (ad * a) - kerr * (ad * ad * a * a), {a * a + ad * ad}};
  check_hermitian(h.static_part, "kpo_hamiltonian");
  return h;
}

SplitHamiltonian cvim_hamiltonian(const KPOSystemParams& params, const FockDims& dims) {
  params.validate();
  const int n = params.modes();
  if (dims.modes() != n) throw DimensionError("cvim_hamiltonian: dims must have one entry per mode");

  std::vector<Operator> a, ad;
  for (int k = 0; k < n; ++k) {
    a.push_back(destroy(k, dims));
    ad.push_back(a.back().adjoint());
  }

  Operator h(SparseMatrix(dims.total(), dims.total()), dims);
  std::vector<Operator> drives;
  for (int k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    h += params.detuning * (ad[ku] * a[ku]);
    h -= params.kerr[ku] * (ad[ku] * ad[ku] * a[ku] * a[ku]);
    for (int m = 0; m < n; ++m) {
      if (m == k || params.coupling(k, m) == 0.0) continue;
      h += params.coupling(k, m) * (ad[ku] * a[static_cast<std::size_t>(m)]);
    }
    drives.push_back(params.drive_scale[ku] * (a[ku] * a[ku] + ad[ku] * ad[ku]));
  }
  check_hermitian(h, "cvim_hamiltonian");
  for (const auto& d : drives) check_hermitian(d, "cvim_hamiltonian drive");
  return {std::move(h), std::move(drives)};
}

SplitHamiltonian two_kpo_normal_mode_hamiltonian(double detuning, double coupling, double kerr, const FockDims& dims,
                                                 NormalModeForm form) {
  if (dims.modes() != 2) throw DimensionError("two_kpo_normal_mode_hamiltonian: exactly two modes");
  const Operator d = destroy(0, dims);
  const Operator c = destroy(1, dims);
  const Operator dd = d.adjoint();
  const Operator cd = c.adjoint();

  Operator h = (detuning + coupling) * (dd * d) - (0.5 * kerr) * (dd * dd * d * d) +
               (detuning - coupling) * (cd * c) - (0.5 * kerr) * (cd * cd * c * c) -
               (2.0 * kerr) * (dd * d * cd * c);
  if (form == NormalModeForm::exact) h -= (0.5 * kerr) * (dd * dd * c * c + cd * cd * d * d);
  check_hermitian(h, "two_kpo_normal_mode_hamiltonian");
  return {std::move(h), {d * d + dd * dd, c * c + cd * cd}};
}

SplitHamiltonian qubit_annealer_hamiltonian(const QubitAnnealerParams& params) {
  params.validate();
  const int n = params.qubits();
  if (n < 1) throw ParameterError("qubit_annealer_hamiltonian: at least one qubit");
  if (n > kMaxAnnealerQubits)
    throw CapacityError("qubit_annealer_hamiltonian: " + std::to_string(n) + " qubits exceeds dense limit " +
                        std::to_string(kMaxAnnealerQubits));
  const FockDims dims = FockDims::qubits(n);

  // Z_i Z_j is diagonal; fill it directly from the spin configuration.
  SparseMatrix ising(dims.total(), dims.total());
  ising.reserve(dims.total());
  for (Index s = 0; s < dims.total(); ++s) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const int si = ((s >> (n - 1 - i)) & 1) ? -1 : 1;
      for (int j = i + 1; j < n; ++j) {
        const int sj = ((s >> (n - 1 - j)) & 1) ? -1 : 1;
        e += params.cost(i, j) * si * sj;
      }
    }
    ising.insert(s, s) = e;
  }

  Operator transverse(SparseMatrix(dims.total(), dims.total()), dims);
  for (int j = 0; j < n; ++j) transverse += embed(sigma_x(), j, dims);
  return {Operator(std::move(ising), dims), {std::move(transverse)}};
}

CircuitModel circuit_to_model(const CircuitParams& circuit) {
  const auto n = circuit.oscillators.size();
  if (n == 0) throw ParameterError("circuit_to_model: no oscillators");
  CircuitModel model;
  double min_ej = std::numeric_limits<double>::infinity();
  for (const auto& osc : circuit.oscillators) {
    if (!(osc.charging_energy > 0.0) || !(osc.josephson_energy > 0.0))
      throw ParameterError("circuit_to_model: E_C and E_J must be > 0");
    const double c = std::cos(osc.dc_flux);
    if (!(c > 0.0)) throw ParameterError("circuit_to_model: cos(Phi_dc) must be > 0");
    if (osc.josephson_energy < 10.0 * osc.charging_energy)
      model.warnings.push_back("E_J/E_C below 10: transmon-regime expansion is poor");
    const double omega = 4.0 * std::sqrt(osc.charging_energy * osc.josephson_energy * c);
    const double z = 8.0 * osc.charging_energy / omega;
    model.frequency.push_back(omega);
    model.pump.push_back(2.0 * (omega - circuit.detuning));
    model.impedance.push_back(z);
    model.drive.push_back(0.25 * osc.josephson_energy * z * std::sin(osc.dc_flux) * osc.ac_flux);
    min_ej = std::min(min_ej, osc.josephson_energy);
  }

  const auto [lo, hi] = std::minmax_element(model.frequency.begin(), model.frequency.end());
  if (*hi - *lo > 1e-6 * *hi) model.warnings.push_back("oscillators are not resonant; all-to-all coupling is suppressed");

  if (circuit.shunt == CircuitParams::Shunt::junction) {
    if (!(circuit.shunt_josephson > 0.0)) throw ParameterError("circuit_to_model: shunt E_J^(0) must be > 0");
    if (!(static_cast<double>(n) * circuit.shunt_josephson < min_ej))
      throw StabilityError("circuit_to_model: junction shunt requires N E_J^(0) < min_n E_J^(n)");
  } else if (!(circuit.shunt_inductance > 0.0)) {
    throw ParameterError("circuit_to_model: L_eff must be > 0");
  }

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double root = std::sqrt(model.impedance[a] * model.impedance[b]);
      j(static_cast<Index>(a), static_cast<Index>(b)) = circuit.shunt == CircuitParams::Shunt::inductor
                                                            ? root / (2.0 * circuit.shunt_inductance)
                                                            : -0.5 * circuit.shunt_josephson * root;
    }

  KPOSystemParams& p = model.params;
  p.detuning = circuit.detuning;
  p.loss = circuit.loss;
  p.coupling = std::move(j);
  for (const auto& osc : circuit.oscillators) p.kerr.push_back(0.5 * osc.charging_energy);
  model.drive_max = *std::max_element(model.drive.begin(), model.drive.end(),
                                      [](double x, double y) { return std::abs(x) < std::abs(y); });
  for (double e : model.drive) p.drive_scale.push_back(model.drive_max == 0.0 ? 0.0 : e / model.drive_max);
  return model;
}

double shunt_equilibrium_phase(double ratio, int n) {
  if (!(ratio > 0.0)) throw ParameterError("shunt_equilibrium_phase: ratio must be > 0");
  if (n < 1) throw ParameterError("shunt_equilibrium_phase: N must be >= 1");
  if (n * ratio <= 1.0) return 0.0;
  // f(phi) = ratio sin(N phi) - phi is positive just above 0 and equals
  // -pi/N at phi = pi/N.
  const auto f = [&](double phi) { return ratio * std::sin(n * phi) - phi; };
  double lo = 0.0, hi = std::numbers::pi / n;
  // Move lo off the trivial root.
  lo = hi * 1e-9;
  while (f(lo) <= 0.0 && lo < hi) lo *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cvim
