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

#include "cvim/semiclassical.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cvim/integrator.hpp"

namespace cvim {

MeanFieldState classical_rhs(const MeanFieldState& state, const KPOSystemParams& params, double epsilon) {
  const Index n = state.size();
  if (n != params.modes()) throw DimensionError("classical_rhs: one amplitude per mode");
  const Complex minus_i(0.0, -1.0);
  MeanFieldState rhs(n);
  const Eigen::VectorXcd coupled = params.coupling.cast<Complex>() * state;
  for (Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Complex a = state(k);
    const Complex i_dot = (params.detuning - 2.0 * params.kerr[ku] * std::norm(a)) * a + coupled(k) +
                          2.0 * epsilon * params.drive_scale[ku] * std::conj(a) -
                          Complex(0.0, 0.5 * params.loss) * a;
    rhs(k) = minus_i * i_dot;
  }
  return rhs;
}

MeanFieldState classical_rhs(const MeanFieldState& state, double detuning, double kerr, double coupling,
                             double epsilon, double loss) {
  Eigen::MatrixXd j(2, 2);
  j << 0.0, coupling, coupling, 0.0;
  KPOSystemParams p = KPOSystemParams::uniform(detuning, kerr, loss, j);
  return classical_rhs(state, p, epsilon);
}

ClassicalTrajectory integrate_classical(const KPOSystemParams& params, const DriveSchedule& schedule,
                                        const MeanFieldState& initial, double perturbation,
                                        const Eigen::VectorXcd& direction, int samples) {
  if (!(perturbation > 0.0)) throw ParameterError("integrate_classical: perturbation must be > 0");
  if (initial.size() != params.modes()) throw DimensionError("integrate_classical: one amplitude per mode");
  schedule.validate();

  Eigen::VectorXcd dir = direction;
  if (dir.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(params.coupling);
    dir = es.eigenvectors().col(params.modes() - 1).cast<Complex>();
  }
  if (dir.size() != initial.size()) throw DimensionError("integrate_classical: direction has wrong length");
  dir /= dir.norm();

  const double kmax = *std::min_element(params.kerr.begin(), params.kerr.end());
  const double bound = 10.0 * std::sqrt(schedule.epsilon_max / kmax);

  DormandPrince<Eigen::VectorXcd> stepper(
      [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy = classical_rhs(y, params, schedule(t)); },
      1e-10, 1e-12);
  ClassicalTrajectory out;
  const auto times = [&] {
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = schedule.duration * k / (samples - 1);
    return t;
  }();
  Eigen::VectorXcd y = initial + perturbation * dir;
  stepper.reset(0.0, y, 1e-3);
  for (double t : times) {
    if (t > stepper.time()) {
      while (stepper.time() < t) stepper.step(t);
    }
    const auto& s = stepper.state();
    if (s.cwiseAbs().maxCoeff() > bound) {
      std::ostringstream os;
      os << "integrate_classical: amplitude " << s.cwiseAbs().maxCoeff() << " exceeds " << bound << " at t=" << t;
      throw InstabilityError(os.str());
    }
    out.times.push_back(t);
    out.amplitudes.push_back(s);
  }
  return out;
}

Complex steady_amplitude(double detuning, double coupling, double kerr, double epsilon, double loss) {
  if (!(kerr > 0.0)) throw DomainError("steady_amplitude: K must be > 0");
  const double drive_sq = 4.0 * epsilon * epsilon - 0.25 * loss * loss;
  if (!(drive_sq > 0.0)) throw DomainError("steady_amplitude: drive below the dissipative threshold");
  const double radicand = std::sqrt(drive_sq) + detuning + std::abs(coupling);
  if (!(radicand > 0.0)) throw DomainError("steady_amplitude: below the bifurcation threshold");
  const double phi = -0.5 * std::atan(loss / std::sqrt(16.0 * epsilon * epsilon - loss * loss));
  return std::polar(std::sqrt(radicand / (2.0 * kerr)), phi);
}

ThresholdPair bifurcation_thresholds(double detuning, double coupling, double loss) {
  const double j = std::abs(coupling);
  const double damp = 0.25 * loss * loss;
  const double a = 0.5 * std::sqrt((detuning + j) * (detuning + j) + damp);
  const double b = 0.5 * std::sqrt((detuning - j) * (detuning - j) + damp);
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace cvim
