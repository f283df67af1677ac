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

#ifndef CVIM_SEMICLASSICAL_HPP
#define CVIM_SEMICLASSICAL_HPP

#include <vector>

#include <Eigen/Dense>

#include "cvim/models.hpp"

namespace cvim {

/// Complex mean-field amplitude per mode.
using MeanFieldState = Eigen::VectorXcd;

struct ThresholdPair {
  double soft = 0.0;
  double hard = 0.0;
};

/// i d(alpha_n)/dt = (D - 2 K_n |alpha_n|^2) alpha_n + sum_m J_nm alpha_m
///                   + 2 eps s_n conj(alpha_n) - i (kappa/2) alpha_n
/// where s_n is the drive scale. For two modes this is the textbook
/// alpha/beta pair.
MeanFieldState classical_rhs(const MeanFieldState& state, const KPOSystemParams& params, double epsilon);

/// Two-mode convenience form.
MeanFieldState classical_rhs(const MeanFieldState& state, double detuning, double kerr, double coupling,
                             double epsilon, double loss);

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<MeanFieldState> amplitudes;
};

/// Integrates the mean-field equations through the ramp starting from
/// `initial + perturbation * direction`. The default direction is the soft
/// normal mode (eigenvector of J with the largest eigenvalue).
ClassicalTrajectory integrate_classical(const KPOSystemParams& params, const DriveSchedule& schedule,
                                        const MeanFieldState& initial, double perturbation,
                                        const Eigen::VectorXcd& direction = {}, int samples = 400);

/// Far-above-threshold amplitude
///   e^{i phi} sqrt((sqrt(4 eps^2 - (kappa/2)^2) + D + |J|) / (2K)),
///   phi = -(1/2) atan(kappa / sqrt(16 eps^2 - kappa^2)).
Complex steady_amplitude(double detuning, double coupling, double kerr, double epsilon, double loss);

/// eps_soft/hard = (1/2) sqrt((D +- |J|)^2 + (kappa/2)^2), soft the smaller.
ThresholdPair bifurcation_thresholds(double detuning, double coupling, double loss);

}  // namespace cvim

#endif  // CVIM_SEMICLASSICAL_HPP
