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

#ifndef CVIM_INTEGRATOR_HPP
#define CVIM_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Core>

#include "cvim/errors.hpp"

namespace cvim {

/// Adaptive Dormand-Prince 5(4) stepper with the standard 4th-order
/// continuous extension, for any dense Eigen state (vector or matrix).
///
/// The right-hand side is `rhs(t, y, dydt)`. Error control is the mixed
/// RMS norm |e_i| / (atol + rtol max(|y_i|, |y1_i|)).
template <typename State>
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;

  DormandPrince(Rhs rhs, double rtol, double atol) : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol) {}

  void reset(double t, const State& y, double h_guess) {
    t_ = t;
    y_ = y;
    h_ = h_guess;
    rhs_(t_, y_, k1_);
    ++evaluations_;
    has_step_ = false;
  }

  /// Advance by one accepted step, never beyond `t_limit`.
  void step(double t_limit) {
    if (!(t_limit > t_)) throw ConvergenceError("DormandPrince: step limit not ahead of current time");
    for (int attempt = 0;; ++attempt) {
      bool clamped = false;
      double h = h_;
      if (t_ + h >= t_limit || t_limit - (t_ + h) < 1e-12 * std::max(1.0, std::abs(t_limit))) {
        h = t_limit - t_;
        clamped = true;
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t_)) || attempt > 200) {
        std::ostringstream os;
        os << "DormandPrince: step size underflow at t=" << t_ << " (h=" << h << ", accepted=" << accepted_
           << ", rejected=" << rejected_ << ")";
        throw ConvergenceError(os.str());
      }
      const double err = attempt_step(h);
      if (err <= 1.0) {
        t0_ = t_;
        h_last_ = h;
        y0_.swap(y_);
        y_.swap(y1_);
        t_ = clamped ? t_limit : t_ + h;
        k1_.swap(k7_);  // first-same-as-last
        has_step_ = true;
        ++accepted_;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A clamped step says nothing about how large the next one may be.
        h_ = clamped ? std::max(h_, h * fac) : h * fac;
        return;
      }
      ++rejected_;
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }

  /// State at time t inside the last accepted step. Uses stages that are
  /// still intact until the next call to step().
  State dense(double t) const {
    if (!has_step_) throw ConvergenceError("DormandPrince: no step available for dense output");
    const double theta = (t - t0_) / h_last_;
    const double h = h_last_;
    // k1_ now holds the FSAL stage of the new point; k7_ holds the old k1.
    const State& k1 = k7_;
    const State& k7 = k1_;
    const State r2 = y_ - y0_;
    const State r3 = h * k1 - r2;
    const State r4 = r2 - h * k7 - r3;
    const State r5 = h * (kD1 * k1 + kD3 * k3_ + kD4 * k4_ + kD5 * k5_ + kD6 * k6_ + kD7 * k7);
    return y0_ + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)));
  }

  double time() const { return t_; }
  double step_size() const { return h_; }
  double last_step_start() const { return t0_; }
  const State& state() const { return y_; }
  long evaluations() const { return evaluations_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

 private:
  double attempt_step(double h) {
    const State& k1 = k1_;
    tmp_ = y_ + h * kA21 * k1;
    rhs_(t_ + kC2 * h, tmp_, k2_);
    tmp_ = y_ + h * (kA31 * k1 + kA32 * k2_);
    rhs_(t_ + kC3 * h, tmp_, k3_);
    tmp_ = y_ + h * (kA41 * k1 + kA42 * k2_ + kA43 * k3_);
    rhs_(t_ + kC4 * h, tmp_, k4_);
    tmp_ = y_ + h * (kA51 * k1 + kA52 * k2_ + kA53 * k3_ + kA54 * k4_);
    rhs_(t_ + kC5 * h, tmp_, k5_);
    tmp_ = y_ + h * (kA61 * k1 + kA62 * k2_ + kA63 * k3_ + kA64 * k4_ + kA65 * k5_);
    rhs_(t_ + h, tmp_, k6_);
    y1_ = y_ + h * (kA71 * k1 + kA73 * k3_ + kA74 * k4_ + kA75 * k5_ + kA76 * k6_);
    rhs_(t_ + h, y1_, k7_);
    evaluations_ += 6;

    tmp_ = h * (kE1 * k1 + kE3 * k3_ + kE4 * k4_ + kE5 * k5_ + kE6 * k6_ + kE7 * k7_);
    const double n = static_cast<double>(tmp_.size());
    const auto scale = atol_ + rtol_ * y_.cwiseAbs().array().max(y1_.cwiseAbs().array());
    return std::sqrt((tmp_.cwiseAbs().array() / scale).square().sum() / n);
  }

  static constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
  static constexpr double kA21 = 1.0 / 5.0;
  static constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
  static constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
  static constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                          kA54 = -212.0 / 729.0;
  static constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                          kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
  static constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0, kA74 = 125.0 / 192.0,
                          kA75 = -2187.0 / 6784.0, kA76 = 11.0 / 84.0;
  static constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                          kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
  static constexpr double kD1 = -12715105075.0 / 11282082432.0, kD3 = 87487479700.0 / 32700410799.0,
                          kD4 = -10690763975.0 / 1880347072.0, kD5 = 701980252875.0 / 199316789632.0,
                          kD6 = -1453857185.0 / 822651844.0, kD7 = 69997945.0 / 29380423.0;

  Rhs rhs_;
  double rtol_, atol_;
  double t_ = 0.0, h_ = 1e-3, t0_ = 0.0, h_last_ = 0.0;
  bool has_step_ = false;
  long evaluations_ = 0, accepted_ = 0, rejected_ = 0;
  State y_, y0_, y1_, tmp_, k1_, k2_, k3_, k4_, k5_, k6_, k7_;
};

}  // namespace cvim

#endif  // CVIM_INTEGRATOR_HPP
