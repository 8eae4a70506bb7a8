/*
 * Copyright 2026 The rmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RMPC_PROPERTIES_HPP_
#define RMPC_PROPERTIES_HPP_

// Monte Carlo property checks of the model and the terminal machinery.
// Shared by the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <random>

#include "rmpc/error_frame.hpp"
#include "rmpc/kinematics.hpp"
#include "rmpc/ocp.hpp"

namespace rmpc {

struct TerminalSetReport {
  int samples = 0;
  int invariance_violations = 0;  // left the diamond within one period
  int input_violations = 0;       // terminal control outside lambda_f U at some substep
  int decrease_violations = 0;    // g' + L > tol at some substep
  double max_level_ratio = 0.0;   // max (k1|x| + k2|y|) / level over all substeps
  double max_input_index = 0.0;   // max |v|/a + |w|/b over all substeps
  double max_decrease = -1e300;   // max g' + L over all substeps

  int violations() const { return invariance_violations + input_violations + decrease_violations; }
};

// Samples `samples` error states uniformly in the open diamond
// k1|x| + k2|y| < a (lambda_f - lambda_r) (heading uniform), runs the nominal
// error dynamics under the terminal controller for `duration` with RK4, and
// checks invariance, admissibility at lambda_f and g' + L <= tol, with
// g' = -(k1 x^2 + k2 y^2).
inline TerminalSetReport terminal_set_suite(const RobotParams& robot, const Weights& w, const TerminalGains& gains,
                                            double lambda_f, const BodyInput& u_ref, double duration,
                                            int substeps, int samples, std::uint64_t seed, double tol = 1e-9) {
  TerminalSetReport rep;
  rep.samples = samples;
  const double lambda_r = std::sqrt(2.0) * std::abs(u_ref.v) / robot.a();
  const double level = robot.a() * (lambda_f - lambda_r);
  const double rho = robot.rho();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-level / gains.k1, level / gains.k1);
  std::uniform_real_distribution<double> uy(-level / gains.k2, level / gains.k2);
  std::uniform_real_distribution<double> uth(-kPi, kPi);

  const auto rate = [&](const TrackingError& e) {
    const BodyInput u = terminal_controller(e, u_ref.v, gains, rho);
    return error_dynamics(e, u, u_ref, Disturbance{}, 0.0, rho);
  };
  const auto inspect = [&](const TrackingError& e, bool& out, bool& bad_u, bool& bad_d) {
    const double lvl = gains.k1 * std::abs(e.x) + gains.k2 * std::abs(e.y);
    rep.max_level_ratio = std::max(rep.max_level_ratio, lvl / level);
    if (lvl > level) out = true;
    const BodyInput u = terminal_controller(e, u_ref.v, gains, rho);
    const double idx = input_index(u, robot);
    rep.max_input_index = std::max(rep.max_input_index, idx);
    if (!input_in_set(u, lambda_f, robot)) bad_u = true;
    const double g_dot = -(gains.k1 * e.x * e.x + gains.k2 * e.y * e.y);
    const double decrease = g_dot + stage_cost(e, input_error(u, u_ref.v, e.theta, rho), w);
    rep.max_decrease = std::max(rep.max_decrease, decrease);
    if (decrease > tol) bad_d = true;
  };

  const double h = duration / substeps;
  for (int i = 0; i < samples; ++i) {
    TrackingError e;
    do {
      e = {ux(rng), uy(rng), 0.0};
    } while (!(gains.k1 * std::abs(e.x) + gains.k2 * std::abs(e.y) < level));
    e.theta = uth(rng);
    bool out = false, bad_u = false, bad_d = false;
    inspect(e, out, bad_u, bad_d);
    for (int s = 0; s < substeps; ++s) {
      const auto add = [](const TrackingError& x, const TrackingErrorDerivative& k, double c) {
        return TrackingError{x.x + c * k.x, x.y + c * k.y, x.theta + c * k.theta};
      };
      const TrackingErrorDerivative k1 = rate(e);
      const TrackingErrorDerivative k2 = rate(add(e, k1, h / 2));
      const TrackingErrorDerivative k3 = rate(add(e, k2, h / 2));
      const TrackingErrorDerivative k4 = rate(add(e, k3, h));
      e = {e.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), e.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
           e.theta + h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta)};
      inspect(e, out, bad_u, bad_d);
    }
    rep.invariance_violations += out;
    rep.input_violations += bad_u;
    rep.decrease_violations += bad_d;
  }
  return rep;
}

struct LipschitzReport {
  int pairs = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max ||f(x1) - f(x2)|| / ||x1 - x2||
};

// Random state pairs under a shared admissible input; the heading gap is
// taken unwrapped, matching the Euclidean norm on the state.
inline LipschitzReport lipschitz_monte_carlo(const RobotParams& robot, int pairs, std::uint64_t seed) {
  LipschitzReport rep;
  rep.pairs = pairs;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(-2 * kPi, 2 * kPi);
  std::uniform_real_distribution<double> wheel(-robot.a(), robot.a());
  for (int i = 0; i < pairs; ++i) {
    const Pose x1{pos(rng), pos(rng), ang(rng)};
    const Pose x2{pos(rng), pos(rng), ang(rng)};
    const BodyInput u = wheels_to_body({wheel(rng), wheel(rng)}, robot);
    const PoseDerivative f1 = f_head(x1, u, robot.rho());
    const PoseDerivative f2 = f_head(x2, u, robot.rho());
    const double df = std::sqrt(std::pow(f1.x - f2.x, 2) + std::pow(f1.y - f2.y, 2) + std::pow(f1.theta - f2.theta, 2));
    const double dx = std::sqrt(std::pow(x1.x - x2.x, 2) + std::pow(x1.y - x2.y, 2) + std::pow(x1.theta - x2.theta, 2));
    if (dx == 0.0) continue;
    rep.max_ratio = std::max(rep.max_ratio, df / dx);
    if (df > robot.a() * dx) ++rep.violations;
  }
  return rep;
}

}  // namespace rmpc

#endif  // RMPC_PROPERTIES_HPP_
