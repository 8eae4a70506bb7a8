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

#ifndef RMPC_SOLVER_HPP_
#define RMPC_SOLVER_HPP_

// Solves a TrackingOcp and reports the result as a control sequence plus its
// single-shooting rollout. Reported cost and violation are those of the
// rollout, so a solution is exactly what the plant would be asked to follow.

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <optional>
#include <vector>

#include "rmpc/al_solver.hpp"
#include "rmpc/ocp.hpp"
#include "rmpc/status.hpp"

namespace rmpc {

struct OcpSolution {
  std::vector<BodyInput> controls;            // N, piecewise constant
  std::vector<Pose> shooting_states;          // N + 1 head poses at the nodes
  std::vector<Pose> substep_states;           // N m + 1, headings unwrapped
  std::vector<TrackingError> predicted_errors;  // N + 1
  double cost = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;  // inner (quasi-Newton) iterations
  int outer_iterations = 0;
  bool feasible = false;
  double solve_time = 0.0;  // s, wall clock
  SolveStatus status = SolveStatus::kIterationCapReached;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
};

// Evaluates a control sequence without optimizing; used for warm-start
// candidates and for reporting solver output.
inline OcpSolution evaluate_controls(const TrackingOcp& ocp, const std::vector<BodyInput>& controls,
                                     double feas_tol = SolverOptions{}.feas_tol) {
  const Rollout r = ocp.rollout(controls);
  OcpSolution sol;
  sol.controls = controls;
  sol.shooting_states = r.node_states;
  sol.substep_states = r.substep_states;
  sol.predicted_errors = r.node_errors;
  sol.cost = r.cost;
  // Box violation in wheel coordinates (zero for anything the solver returns).
  double box = 0.0;
  for (const BodyInput& u : controls) {
    const WheelSpeeds w = body_to_wheels(u, ocp.robot());
    box = std::max({box, std::abs(w.left) - ocp.wheel_bound(), std::abs(w.right) - ocp.wheel_bound()});
  }
  sol.constraint_violation = std::max(r.constraint_violation, box);
  sol.feasible = sol.constraint_violation <= feas_tol;
  return sol;
}

inline OcpSolution solve(const TrackingOcp& ocp, const std::optional<OcpSolution>& warm_start = std::nullopt,
                         const SolverOptions& options = {}) {
  const auto t_begin = std::chrono::steady_clock::now();
  const std::vector<BodyInput> guess =
      warm_start && static_cast<int>(warm_start->controls.size()) == ocp.N() ? warm_start->controls
                                                                          : ocp.feedforward_controls();
  std::optional<Eigen::VectorXd> eq_mult;
  std::optional<Eigen::VectorXd> in_mult;
  if (warm_start) {
    if (warm_start->eq_multipliers.size() == ocp.num_eq()) eq_mult = warm_start->eq_multipliers;
    if (warm_start->ineq_multipliers.size() == ocp.num_ineq()) in_mult = warm_start->ineq_multipliers;
  }
  const AlResult res = solve_augmented_lagrangian(ocp, ocp.pack(guess), options, eq_mult, in_mult);

  OcpSolution sol = evaluate_controls(ocp, ocp.controls(res.z), options.feas_tol);
  sol.kkt_residual = res.kkt_residual;
  sol.iterations = res.inner_iterations;
  sol.outer_iterations = res.outer_iterations;
  sol.status = res.status;
  sol.eq_multipliers = res.eq_multipliers;
  sol.ineq_multipliers = res.ineq_multipliers;
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return sol;
}

// Shifted candidate for the next horizon: drop the first control, keep the
// rest, and close the horizon with the terminal controller held constant over
// the last interval (evaluated at the state reached after the kept controls,
// projected onto the wheel box). `next` carries the new initial state and the
// reference over the new horizon.
inline OcpSolution shift_warm_start(const OcpSolution& prev, const TrackingOcp& next,
                                    double feas_tol = SolverOptions{}.feas_tol) {
  const int n = next.N();
  if (static_cast<int>(prev.controls.size()) != n) {
    throw std::invalid_argument("shift_warm_start: horizon length mismatch");
  }
  std::vector<BodyInput> controls(prev.controls.begin() + 1, prev.controls.end());
  controls.push_back(prev.controls.back());
  // State at the start of the appended interval.
  const Rollout partial = next.rollout(controls);
  const int m = next.horizon().m();
  const Pose& s_last = partial.substep_states[(n - 1) * m];
  const TrackingError e = tracking_error(next.reference().poses[(n - 1) * m], s_last);
  const BodyInput kappa =
      terminal_controller(e, next.reference().inputs[(n - 1) * m].v, next.gains(), next.robot().rho());
  WheelSpeeds w = body_to_wheels(kappa, next.robot());
  w.left = std::clamp(w.left, -next.wheel_bound(), next.wheel_bound());
  w.right = std::clamp(w.right, -next.wheel_bound(), next.wheel_bound());
  controls.back() = wheels_to_body(w, next.robot());

  OcpSolution cand = evaluate_controls(next, controls, feas_tol);
  cand.status = SolveStatus::kConverged;
  // Shift multipliers along with the nodes; the vacated tail starts at zero.
  // Multipliers of an infeasible solve are penalty-inflated and would poison
  // the next solve, so only a feasible predecessor passes them on.
  if (!prev.feasible) return cand;
  if (prev.eq_multipliers.size() == next.num_eq()) {
    cand.eq_multipliers = Eigen::VectorXd::Zero(next.num_eq());
    const int k = next.num_eq() - 3;
    if (k > 0) cand.eq_multipliers.head(k) = prev.eq_multipliers.tail(k);
  }
  if (prev.ineq_multipliers.size() == next.num_ineq()) {
    cand.ineq_multipliers = prev.ineq_multipliers;
    const int base = next.num_terminal();
    const int nf = next.num_funnel();
    if (nf > 1) {
      cand.ineq_multipliers.segment(base, nf - 1) = prev.ineq_multipliers.segment(base + 1, nf - 1);
    }
  }
  return cand;
}

}  // namespace rmpc

#endif  // RMPC_SOLVER_HPP_
