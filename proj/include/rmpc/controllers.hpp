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

#ifndef RMPC_CONTROLLERS_HPP_
#define RMPC_CONTROLLERS_HPP_

// The two receding-horizon strategies.
//
// Tube MPC keeps an internal nominal head state that only ever moves under
// its own optimal controls. The plant is driven by
//
//   u_f = M(th_f)^-1 [ M(th*) u* + K (p_fh - p*) ],
//
// evaluated continuously against the nominal trajectory, so the deviation
// p_fe = p_fh - p* obeys p_fe' = K p_fe + d exactly.
//
// NRMPC resets the nominal state to the measured one every period, solves the
// funnel-constrained problem and applies the first control open loop.
//
// Both controllers try the shifted previous solution as a warm start; if the
// solver returns an infeasible iterate while that candidate is feasible, the
// candidate is applied instead and the step is flagged.

#include <Eigen/Core>
#include <optional>

#include "rmpc/certify.hpp"
#include "rmpc/error_frame.hpp"
#include "rmpc/kinematics.hpp"
#include "rmpc/ocp.hpp"
#include "rmpc/solver.hpp"

namespace rmpc {

enum class FeedbackMode { kContinuous, kZeroOrderHold };

inline BodyInput tube_feedback(const Pose& actual_head, const Pose& nominal_head, const BodyInput& u_star,
                               const FeedbackGain& k, double rho) {
  const Eigen::Vector2d nominal_rate = affine_input_matrix(nominal_head.theta, rho) * Eigen::Vector2d(u_star.v, u_star.omega);
  const Eigen::Vector2d correction(k.k_x * (actual_head.x - nominal_head.x), k.k_y * (actual_head.y - nominal_head.y));
  const Eigen::Vector2d u = affine_input_matrix_inverse(actual_head.theta, rho) * (nominal_rate + correction);
  return {u(0), u(1)};
}

// What the plant sees over one sampling period [t_k, t_k + delta]. s is the
// time since t_k.
struct IntervalControl {
  BodyInput nominal_input;  // first optimal control
  Pose nominal_start;       // nominal head at t_k
  Pose actual_start;        // measured head at t_k
  std::optional<FeedbackGain> feedback;  // tube only
  FeedbackMode mode = FeedbackMode::kContinuous;
  double rho = 0.0;

  // Nominal head under the first optimal control (exact for constant input).
  Pose nominal_at(double s) const { return propagate_head_exact(nominal_start, nominal_input, rho, s); }

  BodyInput operator()(double s, const Pose& actual) const {
    if (!feedback) return nominal_input;
    if (mode == FeedbackMode::kZeroOrderHold) {
      return tube_feedback(actual_start, nominal_start, nominal_input, *feedback, rho);
    }
    return tube_feedback(actual, nominal_at(s), nominal_input, *feedback, rho);
  }
};

// Shared problem data for a controller instance.
struct ControllerSetup {
  RobotParams robot{0.13, 0.0267};
  Weights weights;
  HorizonConfig horizon{2.0, 0.2, 5};
  TerminalGains gains;
  SolverOptions solver;
};

// Diagnostics of one receding-horizon step.
struct StepReport {
  OcpSolution solution;                  // what the solver returned
  std::optional<OcpSolution> candidate;  // shifted previous solution, if any
  OcpSolution applied;                   // the plan actually used
  bool fallback = false;                 // infeasible solve replaced by the candidate
  bool used_candidate = false;           // candidate applied (fallback or cheaper feasible plan)
};

struct TubeState {
  Pose nominal_head;
  std::optional<OcpSolution> last_solution;
};

struct NrmpcState {
  std::optional<OcpSolution> last_solution;
  Pose predicted_next;  // nominal prediction of the head at t_{k+1}
};

namespace detail {

inline StepReport solve_step(const TrackingOcp& ocp, const std::optional<OcpSolution>& previous,
                             const SolverOptions& options, bool prefer_cheaper_candidate) {
  StepReport rep;
  if (previous) rep.candidate = shift_warm_start(*previous, ocp, options.feas_tol);
  rep.solution = solve(ocp, rep.candidate, options);
  rep.applied = rep.solution;
  if (rep.candidate && rep.candidate->feasible) {
    if (!rep.solution.feasible) {
      rep.fallback = true;
      rep.used_candidate = true;
    } else if (prefer_cheaper_candidate && rep.candidate->cost < rep.solution.cost) {
      rep.used_candidate = true;
    }
    if (rep.used_candidate) {
      rep.applied = *rep.candidate;
      rep.applied.iterations = rep.solution.iterations;
      rep.applied.outer_iterations = rep.solution.outer_iterations;
      rep.applied.solve_time = rep.solution.solve_time;
      rep.applied.kkt_residual = rep.solution.kkt_residual;
    }
  }
  return rep;
}

}  // namespace detail

class TubeMpc {
 public:
  TubeMpc(ControllerSetup setup, const CertifiedParams& cert, const FeedbackGain& k, FeedbackMode mode)
      : setup_(std::move(setup)),
        spec_{cert.lambda_tube, TerminalDiamond{cert.diamond_level}, std::nullopt},
        k_(k),
        mode_(mode) {
    k_.validate();
    spec_.validate();
  }

  TubeState initial_state(const Pose& actual_head) const { return {actual_head, std::nullopt}; }

  const ConstraintSpec& spec() const { return spec_; }

  TrackingOcp problem(const TubeState& state, const ReferenceHorizon& ref) const {
    return TrackingOcp(state.nominal_head, ref, spec_, setup_.weights, setup_.horizon, setup_.robot, setup_.gains);
  }

  // Solves from the nominal state, returns the law for [t_k, t_k + delta] and
  // the advanced state.
  std::pair<IntervalControl, TubeState> step(const TubeState& state, const Pose& actual_head,
                                             const ReferenceHorizon& ref, StepReport* report = nullptr) const {
    const TrackingOcp ocp = problem(state, ref);
    StepReport rep = detail::solve_step(ocp, state.last_solution, setup_.solver, true);
    IntervalControl law{rep.applied.controls[0], state.nominal_head, actual_head, k_, mode_, setup_.robot.rho()};
    Pose next = law.nominal_at(setup_.horizon.delta());
    next.theta = wrap_angle(next.theta);
    TubeState out{next, rep.applied};
    if (report != nullptr) *report = std::move(rep);
    return {law, out};
  }

 private:
  ControllerSetup setup_;
  ConstraintSpec spec_;
  FeedbackGain k_;
  FeedbackMode mode_;
};

class Nrmpc {
 public:
  Nrmpc(ControllerSetup setup, const CertifiedParams& cert)
      : setup_(std::move(setup)), spec_{1.0, TerminalBall{cert.epsilon}, cert.r} {
    spec_.validate();
  }

  NrmpcState initial_state(const Pose& actual_head) const { return {std::nullopt, actual_head}; }

  const ConstraintSpec& spec() const { return spec_; }

  TrackingOcp problem(const Pose& actual_head, const ReferenceHorizon& ref) const {
    return TrackingOcp(actual_head, ref, spec_, setup_.weights, setup_.horizon, setup_.robot, setup_.gains);
  }

  std::pair<IntervalControl, NrmpcState> step(const NrmpcState& state, const Pose& actual_head,
                                              const ReferenceHorizon& ref, StepReport* report = nullptr) const {
    const TrackingOcp ocp = problem(actual_head, ref);
    StepReport rep = detail::solve_step(ocp, state.last_solution, setup_.solver, false);
    IntervalControl law{rep.applied.controls[0], actual_head, actual_head, std::nullopt, FeedbackMode::kZeroOrderHold,
                        setup_.robot.rho()};
    NrmpcState out{rep.applied, rep.applied.shooting_states[1]};
    if (report != nullptr) *report = std::move(rep);
    return {law, out};
  }

 private:
  ControllerSetup setup_;
  ConstraintSpec spec_;
};

}  // namespace rmpc

#endif  // RMPC_CONTROLLERS_HPP_
