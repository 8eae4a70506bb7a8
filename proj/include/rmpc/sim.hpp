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

#ifndef RMPC_SIM_HPP_
#define RMPC_SIM_HPP_

// Closed-loop simulation of a disturbed follower tracking a unicycle reference.
//
// Time grid: sampling instants t_k = k delta, each split into m plant
// substeps (the same m the controllers use internally). The disturbance is
// piecewise constant per plant substep and is a pure function of
// (seed, substep index), so runs are reproducible and two strategies run with
// the same seed see the same realization.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmpc/certify.hpp"
#include "rmpc/controllers.hpp"
#include "rmpc/error_frame.hpp"
#include "rmpc/kinematics.hpp"
#include "rmpc/ocp.hpp"

namespace rmpc {

struct ReferenceSpec {
  double v_r = 0.0;
  double omega_r = 0.0;
  Pose initial;
};

// Closed form of the constant-input unicycle.
inline std::pair<Pose, BodyInput> reference_at(const ReferenceSpec& spec, double t) {
  const Pose& p0 = spec.initial;
  const double th = p0.theta + spec.omega_r * t;
  Pose p;
  if (spec.omega_r == 0.0) {
    p = {p0.x + spec.v_r * t * std::cos(p0.theta), p0.y + spec.v_r * t * std::sin(p0.theta), wrap_angle(th)};
  } else {
    const double radius = spec.v_r / spec.omega_r;
    p = {p0.x + radius * (std::sin(th) - std::sin(p0.theta)), p0.y - radius * (std::cos(th) - std::cos(p0.theta)),
         wrap_angle(th)};
  }
  if (t == 0.0) p = {p0.x, p0.y, wrap_angle(p0.theta)};
  return {p, {spec.v_r, spec.omega_r}};
}

inline ReferenceHorizon sample_reference(const ReferenceSpec& spec, double t0, const HorizonConfig& h) {
  ReferenceHorizon ref;
  ref.t0 = t0;
  ref.poses.reserve(h.grid_size());
  ref.inputs.reserve(h.grid_size());
  for (int i = 0; i < h.grid_size(); ++i) {
    const auto [pose, input] = reference_at(spec, t0 + i * h.substep());
    ref.poses.push_back(pose);
    ref.inputs.push_back(input);
  }
  return ref;
}

enum class DisturbanceMode { kRandom, kWorstCase, kZero };

struct DisturbanceModel {
  double eta = 0.0;
  DisturbanceMode mode = DisturbanceMode::kRandom;
  std::uint64_t seed = 1;
  double angle = 0.0;  // direction of the worst-case disturbance, rad
};

namespace detail {

inline double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace detail

// Disturbance on plant substep `index`. Random mode: uniform magnitude on
// [0, eta] and uniform direction. The norm never exceeds eta.
inline Disturbance sample_disturbance(const DisturbanceModel& model, std::uint64_t index) {
  Disturbance d;
  switch (model.mode) {
    case DisturbanceMode::kZero:
      return d;
    case DisturbanceMode::kWorstCase:
      d = {model.eta * std::cos(model.angle), model.eta * std::sin(model.angle)};
      break;
    case DisturbanceMode::kRandom: {
      std::seed_seq seq{static_cast<std::uint32_t>(model.seed), static_cast<std::uint32_t>(model.seed >> 32),
                        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
      std::mt19937_64 eng(seq);
      const double magnitude = model.eta * detail::unit_interval(eng());
      const double direction = 2.0 * kPi * detail::unit_interval(eng());
      d = {magnitude * std::cos(direction), magnitude * std::sin(direction)};
      break;
    }
  }
  const double n = d.norm();
  if (n > model.eta) {
    const double s = model.eta / n;
    d = {d.x * s, d.y * s};
  }
  return d;
}

// One RK4 step of the disturbed head model; `law(s, pose)` gives the input at
// time s into the sampling period.
template <class Law>
Pose rk4_head_step(const Pose& x, const Law& law, double s, double h, const Disturbance& d, double rho) {
  const auto rate = [&](const Pose& p, double t) {
    PoseDerivative f = f_head(p, law(t, p), rho);
    f.x += d.x;
    f.y += d.y;
    return f;
  };
  const auto add = [](const Pose& p, const PoseDerivative& k, double c) {
    return Pose{p.x + c * k.x, p.y + c * k.y, p.theta + c * k.theta};
  };
  const PoseDerivative k1 = rate(x, s);
  const PoseDerivative k2 = rate(add(x, k1, h / 2), s + h / 2);
  const PoseDerivative k3 = rate(add(x, k2, h / 2), s + h / 2);
  const PoseDerivative k4 = rate(add(x, k3, h), s + h);
  return {x.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), x.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          x.theta + h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta)};
}

// Integrates the disturbed head over [0, dt] in `substeps` RK4 steps; the
// disturbance on step i is sample_disturbance(model, first_index + i).
// Returns the substeps + 1 poses including the start; only the final heading
// is wrapped.
template <class Law>
std::vector<Pose> integrate_perturbed(const Pose& head, const Law& law, const DisturbanceModel& model, double dt,
                                      int substeps, double rho, std::uint64_t first_index = 0) {
  if (substeps < 1) throw std::invalid_argument("integrate_perturbed: substeps must be >= 1");
  std::vector<Pose> out;
  out.reserve(substeps + 1);
  out.push_back(head);
  const double h = dt / substeps;
  Pose x = head;
  for (int i = 0; i < substeps; ++i) {
    x = rk4_head_step(x, law, i * h, h, sample_disturbance(model, first_index + i), rho);
    if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(x.theta)) {
      throw NumericalBreakdown("non-finite state in plant integration");
    }
    out.push_back(x);
  }
  out.back().theta = wrap_angle(out.back().theta);
  return out;
}

enum class Strategy { kTube, kNrmpc };

inline const char* to_string(Strategy s) { return s == Strategy::kTube ? "tube" : "nrmpc"; }

struct SimConfig {
  Strategy strategy = Strategy::kTube;
  RobotParams robot{0.13, 0.0267};
  Weights weights{0.2, 0.2, 0.4, 0.4};
  HorizonConfig horizon{2.0, 0.2, 5};
  TerminalGains gains{1.2, 1.2};
  FeedbackGain feedback{-2.3, -2.3};
  FeedbackMode feedback_mode = FeedbackMode::kContinuous;
  double epsilon = 0.063;
  ReferenceSpec reference{0.015, 0.04, {0.0, 0.0, kPi / 3}};
  Pose follower_head{0.2, -0.2, -kPi / 2};
  DisturbanceModel disturbance{0.004, DisturbanceMode::kRandom, 1, 0.0};
  double duration = 60.0;
  SolverOptions solver;

  int steps() const { return static_cast<int>(std::llround(duration / horizon.delta())); }
};

// One record per sampling instant t_k.
struct StepRecord {
  double t = 0.0;
  Pose actual;      // follower head
  Pose reference;
  TrackingError error;
  BodyInput input;  // applied at t_k
  double input_index = 0.0;
  double pfe_x = 0.0;  // actual minus nominal head position
  double pfe_y = 0.0;
  double j_opt = 0.0;  // cost of the applied plan
  double stage_cost = 0.0;
  double state_cost = 0.0;
  double input_cost = 0.0;
  int solver_iters = 0;
  double solve_time = 0.0;
  bool feasible = false;
  bool fallback = false;

  // Diagnostics not written to the CSV.
  bool used_candidate = false;
  bool has_candidate = false;
  double candidate_violation = 0.0;
  double solver_violation = 0.0;
  double plan_violation = 0.0;
  double funnel_excess = 0.0;     // max_j ||p_rf(node j)|| - bound_j over the applied plan
  double one_step_deviation = 0.0;  // NRMPC: ||xi(t_k) - predicted xi(t_k)||
  std::vector<TrackingError> predicted_errors;
};

// Continuous signals on the plant substep grid, t = i delta / m.
struct SubstepSeries {
  std::vector<double> t;
  std::vector<Pose> actual;
  std::vector<Pose> reference;
  std::vector<TrackingError> error;
  std::vector<BodyInput> input;
  std::vector<double> input_index;
  std::vector<double> pfe_x;
  std::vector<double> pfe_y;
  std::vector<double> stage_cost;
  std::vector<double> state_cost;
  std::vector<double> input_cost;
};

struct SimLog {
  Strategy strategy = Strategy::kTube;
  std::uint64_t seed = 0;
  double delta = 0.0;
  int substeps = 0;
  CertifiedParams certificate;
  std::vector<StepRecord> steps;
  SubstepSeries substep;
  std::vector<Disturbance> disturbances;  // one per plant substep
  double runtime = 0.0;                   // s, wall clock
};

inline CertifiedParams certificate_for(const SimConfig& cfg) {
  const double v_r_max = std::abs(cfg.reference.v_r);
  if (cfg.strategy == Strategy::kTube) {
    return certify_tube(cfg.robot, cfg.weights, cfg.gains, cfg.feedback, cfg.disturbance.eta, v_r_max);
  }
  return certify_nrmpc(cfg.robot, cfg.weights, cfg.gains, cfg.disturbance.eta, v_r_max, cfg.horizon, cfg.epsilon);
}

namespace detail {

inline void push_substep(SimLog& log, double t, const Pose& actual, const BodyInput& u, const Pose& nominal,
                         const ReferenceSpec& ref_spec, const SimConfig& cfg) {
  SubstepSeries& s = log.substep;
  const auto [ref, ref_u] = reference_at(ref_spec, t);
  const Pose head{actual.x, actual.y, wrap_angle(actual.theta)};
  const TrackingError e = tracking_error(ref, head);
  const InputError ue = input_error(u, ref_u.v, e.theta, cfg.robot.rho());
  s.t.push_back(t);
  s.actual.push_back(head);
  s.reference.push_back(ref);
  s.error.push_back(e);
  s.input.push_back(u);
  s.input_index.push_back(input_index(u, cfg.robot));
  s.pfe_x.push_back(actual.x - nominal.x);
  s.pfe_y.push_back(actual.y - nominal.y);
  s.state_cost.push_back(state_cost(e, cfg.weights));
  s.input_cost.push_back(input_cost(ue, cfg.weights));
  s.stage_cost.push_back(s.state_cost.back() + s.input_cost.back());
}

}  // namespace detail

// Runs the configured strategy for cfg.steps() sampling periods. The
// certificate is computed and stored but not enforced here.
inline SimLog run_closed_loop(const SimConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  SimLog log;
  log.strategy = cfg.strategy;
  log.seed = cfg.disturbance.seed;
  log.delta = cfg.horizon.delta();
  log.substeps = cfg.horizon.m();
  log.certificate = certificate_for(cfg);

  const ControllerSetup setup{cfg.robot, cfg.weights, cfg.horizon, cfg.gains, cfg.solver};
  const int steps = cfg.steps();
  const int m = cfg.horizon.m();
  const double delta = cfg.horizon.delta();
  const double rho = cfg.robot.rho();

  std::optional<TubeMpc> tube;
  std::optional<Nrmpc> nrmpc;
  TubeState tube_state;
  NrmpcState nr_state;
  if (cfg.strategy == Strategy::kTube) {
    tube.emplace(setup, log.certificate, cfg.feedback, cfg.feedback_mode);
    tube_state = tube->initial_state(cfg.follower_head);
  } else {
    nrmpc.emplace(setup, log.certificate);
    nr_state = nrmpc->initial_state(cfg.follower_head);
  }

  Pose actual = cfg.follower_head;
  log.steps.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double t_k = static_cast<double>(k * m) * delta / m;  // same rounding as the substep grid
    const ReferenceHorizon ref = sample_reference(cfg.reference, t_k, cfg.horizon);
    const Pose measured{actual.x, actual.y, wrap_angle(actual.theta)};

    StepReport rep;
    IntervalControl law;
    double one_step = 0.0;
    if (tube) {
      auto [l, next] = tube->step(tube_state, measured, ref, &rep);
      law = l;
      tube_state = std::move(next);
    } else {
      const Pose& p = nr_state.predicted_next;
      one_step = k == 0 ? 0.0
                        : std::sqrt(std::pow(measured.x - p.x, 2) + std::pow(measured.y - p.y, 2) +
                                    std::pow(wrap_angle(measured.theta - p.theta), 2));
      auto [l, next] = nrmpc->step(nr_state, measured, ref, &rep);
      law = l;
      nr_state = std::move(next);
    }

    const std::vector<Pose> path =
        integrate_perturbed(measured, law, cfg.disturbance, delta, m, rho, static_cast<std::uint64_t>(k) * m);
    for (int i = 0; i < m; ++i) {
      log.disturbances.push_back(sample_disturbance(cfg.disturbance, static_cast<std::uint64_t>(k) * m + i));
    }

    // Substep series: points t_k + i h for i = 0..m-1 (the next period owns
    // its first point; the run end is appended after the loop).
    const int last = k == steps - 1 ? m : m - 1;
    for (int i = 0; i <= last; ++i) {
      const double s = i * delta / m;
      const double t = static_cast<double>(k * m + i) * delta / m;
      detail::push_substep(log, t, path[i], law(s, path[i]), law.nominal_at(s), cfg.reference, cfg);
    }

    StepRecord rec;
    const std::size_t i0 = static_cast<std::size_t>(k) * m;
    const SubstepSeries& s = log.substep;
    rec.t = t_k;
    rec.actual = s.actual[i0];
    rec.reference = reference_at(cfg.reference, t_k).first;
    rec.error = s.error[i0];
    rec.input = s.input[i0];
    rec.input_index = s.input_index[i0];
    rec.pfe_x = s.pfe_x[i0];
    rec.pfe_y = s.pfe_y[i0];
    rec.stage_cost = s.stage_cost[i0];
    rec.state_cost = s.state_cost[i0];
    rec.input_cost = s.input_cost[i0];
    rec.j_opt = rep.applied.cost;
    rec.solver_iters = rep.solution.iterations;
    rec.solve_time = rep.solution.solve_time;
    rec.feasible = rep.applied.feasible;
    rec.fallback = rep.fallback;
    rec.used_candidate = rep.used_candidate;
    rec.has_candidate = rep.candidate.has_value();
    rec.candidate_violation = rep.candidate ? rep.candidate->constraint_violation : 0.0;
    rec.solver_violation = rep.solution.constraint_violation;
    rec.plan_violation = rep.applied.constraint_violation;
    rec.predicted_errors = rep.applied.predicted_errors;
    rec.one_step_deviation = one_step;
    if (nrmpc) {
      const TrackingOcp ocp = nrmpc->problem(measured, ref);
      double worst = -std::numeric_limits<double>::infinity();
      for (int j = 1; j <= ocp.N(); ++j) {
        worst = std::max(worst, rep.applied.predicted_errors[j].position_norm() - ocp.funnel_bound(j));
      }
      rec.funnel_excess = worst;
    }
    log.steps.push_back(std::move(rec));

    actual = path[m];
    actual.theta = wrap_angle(actual.theta);
  }
  log.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return log;
}

}  // namespace rmpc

#endif  // RMPC_SIM_HPP_
