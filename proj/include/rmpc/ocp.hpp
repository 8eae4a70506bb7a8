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

#ifndef RMPC_OCP_HPP_
#define RMPC_OCP_HPP_

/**
 * @file
 * @brief Finite-horizon tracking problem for the nominal head-point model.
 *
 * The cost over [t_k, t_k + T] is
 *
 *   J = integral L(p_rf, u_rf) dt + 1/2 |p_rf(t_k + T)|^2,
 *   L = q1 x_rf^2 + q2 y_rf^2 + p1 e_v^2 + p2 e_w^2,
 *
 * discretized by direct multiple shooting: N intervals of length delta with
 * a piecewise-constant control, RK4 with m substeps per interval, and the
 * trapezoidal rule on the substep grid.
 *
 * Decision variables are wheel speeds (the diamond input set becomes a box)
 * followed by the N-1 interior shooting poses:
 *
 *   z = [w_0^L, w_0^R, ..., w_{N-1}^L, w_{N-1}^R, s_1, ..., s_{N-1}].
 *
 * Equality constraints are the shooting defects s_{j+1} - Phi(s_j, u_j),
 * j = 0..N-2; the terminal pose is Phi(s_{N-1}, u_{N-1}). Inequalities
 * (all of the form c(z) <= 0) are the terminal set and, when present, the
 * shrinking funnel |p_rf(t_k + j delta)| <= r N / j at nodes j = 1..N.
 */

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "rmpc/error_frame.hpp"
#include "rmpc/kinematics.hpp"
#include "rmpc/status.hpp"

namespace rmpc {

struct Weights {
  double q1 = 0.0;
  double q2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  bool positive() const { return q1 > 0.0 && q2 > 0.0 && p1 > 0.0 && p2 > 0.0; }
};

class HorizonConfig {
 public:
  // Throws std::invalid_argument unless T = N * delta for an integer N >= 2.
  HorizonConfig(double horizon, double delta, int substeps) : T_(horizon), delta_(delta), m_(substeps) {
    if (!(horizon > 0.0) || !(delta > 0.0)) {
      throw std::invalid_argument("horizon and delta must be positive");
    }
    if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    const double ratio = horizon / delta;
    N_ = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - N_) > 1e-9 * std::max(1.0, ratio)) {
      throw std::invalid_argument("T must equal N·delta for integer N");
    }
    if (N_ < 2) throw std::invalid_argument("horizon must contain at least 2 intervals");
  }

  double T() const { return T_; }
  double delta() const { return delta_; }
  int N() const { return N_; }
  int m() const { return m_; }
  double substep() const { return delta_ / m_; }
  int grid_size() const { return N_ * m_ + 1; }

 private:
  double T_;
  double delta_;
  int N_ = 0;
  int m_;
};

struct TerminalGains {
  double k1 = 0.0;
  double k2 = 0.0;

  double min() const { return std::min(k1, k2); }
};

// Open interval of admissible terminal gains for one axis. Empty (nullopt)
// when p q >= 1/4.
inline std::optional<std::pair<double, double>> terminal_gain_interval(double p, double q) {
  const double disc = 1.0 - 4.0 * p * q;
  if (!(disc > 0.0)) return std::nullopt;
  const double root = std::sqrt(disc);
  return std::make_pair((1.0 - root) / (2.0 * p), (1.0 + root) / (2.0 * p));
}

struct TerminalDiamond {
  double level = 0.0;  // k1 |x| + k2 |y| <= level
};

struct TerminalBall {
  double radius = 0.0;
};

struct ConstraintSpec {
  double input_scale = 1.0;
  std::variant<TerminalDiamond, TerminalBall> terminal = TerminalBall{};
  std::optional<double> funnel_r;

  void validate() const {
    if (!(input_scale > 0.0) || input_scale > 1.0) {
      throw std::invalid_argument("input scale must lie in (0, 1]");
    }
    if (const auto* d = std::get_if<TerminalDiamond>(&terminal)) {
      if (!(d->level > 0.0)) throw std::invalid_argument("terminal diamond level must be positive");
    } else {
      const double eps = std::get<TerminalBall>(terminal).radius;
      if (!(eps > 0.0)) throw std::invalid_argument("terminal ball radius must be positive");
      if (funnel_r && !(eps < *funnel_r)) {
        throw std::invalid_argument("terminal ball radius must be smaller than the funnel r");
      }
    }
    if (funnel_r && !(*funnel_r > 0.0)) throw std::invalid_argument("funnel r must be positive");
  }
};

// Reference sampled on the substep grid t0 + i * delta / m, i = 0..N m.
struct ReferenceHorizon {
  double t0 = 0.0;
  std::vector<Pose> poses;
  std::vector<BodyInput> inputs;
};

inline double stage_cost(const TrackingError& e, const InputError& ue, const Weights& w) {
  return w.q1 * e.x * e.x + w.q2 * e.y * e.y + w.p1 * ue.e_v * ue.e_v + w.p2 * ue.e_w * ue.e_w;
}

inline double state_cost(const TrackingError& e, const Weights& w) {
  return w.q1 * e.x * e.x + w.q2 * e.y * e.y;
}

inline double input_cost(const InputError& ue, const Weights& w) {
  return w.p1 * ue.e_v * ue.e_v + w.p2 * ue.e_w * ue.e_w;
}

inline double terminal_penalty(const TrackingError& e) { return 0.5 * (e.x * e.x + e.y * e.y); }

// Local law that makes the Lyapunov derivative of the terminal penalty
// -(k1 x^2 + k2 y^2) under the nominal error dynamics.
inline BodyInput terminal_controller(const TrackingError& e, double v_r, const TerminalGains& gains,
                                     double rho) {
  return {gains.k1 * e.x + v_r * std::cos(e.theta),
          (gains.k2 * e.y + v_r * std::sin(e.theta)) / rho};
}

inline bool in_terminal_diamond(const TrackingError& e, const TerminalGains& gains, double level) {
  return gains.k1 * std::abs(e.x) + gains.k2 * std::abs(e.y) <= level;
}

namespace detail {

using Vec3 = Eigen::Vector3d;
using Sens = Eigen::Matrix<double, 3, 5>;  // d state / d [start state (3), v, omega]
using Row5 = Eigen::Matrix<double, 1, 5>;

inline Vec3 head_rate(const Vec3& x, double v, double w, double rho) {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  return {v * c - rho * w * s, v * s + rho * w * c, w};
}

// d f / d [x, u] times the chain factor [S; E] where E selects the controls.
inline Sens head_rate_sensitivity(const Vec3& x, double v, double w, double rho, const Sens& s_x) {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  Sens out = Sens::Zero();
  // f_x only has a theta column.
  const double dfx_dth = -v * s - rho * w * c;
  const double dfy_dth = v * c - rho * w * s;
  out.row(0) = dfx_dth * s_x.row(2);
  out.row(1) = dfy_dth * s_x.row(2);
  out(0, 3) += c;
  out(0, 4) += -rho * s;
  out(1, 3) += s;
  out(1, 4) += rho * c;
  out(2, 4) += 1.0;
  return out;
}

inline Vec3 rk4_step(const Vec3& x, double v, double w, double rho, double h) {
  const Vec3 k1 = head_rate(x, v, w, rho);
  const Vec3 k2 = head_rate(x + 0.5 * h * k1, v, w, rho);
  const Vec3 k3 = head_rate(x + 0.5 * h * k2, v, w, rho);
  const Vec3 k4 = head_rate(x + h * k3, v, w, rho);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Exact derivative of the discrete RK4 map.
inline void rk4_step_sens(Vec3& x, Sens& s, double v, double w, double rho, double h) {
  const Vec3 k1 = head_rate(x, v, w, rho);
  const Sens d1 = head_rate_sensitivity(x, v, w, rho, s);
  const Vec3 x2 = x + 0.5 * h * k1;
  const Sens s2 = s + 0.5 * h * d1;
  const Vec3 k2 = head_rate(x2, v, w, rho);
  const Sens d2 = head_rate_sensitivity(x2, v, w, rho, s2);
  const Vec3 x3 = x + 0.5 * h * k2;
  const Sens s3 = s + 0.5 * h * d2;
  const Vec3 k3 = head_rate(x3, v, w, rho);
  const Sens d3 = head_rate_sensitivity(x3, v, w, rho, s3);
  const Vec3 x4 = x + h * k3;
  const Sens s4 = s + h * d3;
  const Vec3 k4 = head_rate(x4, v, w, rho);
  const Sens d4 = head_rate_sensitivity(x4, v, w, rho, s4);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  s += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
}

// Stage cost and its gradient with respect to [px, py, theta, v, omega].
inline double stage_cost_grad(const Vec3& x, double v, double w, const Pose& ref, const BodyInput& u_ref,
                              const Weights& wt, double rho, Row5* grad) {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double dx = ref.x - x(0);
  const double dy = ref.y - x(1);
  const double ex = c * dx + s * dy;
  const double ey = -s * dx + c * dy;
  const double th_rf = ref.theta - x(2);
  const double cr = std::cos(th_rf);
  const double sr = std::sin(th_rf);
  const double ue1 = -v + u_ref.v * cr;
  const double ue2 = -rho * w + u_ref.v * sr;
  if (grad != nullptr) {
    (*grad)(0) = -2.0 * wt.q1 * ex * c + 2.0 * wt.q2 * ey * s;
    (*grad)(1) = -2.0 * wt.q1 * ex * s - 2.0 * wt.q2 * ey * c;
    (*grad)(2) = 2.0 * wt.q1 * ex * ey - 2.0 * wt.q2 * ey * ex + 2.0 * wt.p1 * ue1 * u_ref.v * sr -
                 2.0 * wt.p2 * ue2 * u_ref.v * cr;
    (*grad)(3) = -2.0 * wt.p1 * ue1;
    (*grad)(4) = -2.0 * wt.p2 * ue2 * rho;
  }
  return wt.q1 * ex * ex + wt.q2 * ey * ey + wt.p1 * ue1 * ue1 + wt.p2 * ue2 * ue2;
}

inline Vec3 to_vec(const Pose& p) { return {p.x, p.y, p.theta}; }
inline Pose to_pose(const Vec3& v) { return {v(0), v(1), wrap_angle(v(2))}; }

}  // namespace detail

// Trapezoidal cost of a trajectory sampled on the substep grid. states has
// N m + 1 entries; controls has N entries (one per interval, held constant).
inline double total_cost(const std::vector<Pose>& states, const std::vector<BodyInput>& controls,
                         const Weights& w, const HorizonConfig& h, const ReferenceHorizon& ref,
                         double rho) {
  const int m = h.m();
  const double dt = h.substep();
  if (static_cast<int>(states.size()) != h.grid_size() || static_cast<int>(controls.size()) != h.N()) {
    throw std::invalid_argument("total_cost: trajectory does not cover the horizon grid");
  }
  double cost = 0.0;
  for (int j = 0; j < h.N(); ++j) {
    for (int i = 0; i <= m; ++i) {
      const int node = j * m + i;
      const double weight = (i == 0 || i == m) ? 0.5 * dt : dt;
      const TrackingError e = tracking_error(ref.poses[node], states[node]);
      cost += weight * stage_cost(e, input_error(controls[j], ref.inputs[node].v, e.theta, rho), w);
    }
  }
  return cost + terminal_penalty(tracking_error(ref.poses.back(), states.back()));
}

// Everything a solver needs from a constrained NLP with simple bounds:
// f, grad f, equality residuals c_eq = 0, inequalities c_in <= 0 and their
// Jacobians.
struct NlpEval {
  double f = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd c_eq;
  Eigen::MatrixXd jac_eq;
  Eigen::VectorXd c_in;
  Eigen::MatrixXd jac_in;
};

// Nominal trajectory generated by a control sequence from a fixed start.
struct Rollout {
  std::vector<Pose> substep_states;  // N m + 1, headings unwrapped
  std::vector<Pose> node_states;     // N + 1, headings wrapped
  std::vector<TrackingError> node_errors;
  double cost = 0.0;
  double constraint_violation = 0.0;  // max inequality violation (no defects in a rollout)
};

// Tube and NRMPC transcription.
class TrackingOcp {
 public:
  TrackingOcp(const Pose& initial_head, ReferenceHorizon reference, const ConstraintSpec& spec,
              const Weights& weights, const HorizonConfig& horizon, const RobotParams& robot,
              const TerminalGains& gains)
      : initial_(initial_head),
        ref_(std::move(reference)),
        spec_(spec),
        weights_(weights),
        horizon_(horizon),
        robot_(robot),
        gains_(gains) {
    spec_.validate();
    if (static_cast<int>(ref_.poses.size()) != horizon_.grid_size() ||
        ref_.inputs.size() != ref_.poses.size()) {
      throw std::invalid_argument("reference must be sampled on the N*m+1 substep grid");
    }
  }

  int N() const { return horizon_.N(); }
  int dimension() const { return 2 * N() + 3 * (N() - 1); }
  int num_controls() const { return 2 * N(); }
  int num_eq() const { return 3 * (N() - 1); }
  int num_terminal() const { return std::holds_alternative<TerminalDiamond>(spec_.terminal) ? 4 : 1; }
  int num_funnel() const { return spec_.funnel_r ? N() : 0; }
  int num_ineq() const { return num_terminal() + num_funnel(); }

  double wheel_bound() const { return spec_.input_scale * robot_.a(); }
  Eigen::VectorXd lower() const {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(dimension(), -kInf);
    lo.head(num_controls()).setConstant(-wheel_bound());
    return lo;
  }
  Eigen::VectorXd upper() const {
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(dimension(), kInf);
    hi.head(num_controls()).setConstant(wheel_bound());
    return hi;
  }

  const Pose& initial_head() const { return initial_; }
  const ReferenceHorizon& reference() const { return ref_; }
  const ConstraintSpec& spec() const { return spec_; }
  const Weights& weights() const { return weights_; }
  const HorizonConfig& horizon() const { return horizon_; }
  const RobotParams& robot() const { return robot_; }
  const TerminalGains& gains() const { return gains_; }

  // Funnel radius at node j (1..N): r T / (j delta) = r N / j.
  double funnel_bound(int j) const { return *spec_.funnel_r * N() / static_cast<double>(j); }

  BodyInput control(const Eigen::VectorXd& z, int j) const {
    return wheels_to_body({z(2 * j), z(2 * j + 1)}, robot_);
  }

  // Stacks wheel speeds and the interior poses of a rollout of `controls`.
  Eigen::VectorXd pack(const std::vector<BodyInput>& controls) const {
    Eigen::VectorXd z(dimension());
    for (int j = 0; j < N(); ++j) {
      const WheelSpeeds w = body_to_wheels(controls[j], robot_);
      z(2 * j) = w.left;
      z(2 * j + 1) = w.right;
    }
    const Rollout r = rollout(controls);
    for (int j = 1; j < N(); ++j) {
      const Pose& p = r.substep_states[j * horizon_.m()];
      z.segment<3>(state_index(j)) = detail::to_vec(p);
    }
    return z;
  }

  std::vector<BodyInput> controls(const Eigen::VectorXd& z) const {
    std::vector<BodyInput> out(N());
    for (int j = 0; j < N(); ++j) out[j] = control(z, j);
    return out;
  }

  // Pure-feedforward wheel speeds of the reference input, clipped to the box.
  std::vector<BodyInput> feedforward_controls() const {
    std::vector<BodyInput> out(N());
    for (int j = 0; j < N(); ++j) {
      WheelSpeeds w = body_to_wheels(ref_.inputs[j * horizon_.m()], robot_);
      w.left = std::clamp(w.left, -wheel_bound(), wheel_bound());
      w.right = std::clamp(w.right, -wheel_bound(), wheel_bound());
      out[j] = wheels_to_body(w, robot_);
    }
    return out;
  }

  void evaluate(const Eigen::VectorXd& z, NlpEval& out) const {
    const int n = dimension();
    const int nn = N();
    out.f = 0.0;
    out.grad.setZero(n);
    out.c_eq.setZero(num_eq());
    out.jac_eq.setZero(num_eq(), n);
    out.c_in.setZero(num_ineq());
    out.jac_in.setZero(num_ineq(), n);

    Eigen::Matrix2d wheel_to_body;
    wheel_to_body << 0.5, 0.5, -0.5 / robot_.rho(), 0.5 / robot_.rho();

    for (int j = 0; j < nn; ++j) {
      const detail::Vec3 start = j == 0 ? detail::to_vec(initial_) : z.segment<3>(state_index(j)).eval();
      const BodyInput u = control(z, j);
      detail::Vec3 end;
      detail::Sens sens;
      detail::Row5 cost_grad;
      out.f += propagate_interval(j, start, u, &end, &sens, &cost_grad, nullptr);
      out.grad.segment<2>(2 * j) += (cost_grad.segment<2>(3) * wheel_to_body).transpose();
      if (j >= 1) out.grad.segment<3>(state_index(j)) += cost_grad.segment<3>(0).transpose();
      const Eigen::Matrix<double, 3, 2> sens_w = sens.rightCols<2>() * wheel_to_body;

      if (j < nn - 1) {
        const int row = 3 * j;
        out.c_eq.segment<3>(row) = z.segment<3>(state_index(j + 1)) - end;
        out.jac_eq.block<3, 3>(row, state_index(j + 1)).setIdentity();
        if (j >= 1) out.jac_eq.block<3, 3>(row, state_index(j)) -= sens.leftCols<3>();
        out.jac_eq.block<3, 2>(row, 2 * j) -= sens_w;
        continue;
      }

      // Terminal node: everything is a function of (s_{N-1}, u_{N-1}) through `end`.
      const Pose& ref = ref_.poses.back();
      const auto chain = [&](const Eigen::RowVector3d& d_end, int row_in) {
        const Eigen::Matrix<double, 1, 5> d = d_end * sens;
        if (row_in < 0) {
          out.grad.segment<2>(2 * j) += (d.segment<2>(3) * wheel_to_body).transpose();
          if (j >= 1) out.grad.segment<3>(state_index(j)) += d.segment<3>(0).transpose();
        } else {
          out.jac_in.block<1, 2>(row_in, 2 * j) += d.segment<2>(3) * wheel_to_body;
          if (j >= 1) out.jac_in.block<1, 3>(row_in, state_index(j)) += d.segment<3>(0);
        }
      };
      const double dx = ref.x - end(0);
      const double dy = ref.y - end(1);
      out.f += 0.5 * (dx * dx + dy * dy);
      chain(Eigen::RowVector3d(-dx, -dy, 0.0), -1);

      int row = 0;
      if (const auto* diamond = std::get_if<TerminalDiamond>(&spec_.terminal)) {
        const double c = std::cos(end(2));
        const double s = std::sin(end(2));
        const double ex = c * dx + s * dy;
        const double ey = -s * dx + c * dy;
        const Eigen::RowVector3d gex(-c, -s, ey);
        const Eigen::RowVector3d gey(s, -c, -ex);
        for (int sx = -1; sx <= 1; sx += 2) {
          for (int sy = -1; sy <= 1; sy += 2) {
            out.c_in(row) = sx * gains_.k1 * ex + sy * gains_.k2 * ey - diamond->level;
            chain(sx * gains_.k1 * gex + sy * gains_.k2 * gey, row);
            ++row;
          }
        }
      } else {
        const double eps = std::get<TerminalBall>(spec_.terminal).radius;
        out.c_in(row) = (dx * dx + dy * dy - eps * eps) / (2.0 * eps);
        chain(Eigen::RowVector3d(-dx / eps, -dy / eps, 0.0), row);
        ++row;
      }
      if (spec_.funnel_r) {
        const double b = funnel_bound(nn);
        out.c_in(row + nn - 1) = (dx * dx + dy * dy - b * b) / (2.0 * b);
        chain(Eigen::RowVector3d(-dx / b, -dy / b, 0.0), row + nn - 1);
      }
    }

    // Funnel at interior nodes acts on the shooting variables directly.
    if (spec_.funnel_r) {
      const int base = num_terminal();
      for (int j = 1; j < nn; ++j) {
        const Pose& ref = ref_.poses[j * horizon_.m()];
        const double dx = ref.x - z(state_index(j));
        const double dy = ref.y - z(state_index(j) + 1);
        const double b = funnel_bound(j);
        out.c_in(base + j - 1) = (dx * dx + dy * dy - b * b) / (2.0 * b);
        out.jac_in(base + j - 1, state_index(j)) = -dx / b;
        out.jac_in(base + j - 1, state_index(j) + 1) = -dy / b;
      }
    }
    if (!std::isfinite(out.f)) throw NumericalBreakdown("non-finite cost in OCP evaluation");
  }

  // Single-shooting evaluation of a control sequence from the initial head.
  Rollout rollout(const std::vector<BodyInput>& controls) const {
    const int nn = N();
    const int m = horizon_.m();
    Rollout r;
    r.substep_states.reserve(horizon_.grid_size());
    detail::Vec3 x = detail::to_vec(initial_);
    r.substep_states.push_back(initial_);
    for (int j = 0; j < nn; ++j) {
      std::vector<Pose> tail;
      detail::Vec3 end;
      r.cost += propagate_interval(j, x, controls[j], &end, nullptr, nullptr, &tail);
      r.substep_states.insert(r.substep_states.end(), tail.begin() + 1, tail.end());
      x = end;
    }
    for (int j = 0; j <= nn; ++j) {
      const Pose& p = r.substep_states[j * m];
      r.node_states.push_back({p.x, p.y, wrap_angle(p.theta)});
      r.node_errors.push_back(tracking_error(ref_.poses[j * m], p));
    }
    const TrackingError& e_end = r.node_errors.back();
    r.cost += terminal_penalty(e_end);
    r.constraint_violation = std::max(0.0, max_inequality(r.node_errors));
    if (!std::isfinite(r.cost)) throw NumericalBreakdown("non-finite cost in rollout");
    return r;
  }

  // Largest inequality value (positive means violated) along node errors.
  double max_inequality(const std::vector<TrackingError>& node_errors) const {
    const TrackingError& e = node_errors.back();
    double worst = -kInf;
    if (const auto* diamond = std::get_if<TerminalDiamond>(&spec_.terminal)) {
      worst = gains_.k1 * std::abs(e.x) + gains_.k2 * std::abs(e.y) - diamond->level;
    } else {
      worst = e.position_norm() - std::get<TerminalBall>(spec_.terminal).radius;
    }
    if (spec_.funnel_r) {
      for (int j = 1; j <= N(); ++j) {
        worst = std::max(worst, node_errors[j].position_norm() - funnel_bound(j));
      }
    }
    return worst;
  }

  void dump(std::ostream& os) const {
    os << "TrackingOcp\n"
       << "  N = " << N() << ", m = " << horizon_.m() << ", T = " << horizon_.T()
       << ", delta = " << horizon_.delta() << "\n"
       << "  variables = " << dimension() << " (controls " << num_controls() << ", interior poses "
       << 3 * (N() - 1) << ")\n"
       << "  equalities = " << num_eq() << ", inequalities = " << num_ineq() << "\n"
       << "  wheel bound = " << wheel_bound() << "\n"
       << "  initial head = (" << initial_.x << ", " << initial_.y << ", " << initial_.theta << ")\n"
       << "  weights q = (" << weights_.q1 << ", " << weights_.q2 << "), p = (" << weights_.p1 << ", "
       << weights_.p2 << ")\n";
    if (const auto* d = std::get_if<TerminalDiamond>(&spec_.terminal)) {
      os << "  terminal diamond level = " << d->level << " (gains " << gains_.k1 << ", " << gains_.k2
         << ")\n";
    } else {
      os << "  terminal ball radius = " << std::get<TerminalBall>(spec_.terminal).radius << "\n";
    }
    if (spec_.funnel_r) {
      os << "  funnel r = " << *spec_.funnel_r << ", node bounds:";
      for (int j = 1; j <= N(); ++j) os << " " << funnel_bound(j);
      os << "\n";
    }
  }

  int state_index(int j) const { return 2 * N() + 3 * (j - 1); }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  // Integrates interval j from `start` under constant u and returns its
  // trapezoidal cost. Optional outputs: end state, sensitivity of the end
  // state, cost gradient (both w.r.t. [start, v, omega]) and substep states.
  double propagate_interval(int j, const detail::Vec3& start, const BodyInput& u, detail::Vec3* end,
                            detail::Sens* sens_out, detail::Row5* grad_out,
                            std::vector<Pose>* states_out) const {
    const int m = horizon_.m();
    const double h = horizon_.substep();
    const double rho = robot_.rho();
    detail::Vec3 x = start;
    detail::Sens s = detail::Sens::Zero();
    s.leftCols<3>().setIdentity();
    detail::Row5 grad = detail::Row5::Zero();
    detail::Row5 g;
    const bool want_grad = grad_out != nullptr || sens_out != nullptr;
    double cost = 0.0;
    if (states_out != nullptr) states_out->push_back({x(0), x(1), x(2)});
    for (int i = 0; i <= m; ++i) {
      const int node = j * m + i;
      const double weight = (i == 0 || i == m) ? 0.5 * h : h;
      cost += weight * detail::stage_cost_grad(x, u.v, u.omega, ref_.poses[node], ref_.inputs[node], weights_,
                                               rho, want_grad ? &g : nullptr);
      if (want_grad) {
        grad.noalias() += weight * (g.segment<3>(0) * s);
        grad(3) += weight * g(3);
        grad(4) += weight * g(4);
      }
      if (i == m) break;
      if (want_grad) {
        detail::rk4_step_sens(x, s, u.v, u.omega, rho, h);
      } else {
        x = detail::rk4_step(x, u.v, u.omega, rho, h);
      }
      if (states_out != nullptr) states_out->push_back({x(0), x(1), x(2)});
    }
    if (end != nullptr) *end = x;
    if (sens_out != nullptr) *sens_out = s;
    if (grad_out != nullptr) *grad_out = grad;
    return cost;
  }

  Pose initial_;
  ReferenceHorizon ref_;
  ConstraintSpec spec_;
  Weights weights_;
  HorizonConfig horizon_;
  RobotParams robot_;
  TerminalGains gains_;
};

}  // namespace rmpc

#endif  // RMPC_OCP_HPP_
