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

#ifndef RMPC_ERROR_FRAME_HPP_
#define RMPC_ERROR_FRAME_HPP_

// Tracking error of a reference pose expressed in the follower's body
// (Frenet-Serret) frame, and its dynamics.
//
// The error is p_rf = R(theta_f)^T (p_r - p_fh). This is the rotation sense
// whose time derivative reproduces the skew-symmetric error dynamics
//
//   d/dt p_rf = [[0, w_f], [-w_f, 0]] p_rf
//               + [-v_f + v_r cos(th_rf), -rho w_f + v_r sin(th_rf)]
//               - R(theta_f)^T d_p
//
// (checked numerically by finite differences in the tests). The disturbance
// enters rotated into the body frame with a minus sign; only its norm
// matters for the robustness bounds.

#include <Eigen/Core>
#include <cmath>

#include "rmpc/kinematics.hpp"

namespace rmpc {

struct TrackingError {
  double x = 0.0;      // m, along the follower heading
  double y = 0.0;      // m, to the follower's left
  double theta = 0.0;  // rad, wrapped

  double position_norm() const { return std::hypot(x, y); }
};

struct TrackingErrorDerivative {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Second component carries rho * omega, so both are velocities.
struct InputError {
  double e_v = 0.0;
  double e_w = 0.0;
};

// Additive head-position disturbance; the heading channel is identically zero.
struct Disturbance {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
};

inline Eigen::Matrix2d rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

inline TrackingError tracking_error(const Pose& ref, const Pose& follower_head) {
  const double dx = ref.x - follower_head.x;
  const double dy = ref.y - follower_head.y;
  const double c = std::cos(follower_head.theta);
  const double s = std::sin(follower_head.theta);
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(ref.theta - follower_head.theta)};
}

inline InputError input_error(const BodyInput& u_f, double v_r, double theta_rf, double rho) {
  return {-u_f.v + v_r * std::cos(theta_rf), -rho * u_f.omega + v_r * std::sin(theta_rf)};
}

inline TrackingErrorDerivative error_dynamics(const TrackingError& e, const BodyInput& u_f,
                                              const BodyInput& u_r, const Disturbance& d,
                                              double theta_f, double rho) {
  const InputError ue = input_error(u_f, u_r.v, e.theta, rho);
  const double c = std::cos(theta_f);
  const double s = std::sin(theta_f);
  // -R(theta_f)^T d
  const double dbx = -(c * d.x + s * d.y);
  const double dby = -(-s * d.x + c * d.y);
  return {u_f.omega * e.y + ue.e_v + dbx, -u_f.omega * e.x + ue.e_w + dby,
          u_r.omega - u_f.omega};
}

// M(theta) = [[cos, -rho sin], [sin, rho cos]] maps (v, omega) to the head
// velocity in the world frame. det M = rho.
inline Eigen::Matrix2d affine_input_matrix(double theta, double rho) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d m;
  m << c, -rho * s, s, rho * c;
  return m;
}

inline Eigen::Matrix2d affine_input_matrix_inverse(double theta, double rho) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d m;
  m << c, s, -s / rho, c / rho;
  return m;
}

}  // namespace rmpc

#endif  // RMPC_ERROR_FRAME_HPP_
