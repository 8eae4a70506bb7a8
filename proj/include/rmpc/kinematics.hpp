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

#ifndef RMPC_KINEMATICS_HPP_
#define RMPC_KINEMATICS_HPP_

// Unicycle and head-point kinematics of a differential-drive robot, the
// wheel-speed algebra and the coupled ("diamond") input set
//
//   |v| / a + |omega| / b <= lambda,   b = a / rho,
//
// which is the image of the wheel-speed box max(|v_L|, |v_R|) <= lambda * a.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rmpc {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  double wrapped = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

// Planar pose. Heading is kept in (-pi, pi] by every public operation that
// returns a Pose; solver internals carry unwrapped headings in raw vectors.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// Time derivative of a pose (no wrapping applies).
struct PoseDerivative {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct BodyInput {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s

  friend bool operator==(const BodyInput&, const BodyInput&) = default;
};

struct WheelSpeeds {
  double left = 0.0;   // m/s
  double right = 0.0;  // m/s
};

// Max wheel speed a, half wheelbase rho and the derived angular bound b = a/rho.
// b is computed once at construction so every consumer sees the same rounding.
class RobotParams {
 public:
  RobotParams(double max_wheel_speed, double half_wheelbase)
      : a_(max_wheel_speed), rho_(half_wheelbase), b_(max_wheel_speed / half_wheelbase) {
    if (!(a_ > 0.0) || !(rho_ > 0.0) || !std::isfinite(a_) || !std::isfinite(rho_)) {
      throw std::invalid_argument("RobotParams: a and rho must be positive and finite");
    }
  }

  double a() const { return a_; }
  double rho() const { return rho_; }
  double b() const { return b_; }

 private:
  double a_;
  double rho_;
  double b_;
};

inline BodyInput wheels_to_body(const WheelSpeeds& w, const RobotParams& params) {
  return {0.5 * (w.left + w.right), (w.right - w.left) / (2.0 * params.rho())};
}

inline WheelSpeeds body_to_wheels(const BodyInput& u, const RobotParams& params) {
  return {u.v - params.rho() * u.omega, u.v + params.rho() * u.omega};
}

// |v|/a + |omega|/b, the quantity bounded by lambda in the scaled input set.
inline double input_index(const BodyInput& u, const RobotParams& params) {
  return std::abs(u.v) / params.a() + std::abs(u.omega) / params.b();
}

inline constexpr double kInputSetSlack = 1e-12;

// Membership in lambda * U. Boundary points are members.
inline bool input_in_set(const BodyInput& u, double lambda, const RobotParams& params) {
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("input_in_set: lambda must lie in (0, 1]");
  }
  return input_index(u, params) <= lambda + kInputSetSlack;
}

// Point at distance rho ahead of the wheel axis midpoint.
inline Pose head_pose(const Pose& xi, double rho) {
  return {xi.x + rho * std::cos(xi.theta), xi.y + rho * std::sin(xi.theta),
          wrap_angle(xi.theta)};
}

inline PoseDerivative f_unicycle(const Pose& xi, const BodyInput& u) {
  return {u.v * std::cos(xi.theta), u.v * std::sin(xi.theta), u.omega};
}

inline PoseDerivative f_head(const Pose& xi_h, const BodyInput& u, double rho) {
  const double c = std::cos(xi_h.theta);
  const double s = std::sin(xi_h.theta);
  return {u.v * c - rho * u.omega * s, u.v * s + rho * u.omega * c, u.omega};
}

// Exact head-point motion under a constant input for duration t. The heading
// of the result is not wrapped so callers can difference it.
inline Pose propagate_head_exact(const Pose& xi_h, const BodyInput& u, double rho, double t) {
  const double th0 = xi_h.theta;
  const double wt = u.omega * t;
  // integral_0^t R(th0 + omega s) ds = R(th0) * [[A, -B], [B, A]] with
  // A = sin(wt)/omega, B = (1 - cos(wt))/omega.
  double a_term;
  double b_term;
  if (std::abs(wt) < 1e-4) {
    const double w2t2 = wt * wt;
    a_term = t * (1.0 - w2t2 / 6.0 + w2t2 * w2t2 / 120.0);
    b_term = t * wt * (0.5 - w2t2 / 24.0 + w2t2 * w2t2 / 720.0);
  } else {
    a_term = std::sin(wt) / u.omega;
    b_term = (1.0 - std::cos(wt)) / u.omega;
  }
  const double lx = a_term * u.v - b_term * rho * u.omega;
  const double ly = b_term * u.v + a_term * rho * u.omega;
  const double c = std::cos(th0);
  const double s = std::sin(th0);
  return {xi_h.x + c * lx - s * ly, xi_h.y + s * lx + c * ly, th0 + wt};
}

}  // namespace rmpc

#endif  // RMPC_KINEMATICS_HPP_
