// Copyright 2026 The rmpc Authors
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

#include "rmpc/kinematics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace rmpc {
namespace {

const RobotParams kEpuck(0.13, 0.0267);

TEST(RobotParamsTest, DerivesAngularBound) {
  // 0.13 / 0.0267 = 4.86891 (a commonly quoted 4.8598 transposes two digits).
  EXPECT_DOUBLE_EQ(kEpuck.b(), 0.13 / 0.0267);
  EXPECT_NEAR(kEpuck.b(), 4.86891, 1e-5);
  EXPECT_THROW(RobotParams(0.0, 0.0267), std::invalid_argument);
  EXPECT_THROW(RobotParams(0.13, -1.0), std::invalid_argument);
  EXPECT_THROW(RobotParams(NAN, 0.0267), std::invalid_argument);
}

TEST(WheelAlgebraTest, WheelsToBody) {
  BodyInput u = wheels_to_body({0.13, 0.13}, kEpuck);
  EXPECT_DOUBLE_EQ(u.v, 0.13);
  EXPECT_DOUBLE_EQ(u.omega, 0.0);

  u = wheels_to_body({-0.13, 0.13}, kEpuck);
  EXPECT_DOUBLE_EQ(u.v, 0.0);
  EXPECT_DOUBLE_EQ(u.omega, kEpuck.b());

  u = wheels_to_body({0.05, 0.10}, kEpuck);
  EXPECT_NEAR(u.v, 0.075, 1e-15);
  EXPECT_NEAR(u.omega, 0.93633, 1e-5);
}

TEST(WheelAlgebraTest, BodyToWheels) {
  WheelSpeeds w = body_to_wheels({0.13, 0.0}, kEpuck);
  EXPECT_DOUBLE_EQ(w.left, 0.13);
  EXPECT_DOUBLE_EQ(w.right, 0.13);

  w = body_to_wheels({0.0, 4.8598}, kEpuck);
  EXPECT_NEAR(w.left, -0.12976, 1e-5);
  EXPECT_NEAR(w.right, 0.12976, 1e-5);

  w = body_to_wheels({0.075, 0.93633}, kEpuck);
  EXPECT_NEAR(w.left, 0.05, 1e-6);
  EXPECT_NEAR(w.right, 0.10, 1e-6);
}

TEST(WheelAlgebraTest, RoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wheel(-0.2, 0.2);
  for (int i = 0; i < 10000; ++i) {
    const WheelSpeeds w{wheel(rng), wheel(rng)};
    const BodyInput u = wheels_to_body(w, kEpuck);
    const WheelSpeeds back = body_to_wheels(u, kEpuck);
    const BodyInput again = wheels_to_body(back, kEpuck);
    EXPECT_NEAR(again.v, u.v, 1e-14 * std::max(1.0, std::abs(u.v)));
    EXPECT_NEAR(again.omega, u.omega, 1e-14 * std::max(1.0, std::abs(u.omega)));
  }
}

TEST(InputSetTest, Examples) {
  EXPECT_TRUE(input_in_set({0.13, 0.0}, 1.0, kEpuck));
  EXPECT_TRUE(input_in_set({0.065, kEpuck.b() / 2.0}, 1.0, kEpuck));
  EXPECT_FALSE(input_in_set({0.1, 2.0}, 0.6636, kEpuck));
  EXPECT_NEAR(input_index({0.1, 2.0}, kEpuck), 0.769231 + 0.410769, 1e-6);
  EXPECT_THROW(input_in_set({0.0, 0.0}, 0.0, kEpuck), std::invalid_argument);
  EXPECT_THROW(input_in_set({0.0, 0.0}, 1.5, kEpuck), std::invalid_argument);
}

TEST(InputSetTest, DiamondMatchesWheelBox) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(-0.2, 0.2);
  std::uniform_real_distribution<double> w(-8.0, 8.0);
  std::uniform_real_distribution<double> lam(0.05, 1.0);
  int mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const BodyInput u{v(rng), w(rng)};
    const double l = lam(rng);
    const WheelSpeeds ws = body_to_wheels(u, kEpuck);
    const bool box = std::max(std::abs(ws.left), std::abs(ws.right)) <= l * kEpuck.a() + 1e-12;
    if (box != input_in_set(u, l, kEpuck)) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(HeadPoseTest, Examples) {
  Pose h = head_pose({0.0, 0.0, 0.0}, 0.0267);
  EXPECT_DOUBLE_EQ(h.x, 0.0267);
  EXPECT_DOUBLE_EQ(h.y, 0.0);
  h = head_pose({1.0, 1.0, kPi / 2}, 0.0267);
  EXPECT_NEAR(h.x, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(h.y, 1.0267);
  EXPECT_DOUBLE_EQ(h.theta, kPi / 2);
  h = head_pose({0.2, -0.2, -kPi / 2}, 0.0267);
  EXPECT_NEAR(h.x, 0.2, 1e-15);
  EXPECT_NEAR(h.y, -0.2267, 1e-15);
  EXPECT_DOUBLE_EQ(h.theta, -kPi / 2);
}

TEST(DynamicsTest, Unicycle) {
  PoseDerivative d = f_unicycle({0, 0, 0}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(d.x, 1.0);
  EXPECT_DOUBLE_EQ(d.y, 0.0);
  d = f_unicycle({0, 0, kPi / 2}, {1.0, 0.5});
  EXPECT_NEAR(d.x, 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(d.y, 1.0);
  EXPECT_DOUBLE_EQ(d.theta, 0.5);
  d = f_unicycle({0, 0, kPi / 3}, {0.015, 0.04});
  EXPECT_NEAR(d.x, 0.0075, 1e-12);
  EXPECT_NEAR(d.y, 0.012990, 1e-6);
  EXPECT_DOUBLE_EQ(d.theta, 0.04);
}

TEST(DynamicsTest, Head) {
  PoseDerivative d = f_head({0, 0, 0}, {1.0, 1.0}, 0.0267);
  EXPECT_DOUBLE_EQ(d.x, 1.0);
  EXPECT_DOUBLE_EQ(d.y, 0.0267);
  EXPECT_DOUBLE_EQ(d.theta, 1.0);
  d = f_head({0, 0, 0}, {0.0, 0.0}, 0.5);
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.y, 0.0);
  EXPECT_EQ(d.theta, 0.0);
  d = f_head({0, 0, kPi / 4}, {0.1, 2.0}, 0.0267);
  EXPECT_NEAR(d.x, 0.032951, 1e-6);
  EXPECT_NEAR(d.y, 0.108470, 1e-6);
  EXPECT_DOUBLE_EQ(d.theta, 2.0);
}

TEST(DynamicsTest, HeadReducesToUnicycleAtZeroOffset) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> vel(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose xi{vel(rng), vel(rng), ang(rng)};
    const BodyInput u{vel(rng), 5.0 * vel(rng)};
    const PoseDerivative h = f_head(xi, u, 0.0);
    const PoseDerivative f = f_unicycle(xi, u);
    EXPECT_EQ(h.x, f.x);
    EXPECT_EQ(h.y, f.y);
  }
}

TEST(WrapAngleTest, Examples) {
  EXPECT_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(-3 * kPi / 2), kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(7.0), 7.0 - 2 * kPi, 1e-15);
}

TEST(WrapAngleTest, RangeIsHalfOpen) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = wrap_angle(ang(rng));
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
  }
}

// Random pairs of head states under admissible inputs; the heading gap is
// the unwrapped difference.
TEST(LipschitzTest, HeadDynamicsBoundedByMaxWheelSpeed) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(-2 * kPi, 2 * kPi);
  std::uniform_real_distribution<double> wheel(-kEpuck.a(), kEpuck.a());
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const Pose x1{pos(rng), pos(rng), ang(rng)};
    const Pose x2{pos(rng), pos(rng), ang(rng)};
    const BodyInput u = wheels_to_body({wheel(rng), wheel(rng)}, kEpuck);
    ASSERT_TRUE(input_in_set(u, 1.0, kEpuck));
    const PoseDerivative f1 = f_head(x1, u, kEpuck.rho());
    const PoseDerivative f2 = f_head(x2, u, kEpuck.rho());
    const double df = std::sqrt(std::pow(f1.x - f2.x, 2) + std::pow(f1.y - f2.y, 2) +
                                std::pow(f1.theta - f2.theta, 2));
    const double dx = std::sqrt(std::pow(x1.x - x2.x, 2) + std::pow(x1.y - x2.y, 2) +
                                std::pow(x1.theta - x2.theta, 2));
    if (df > kEpuck.a() * dx) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(ExactPropagationTest, MatchesFineIntegration) {
  const Pose start{0.3, -0.1, 0.7};
  for (const BodyInput u : {BodyInput{0.05, 0.9}, BodyInput{0.1, 0.0}, BodyInput{0.0, -2.0},
                            BodyInput{0.02, 1e-7}}) {
    Pose x = start;
    const int steps = 20000;
    const double t = 1.3;
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {  // midpoint rule, plenty accurate here
      const PoseDerivative k1 = f_head(x, u, kEpuck.rho());
      const Pose mid{x.x + 0.5 * h * k1.x, x.y + 0.5 * h * k1.y, x.theta + 0.5 * h * k1.theta};
      const PoseDerivative k2 = f_head(mid, u, kEpuck.rho());
      x = {x.x + h * k2.x, x.y + h * k2.y, x.theta + h * k2.theta};
    }
    const Pose exact = propagate_head_exact(start, u, kEpuck.rho(), t);
    EXPECT_NEAR(exact.x, x.x, 1e-9);
    EXPECT_NEAR(exact.y, x.y, 1e-9);
    EXPECT_NEAR(exact.theta, x.theta, 1e-12);
  }
}

}  // namespace
}  // namespace rmpc
