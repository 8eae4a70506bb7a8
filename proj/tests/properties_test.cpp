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

#include "rmpc/properties.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "rmpc/certify.hpp"

namespace rmpc {
namespace {

const RobotParams kEpuck(0.13, 0.0267);
const Weights kWeights{0.2, 0.2, 0.4, 0.4};
const TerminalGains kGains{1.2, 1.2};
const BodyInput kRef{0.015, 0.04};

TEST(TerminalSetTest, LyapunovDecreaseDominatesStageCost) {
  for (const double lambda_f : {0.663593, 1.0}) {
    const TerminalSetReport rep = terminal_set_suite(kEpuck, kWeights, kGains, lambda_f, kRef, 0.2, 50, 1000, 42);
    EXPECT_EQ(rep.decrease_violations, 0);
    EXPECT_LT(rep.max_decrease, 0.0);
  }
}

TEST(TerminalSetTest, ControllerAdmissibleInsideDiamond) {
  // At t = 0 every sample is inside the open diamond, where
  // |v|/a + |w|/b <= (k1|x| + k2|y|)/a + lambda_r < lambda_f.
  const TerminalSetReport rep = terminal_set_suite(kEpuck, kWeights, kGains, 0.663593, kRef, 0.2, 0, 1000, 42);
  EXPECT_EQ(rep.input_violations, 0);
  EXPECT_EQ(rep.invariance_violations, 0);
  EXPECT_LT(rep.max_input_index, 0.663593);
}

// The terminal penalty sublevel sets (discs) are invariant: g' < 0.
TEST(TerminalSetTest, PenaltyDecreasesAlongFlow) {
  const double rho = kEpuck.rho();
  TrackingError e{0.03, -0.02, 2.0};
  double g = terminal_penalty(e);
  const double h = 1e-3;
  for (int i = 0; i < 2000; ++i) {
    const BodyInput u = terminal_controller(e, kRef.v, kGains, rho);
    const TrackingErrorDerivative d = error_dynamics(e, u, kRef, Disturbance{}, 0.0, rho);
    e = {e.x + h * d.x, e.y + h * d.y, e.theta + h * d.theta};
    const double g_next = terminal_penalty(e);
    ASSERT_LT(g_next, g);
    g = g_next;
  }
}

// The diamond itself is not invariant: the rotation term w (sgn(x) y - sgn(y) x)
// of its Dini derivative can outweigh the -k^2 (|x| + |y|) decay near the axes.
TEST(TerminalSetTest, DiamondBoundaryWitness) {
  const CertifiedParams cert = certify_tube(kEpuck, kWeights, kGains, {-2.3, -2.3}, 0.004, 0.015);
  const double level = cert.diamond_level;
  const double k = kGains.k1;
  const TrackingError e{0.001, (level - k * 0.001) / k, 0.0};
  ASSERT_NEAR(k * std::abs(e.x) + k * std::abs(e.y), level, 1e-15);
  const BodyInput u = terminal_controller(e, kRef.v, kGains, kEpuck.rho());
  const TrackingErrorDerivative d = error_dynamics(e, u, kRef, Disturbance{}, 0.0, kEpuck.rho());
  const double level_rate = k * d.x + k * d.y;  // both coordinates positive
  EXPECT_NEAR(level_rate, 0.0717, 5e-4);
  const TerminalSetReport rep = terminal_set_suite(kEpuck, kWeights, kGains, cert.lambda_tube, kRef, 0.2, 50, 1000, 42);
  EXPECT_GT(rep.invariance_violations, 0);
  EXPECT_GT(rep.max_level_ratio, 1.0);
}

TEST(LipschitzTest, BoundedByMaxWheelSpeed) {
  const LipschitzReport rep = lipschitz_monte_carlo(kEpuck, 100000, 2024);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_LE(rep.max_ratio, kEpuck.a());
  EXPECT_GT(rep.max_ratio, 0.9 * kEpuck.a());  // the bound is nearly tight
}

}  // namespace
}  // namespace rmpc
