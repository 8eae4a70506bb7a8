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

#include "rmpc/config.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

namespace rmpc {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string circle_text() { return read_file(std::string(RMPC_SOURCE_DIR) + "/configs/epuck_circle.cfg"); }

bool has_error(const ParseResult& r, const std::string& needle) {
  for (const std::string& e : r.errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(ConfigTest, ShippedFileMatchesDefaults) {
  const ParseResult r = parse_config(circle_text());
  ASSERT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors.front());
  const SimConfig& s = r.config->sim;
  const SimConfig d;
  EXPECT_DOUBLE_EQ(s.robot.a(), 0.13);
  EXPECT_DOUBLE_EQ(s.robot.rho(), 0.0267);
  EXPECT_DOUBLE_EQ(s.weights.q1, d.weights.q1);
  EXPECT_DOUBLE_EQ(s.weights.p2, d.weights.p2);
  EXPECT_DOUBLE_EQ(s.gains.k1, 1.2);
  EXPECT_EQ(s.horizon.N(), 10);
  EXPECT_EQ(s.horizon.m(), 5);
  EXPECT_DOUBLE_EQ(s.feedback.k_x, -2.3);
  EXPECT_DOUBLE_EQ(s.epsilon, 0.063);
  EXPECT_DOUBLE_EQ(s.reference.initial.theta, kPi / 3);
  EXPECT_DOUBLE_EQ(s.follower_head.theta, -kPi / 2);
  EXPECT_DOUBLE_EQ(s.disturbance.eta, 0.004);
  EXPECT_EQ(s.disturbance.seed, 1u);
  EXPECT_EQ(s.steps(), 300);
  EXPECT_EQ(r.config->sweep_gains, (std::vector<double>{-1.0, -2.3, -4.0}));
  EXPECT_EQ(r.config->output_dir, "out");
}

TEST(ConfigTest, EmptyFileListsEveryRequiredKey) {
  const ParseResult r = parse_config("");
  ASSERT_FALSE(r.ok());
  for (const char* key : {"'a'", "'rho'", "'q1'", "'q2'", "'p1'", "'p2'", "'terminal_k1'", "'terminal_k2'", "'T'",
                          "'delta'", "'k_x'", "'k_y'", "'epsilon'", "'v_r'", "'omega_r'", "'x0'", "'y0'",
                          "'theta0'", "'follower_x'", "'follower_y'", "'follower_theta'", "'eta'"}) {
    EXPECT_TRUE(has_error(r, std::string("missing required key ") + key)) << key;
  }
}

TEST(ConfigTest, HorizonNotMultipleOfDelta) {
  const ParseResult r = parse_config(replace(circle_text(), "delta = 0.2", "delta = 0.3"));
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "T must equal N·delta for integer N"));
  EXPECT_TRUE(has_error(r, "line 18: "));
}

TEST(ConfigTest, UnknownKeyAndSection) {
  std::string text = replace(circle_text(), "epsilon = 0.063", "epsilon = 0.063\nepsilom = 1");
  text += "\n[extra]\n";
  const ParseResult r = parse_config(text);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "unknown key 'epsilom' in [nrmpc]"));
  EXPECT_TRUE(has_error(r, "unknown section [extra]"));
}

TEST(ConfigTest, DuplicateAndMalformedValues) {
  const ParseResult r =
      parse_config(replace(replace(circle_text(), "a = 0.13 ", "a = 0.13\na = 0.14 "), "eta = 0.004", "eta = lots"));
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "duplicate key 'a' in [robot] (first on line 5)"));
  EXPECT_TRUE(has_error(r, "key 'eta' in [sim]: expected"));
}

TEST(ConfigTest, OptionalKeysAndOverrides) {
  std::string text = replace(circle_text(), "strategy = tube", "strategy = nrmpc");
  text = replace(text, "feedback = continuous", "feedback = zoh");
  text = replace(text, "disturbance = random", "disturbance = zero");
  const ParseResult r = parse_config(text);
  ASSERT_TRUE(r.ok()) << r.errors.front();
  EXPECT_EQ(r.config->sim.strategy, Strategy::kNrmpc);
  EXPECT_EQ(r.config->sim.feedback_mode, FeedbackMode::kZeroOrderHold);
  EXPECT_EQ(r.config->sim.disturbance.mode, DisturbanceMode::kZero);
}

TEST(ConfigTest, DurationMustBeMultipleOfDelta) {
  const ParseResult r = parse_config(replace(circle_text(), "duration = 60", "duration = 60.1"));
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "duration"));
}

}  // namespace
}  // namespace rmpc
