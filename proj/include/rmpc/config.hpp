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

#ifndef RMPC_CONFIG_HPP_
#define RMPC_CONFIG_HPP_

// Experiment configuration: line-oriented `key = value` with `[section]`
// headers, '#' comments, SI units throughout. Angles accept plain radians or
// multiples of pi ("pi/3", "-pi/2", "2*pi/3").
//
// Parsing is all-or-nothing: either every key validates and a complete
// ExperimentConfig comes back, or a list of line-numbered diagnostics does.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rmpc/sim.hpp"

namespace rmpc {

struct ExperimentConfig {
  SimConfig sim;
  std::vector<double> sweep_gains{-1.0, -2.3, -4.0};  // diagonal K entries for gain-sweep
  std::string output_dir = "out";
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_plain_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// number | [-][number*]pi[/number]
inline std::optional<double> parse_angle(std::string_view s) {
  s = trim(s);
  const auto pi_at = s.find("pi");
  if (pi_at == std::string_view::npos) return parse_plain_double(s);
  double sign = 1.0;
  std::string_view head = trim(s.substr(0, pi_at));
  std::string_view tail = trim(s.substr(pi_at + 2));
  if (!head.empty() && head.front() == '-') {
    sign = -1.0;
    head = trim(head.substr(1));
  }
  double factor = 1.0;
  if (!head.empty()) {
    if (head.back() != '*') return std::nullopt;
    const auto f = parse_plain_double(head.substr(0, head.size() - 1));
    if (!f) return std::nullopt;
    factor = *f;
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') return std::nullopt;
    const auto d = parse_plain_double(tail.substr(1));
    if (!d || *d == 0.0) return std::nullopt;
    divisor = *d;
  }
  return sign * factor * kPi / divisor;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::vector<double>> parse_list(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    const auto v = parse_plain_double(s.substr(0, comma));
    if (!v) return std::nullopt;
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct KeySpec {
  const char* section;
  const char* key;
  const char* expected;  // type and unit, for diagnostics
  bool required;
  // Returns false when the value does not parse.
  std::function<bool(std::string_view, ExperimentConfig&)> apply;
};

// Raw physical values collected before cross-validation.
struct RawParams {
  double a = 0, rho = 0, T = 0, delta = 0;
  int substeps = 5;
};

}  // namespace detail

inline ParseResult parse_config(std::string_view text) {
  using detail::KeySpec;
  ParseResult result;
  ExperimentConfig cfg;
  detail::RawParams raw;
  Pose ref0, follower;

  const auto number = [](double& dst) {
    return [&dst](std::string_view v, ExperimentConfig&) {
      const auto d = detail::parse_plain_double(v);
      if (d) dst = *d;
      return d.has_value();
    };
  };
  const auto angle = [](double& dst) {
    return [&dst](std::string_view v, ExperimentConfig&) {
      const auto d = detail::parse_angle(v);
      if (d) dst = *d;
      return d.has_value();
    };
  };

  SimConfig& s = cfg.sim;
  double q1 = 0, q2 = 0, p1 = 0, p2 = 0, k1 = 0, k2 = 0;
  const std::vector<KeySpec> keys = {
      {"robot", "a", "number (m/s, max wheel speed)", true, number(raw.a)},
      {"robot", "rho", "number (m, head offset)", true, number(raw.rho)},
      {"weights", "q1", "number (state weight on x)", true, number(q1)},
      {"weights", "q2", "number (state weight on y)", true, number(q2)},
      {"weights", "p1", "number (input weight on v)", true, number(p1)},
      {"weights", "p2", "number (input weight on rho*omega)", true, number(p2)},
      {"weights", "terminal_k1", "number (1/s, terminal gain on x)", true, number(k1)},
      {"weights", "terminal_k2", "number (1/s, terminal gain on y)", true, number(k2)},
      {"horizon", "T", "number (s, prediction horizon)", true, number(raw.T)},
      {"horizon", "delta", "number (s, sampling period)", true, number(raw.delta)},
      {"horizon", "substeps", "integer (RK4 steps per period)", false,
       [&raw](std::string_view v, ExperimentConfig&) {
         const auto n = detail::parse_u64(v);
         if (!n || *n < 1 || *n > 1000) return false;
         raw.substeps = static_cast<int>(*n);
         return true;
       }},
      {"tube", "k_x", "number (1/s, negative feedback gain)", true, number(s.feedback.k_x)},
      {"tube", "k_y", "number (1/s, negative feedback gain)", true, number(s.feedback.k_y)},
      {"tube", "feedback", "continuous | zoh", false,
       [&s](std::string_view v, ExperimentConfig&) {
         v = detail::trim(v);
         if (v == "continuous") {
           s.feedback_mode = FeedbackMode::kContinuous;
         } else if (v == "zoh") {
           s.feedback_mode = FeedbackMode::kZeroOrderHold;
         } else {
           return false;
         }
         return true;
       }},
      {"tube", "sweep_gains", "comma-separated numbers (1/s, negative)", false,
       [](std::string_view v, ExperimentConfig& c) {
         const auto list = detail::parse_list(v);
         if (!list) return false;
         c.sweep_gains = *list;
         return true;
       }},
      {"nrmpc", "epsilon", "number (m, terminal ball radius)", true, number(s.epsilon)},
      {"reference", "v_r", "number (m/s)", true, number(s.reference.v_r)},
      {"reference", "omega_r", "number (rad/s)", true, number(s.reference.omega_r)},
      {"reference", "x0", "number (m)", true, number(ref0.x)},
      {"reference", "y0", "number (m)", true, number(ref0.y)},
      {"reference", "theta0", "angle (rad, or multiple of pi)", true, angle(ref0.theta)},
      {"sim", "follower_x", "number (m, head position)", true, number(follower.x)},
      {"sim", "follower_y", "number (m, head position)", true, number(follower.y)},
      {"sim", "follower_theta", "angle (rad, or multiple of pi)", true, angle(follower.theta)},
      {"sim", "eta", "number (m/s, disturbance bound)", true, number(s.disturbance.eta)},
      {"sim", "disturbance", "random | worst | zero", false,
       [&s](std::string_view v, ExperimentConfig&) {
         v = detail::trim(v);
         if (v == "random") {
           s.disturbance.mode = DisturbanceMode::kRandom;
         } else if (v == "worst") {
           s.disturbance.mode = DisturbanceMode::kWorstCase;
         } else if (v == "zero") {
           s.disturbance.mode = DisturbanceMode::kZero;
         } else {
           return false;
         }
         return true;
       }},
      {"sim", "disturbance_angle", "angle (rad, worst-case direction)", false, angle(s.disturbance.angle)},
      {"sim", "seed", "unsigned 64-bit integer", false,
       [&s](std::string_view v, ExperimentConfig&) {
         const auto n = detail::parse_u64(v);
         if (n) s.disturbance.seed = *n;
         return n.has_value();
       }},
      {"sim", "strategy", "tube | nrmpc", false,
       [&s](std::string_view v, ExperimentConfig&) {
         v = detail::trim(v);
         if (v == "tube") {
           s.strategy = Strategy::kTube;
         } else if (v == "nrmpc") {
           s.strategy = Strategy::kNrmpc;
         } else {
           return false;
         }
         return true;
       }},
      {"sim", "duration", "number (s, multiple of delta)", false, number(s.duration)},
      {"output", "dir", "path", false,
       [](std::string_view v, ExperimentConfig& c) {
         v = detail::trim(v);
         if (v.empty()) return false;
         c.output_dir = std::string(v);
         return true;
       }},
  };

  std::map<std::string, int> seen;  // "section.key" -> line
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line_buf;
  int lineno = 0;
  while (std::getline(in, line_buf)) {
    ++lineno;
    std::string_view line = line_buf;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back(where + "malformed section header '" + std::string(line) + "'");
        continue;
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const KeySpec& k : keys) known = known || section == k.section;
      if (!known) result.errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      result.errors.push_back(where + "expected 'key = value', got '" + std::string(line) + "'");
      continue;
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const KeySpec* spec = nullptr;
    for (const KeySpec& k : keys) {
      if (section == k.section && key == k.key) spec = &k;
    }
    if (spec == nullptr) {
      result.errors.push_back(where + "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    const std::string id = section + "." + key;
    if (const auto it = seen.find(id); it != seen.end()) {
      result.errors.push_back(where + "duplicate key '" + key + "' in [" + section + "] (first on line " +
                              std::to_string(it->second) + ")");
      continue;
    }
    seen[id] = lineno;
    if (!spec->apply(value, cfg)) {
      result.errors.push_back(where + "key '" + key + "' in [" + section + "]: expected " + spec->expected +
                              ", got '" + std::string(value) + "'");
    }
  }
  for (const KeySpec& k : keys) {
    if (k.required && !seen.contains(std::string(k.section) + "." + k.key)) {
      result.errors.push_back(std::string("missing required key '") + k.key + "' in [" + k.section + "] (" +
                              k.expected + ")");
    }
  }
  if (!result.errors.empty()) return result;

  // Cross-field validation; diagnostics point at the offending key's line.
  const auto at = [&](const char* id) {
    const auto it = seen.find(id);
    return it == seen.end() ? std::string() : "line " + std::to_string(it->second) + ": ";
  };
  const auto check = [&](bool ok, const char* id, const std::string& msg) {
    if (!ok) result.errors.push_back(at(id) + msg);
  };
  try {
    s.robot = RobotParams(raw.a, raw.rho);
  } catch (const std::invalid_argument& e) {
    result.errors.push_back(at("robot.a") + e.what());
  }
  try {
    s.horizon = HorizonConfig(raw.T, raw.delta, raw.substeps);
  } catch (const std::invalid_argument& e) {
    result.errors.push_back(at("horizon.delta") + e.what());
  }
  s.weights = {q1, q2, p1, p2};
  s.gains = {k1, k2};
  check(s.weights.positive(), "weights.q1", "weights q1, q2, p1, p2 must be positive");
  check(k1 > 0.0 && k2 > 0.0, "weights.terminal_k1", "terminal gains must be positive");
  check(s.feedback.k_x < 0.0, "tube.k_x", "k_x must be negative");
  check(s.feedback.k_y < 0.0, "tube.k_y", "k_y must be negative");
  for (double g : cfg.sweep_gains) check(g < 0.0, "tube.sweep_gains", "sweep gains must be negative");
  check(!cfg.sweep_gains.empty(), "tube.sweep_gains", "sweep_gains must not be empty");
  check(s.epsilon > 0.0, "nrmpc.epsilon", "epsilon must be positive");
  check(s.disturbance.eta >= 0.0, "sim.eta", "eta must be non-negative");
  check(s.duration > 0.0, "sim.duration", "duration must be positive");
  if (raw.delta > 0.0 && s.duration > 0.0) {
    const double steps = s.duration / raw.delta;
    check(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps), "sim.duration",
          "duration must be an integer multiple of delta");
  }
  if (!result.errors.empty()) return result;

  s.reference.initial = {ref0.x, ref0.y, wrap_angle(ref0.theta)};
  s.follower_head = {follower.x, follower.y, wrap_angle(follower.theta)};
  result.config = std::move(cfg);
  return result;
}

}  // namespace rmpc

#endif  // RMPC_CONFIG_HPP_
