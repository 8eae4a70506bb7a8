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

#ifndef RMPC_CERTIFY_HPP_
#define RMPC_CERTIFY_HPP_

// Parameter certificates for the two controllers. Every sufficient condition
// is reported with both sides so a failure says by how much it failed.
//
// Shared (terminal region, any input scale lambda_f):
//   lambda_r = sqrt(2) max|v_r| / a,  p_i q_i < 1/4,  k_i inside its gain
//   interval,  |v_r| < a lambda_f / sqrt(2).
// Tube:
//   lambda_tube = sqrt(2)/2 - sqrt(2) eta / a, the largest nominal input
//   scale whose rotated image plus the feedback correction (norm <= sqrt(2)
//   eta, independent of K) fits in every rotated copy of the input set;
//   tube half-widths eta / |k|.
// NRMPC:
//   r = a (1 - lambda_r) / |k|,  eps < r,  eta <= e^{-aT} (r - eps) / delta,
//   k_min delta >= ln(r / eps),  eps >= r (T - delta) / T, and the ISS margin
//   q_min eps^2 > 1/2 eta e^{aT} (r + eps)
//               + q^2 eta^2 delta / (2a) (e^{2aT} - e^{2a delta})
//               + 2 q^2 eta r / (sqrt(2) a) sqrt(T^2/delta - T) sqrt(e^{2aT} - e^{2a delta})
//   with q_min = min(q1, q2) and q = max(q1, q2).

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpc/kinematics.hpp"
#include "rmpc/ocp.hpp"

namespace rmpc {

// Ancillary feedback of the tube controller, K = diag(k_x, k_y).
struct FeedbackGain {
  double k_x = -1.0;  // 1/s
  double k_y = -1.0;

  void validate() const {
    if (!(k_x < 0.0) || !(k_y < 0.0)) throw std::invalid_argument("feedback gains must be negative");
  }
};

enum class Relation { kLess, kLessEqual, kGreater, kGreaterEqual };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::kLess:
      return "<";
    case Relation::kLessEqual:
      return "<=";
    case Relation::kGreater:
      return ">";
    case Relation::kGreaterEqual:
      return ">=";
  }
  return "?";
}

struct Check {
  std::string name;
  double lhs = 0.0;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  bool pass = false;

  // Signed slack in the direction of the relation (positive when passing).
  double margin() const {
    return relation == Relation::kLess || relation == Relation::kLessEqual ? rhs - lhs : lhs - rhs;
  }
};

inline Check make_check(std::string name, double lhs, Relation rel, double rhs) {
  bool ok = false;
  switch (rel) {
    case Relation::kLess:
      ok = lhs < rhs;
      break;
    case Relation::kLessEqual:
      ok = lhs <= rhs;
      break;
    case Relation::kGreater:
      ok = lhs > rhs;
      break;
    case Relation::kGreaterEqual:
      ok = lhs >= rhs;
      break;
  }
  return {std::move(name), lhs, rel, rhs, ok && std::isfinite(lhs) && std::isfinite(rhs)};
}

// "name: LHS (rel) RHS → PASS|FAIL", six significant digits.
inline std::string format_check(const Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: %.6g (%s) %.6g → %s", c.name.c_str(), c.lhs, to_string(c.relation),
                c.rhs, c.pass ? "PASS" : "FAIL");
  return buf;
}

struct CertifiedParams {
  double lambda_r = 0.0;
  double lambda_tube = 0.0;
  double diamond_level = 0.0;  // a (lambda_f - lambda_r), in k1|x| + k2|y| units
  double tube_halfwidth_x = 0.0;
  double tube_halfwidth_y = 0.0;
  double r = 0.0;
  double epsilon = 0.0;
  double k_tilde = 0.0;  // min(k1, k2)
  std::optional<std::pair<double, double>> k1_interval;
  std::optional<std::pair<double, double>> k2_interval;
  std::vector<Check> checks;

  bool all_pass() const {
    for (const Check& c : checks) {
      if (!c.pass) return false;
    }
    return !checks.empty();
  }
  const Check* find(const std::string& name) const {
    for (const Check& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline void terminal_region_checks(CertifiedParams& out, const RobotParams& robot, const Weights& w,
                                   const TerminalGains& gains, double v_r_max, double lambda_f) {
  out.lambda_r = std::sqrt(2.0) * v_r_max / robot.a();
  out.k_tilde = gains.min();
  out.k1_interval = terminal_gain_interval(w.p1, w.q1);
  out.k2_interval = terminal_gain_interval(w.p2, w.q2);
  out.checks.push_back(make_check("weights_positive", w.positive() ? 1.0 : 0.0, Relation::kGreaterEqual, 1.0));
  out.checks.push_back(make_check("p1*q1 < 1/4", w.p1 * w.q1, Relation::kLess, 0.25));
  out.checks.push_back(make_check("p2*q2 < 1/4", w.p2 * w.q2, Relation::kLess, 0.25));
  const auto interval_checks = [&](const char* axis, double k, const std::optional<std::pair<double, double>>& iv) {
    const double lo = iv ? iv->first : std::nan("");
    const double hi = iv ? iv->second : std::nan("");
    out.checks.push_back(make_check(std::string(axis) + " > interval low", k, Relation::kGreater, lo));
    out.checks.push_back(make_check(std::string(axis) + " < interval high", k, Relation::kLess, hi));
  };
  interval_checks("k1_terminal", gains.k1, out.k1_interval);
  interval_checks("k2_terminal", gains.k2, out.k2_interval);
  out.checks.push_back(
      make_check("|v_r| < a*lambda_f/sqrt(2)", v_r_max, Relation::kLess, robot.a() * lambda_f / std::sqrt(2.0)));
  out.diamond_level = robot.a() * (lambda_f - out.lambda_r);
  out.checks.push_back(make_check("terminal level a*(lambda_f - lambda_r)", out.diamond_level, Relation::kGreater, 0.0));
}

}  // namespace detail

inline CertifiedParams certify_tube(const RobotParams& robot, const Weights& w, const TerminalGains& gains,
                                    const FeedbackGain& k, double eta, double v_r_max) {
  CertifiedParams out;
  out.lambda_tube = std::sqrt(2.0) / 2.0 - eta * std::sqrt(2.0) / robot.a();
  detail::terminal_region_checks(out, robot, w, gains, v_r_max, out.lambda_tube);
  out.checks.insert(out.checks.begin(), make_check("eta >= 0", eta, Relation::kGreaterEqual, 0.0));
  out.checks.push_back(make_check("eta < a/2", eta, Relation::kLess, robot.a() / 2.0));
  out.checks.push_back(make_check("lambda_tube > 0", out.lambda_tube, Relation::kGreater, 0.0));
  out.checks.push_back(make_check("lambda_tube <= 1", out.lambda_tube, Relation::kLessEqual, 1.0));
  out.checks.push_back(make_check("k_x < 0", k.k_x, Relation::kLess, 0.0));
  out.checks.push_back(make_check("k_y < 0", k.k_y, Relation::kLess, 0.0));
  // Input admissibility of the tube law: nominal ball plus feedback ball
  // inside the inscribed ball of every rotated input set.
  out.checks.push_back(make_check("a*lambda_tube + sqrt(2)*eta <= a*sqrt(2)/2",
                                  robot.a() * out.lambda_tube + std::sqrt(2.0) * eta, Relation::kLessEqual,
                                  robot.a() * std::sqrt(2.0) / 2.0 * (1.0 + 1e-12)));
  out.tube_halfwidth_x = k.k_x < 0.0 ? eta / -k.k_x : std::nan("");
  out.tube_halfwidth_y = k.k_y < 0.0 ? eta / -k.k_y : std::nan("");
  return out;
}

inline CertifiedParams certify_nrmpc(const RobotParams& robot, const Weights& w, const TerminalGains& gains,
                                     double eta, double v_r_max, const HorizonConfig& h, double epsilon) {
  CertifiedParams out;
  detail::terminal_region_checks(out, robot, w, gains, v_r_max, 1.0);
  out.checks.insert(out.checks.begin(), make_check("eta >= 0", eta, Relation::kGreaterEqual, 0.0));
  const double a = robot.a();
  const double T = h.T();
  const double delta = h.delta();
  out.epsilon = epsilon;
  out.r = a * (1.0 - out.lambda_r) / std::hypot(gains.k1, gains.k2);
  out.checks.push_back(make_check("epsilon > 0", epsilon, Relation::kGreater, 0.0));
  out.checks.push_back(make_check("epsilon < r", epsilon, Relation::kLess, out.r));
  out.checks.push_back(make_check("eta <= e^(-aT)*(r - epsilon)/delta", eta, Relation::kLessEqual,
                                  std::exp(-a * T) * (out.r - epsilon) / delta));
  out.checks.push_back(
      make_check("k_tilde*delta >= ln(r/epsilon)", out.k_tilde * delta, Relation::kGreaterEqual, std::log(out.r / epsilon)));
  out.checks.push_back(
      make_check("epsilon >= r*(T - delta)/T", epsilon, Relation::kGreaterEqual, out.r * (T - delta) / T));

  const double q_min = std::min(w.q1, w.q2);
  const double q = std::max(w.q1, w.q2);
  const double e2 = std::exp(2 * a * T) - std::exp(2 * a * delta);
  const double rhs = 0.5 * eta * std::exp(a * T) * (out.r + epsilon) + q * q * eta * eta * delta / (2 * a) * e2 +
                     2 * q * q * eta * out.r / (std::sqrt(2.0) * a) * std::sqrt(T * T / delta - T) * std::sqrt(e2);
  out.checks.push_back(make_check("ISS: q_min*epsilon^2 > disturbance terms", q_min * epsilon * epsilon,
                                  Relation::kGreater, rhs));
  return out;
}

inline void print_report(std::ostream& os, const CertifiedParams& p) {
  for (const Check& c : p.checks) os << format_check(c) << "\n";
}

}  // namespace rmpc

#endif  // RMPC_CERTIFY_HPP_
