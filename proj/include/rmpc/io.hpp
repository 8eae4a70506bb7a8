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

#ifndef RMPC_IO_HPP_
#define RMPC_IO_HPP_

// Log serialization. Floats are written as the shortest decimal that parses
// back to the same double, so a CSV round trip is exact and identical runs
// give byte-identical files (solve times aside; see `timing`).

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rmpc/sim.hpp"

namespace rmpc {

inline constexpr std::array<const char*, 23> kCsvColumns = {
    "t",       "x_f",         "y_f",          "theta_f",    "x_r",          "y_r",        "theta_r",   "x_rf",
    "y_rf",    "theta_rf",    "v_f",          "omega_f",    "input_index",  "pfe_x",      "pfe_y",     "J_opt",
    "stage_cost", "state_cost", "input_cost", "solver_iters", "solve_time_s", "feasible", "fallback"};

using CsvRow = std::array<double, kCsvColumns.size()>;

inline CsvRow to_row(const StepRecord& r, bool timing) {
  return {r.t,
          r.actual.x,
          r.actual.y,
          r.actual.theta,
          r.reference.x,
          r.reference.y,
          r.reference.theta,
          r.error.x,
          r.error.y,
          r.error.theta,
          r.input.v,
          r.input.omega,
          r.input_index,
          r.pfe_x,
          r.pfe_y,
          r.j_opt,
          r.stage_cost,
          r.state_cost,
          r.input_cost,
          static_cast<double>(r.solver_iters),
          timing ? r.solve_time : 0.0,
          r.feasible ? 1.0 : 0.0,
          r.fallback ? 1.0 : 0.0};
}

// One row per sampling instant. With timing off the solve_time_s column is 0,
// which makes the file a pure function of configuration and seed.
inline std::vector<CsvRow> step_rows(const SimLog& log, bool timing = true) {
  std::vector<CsvRow> rows;
  rows.reserve(log.steps.size());
  for (const StepRecord& r : log.steps) rows.push_back(to_row(r, timing));
  return rows;
}

// One row per plant substep point (N m + 1 rows). Continuous signals are
// sampled at the substep; solver columns repeat the owning period's values.
inline std::vector<CsvRow> substep_rows(const SimLog& log, bool timing = true) {
  const SubstepSeries& s = log.substep;
  std::vector<CsvRow> rows;
  rows.reserve(s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const std::size_t k = std::min(i / static_cast<std::size_t>(log.substeps), log.steps.size() - 1);
    StepRecord r = log.steps[k];
    r.t = s.t[i];
    r.actual = s.actual[i];
    r.reference = s.reference[i];
    r.error = s.error[i];
    r.input = s.input[i];
    r.input_index = s.input_index[i];
    r.pfe_x = s.pfe_x[i];
    r.pfe_y = s.pfe_y[i];
    r.stage_cost = s.stage_cost[i];
    r.state_cost = s.state_cost[i];
    r.input_cost = s.input_cost[i];
    rows.push_back(to_row(r, timing));
  }
  return rows;
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  std::string line;
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    if (c) line += ',';
    line += kCsvColumns[c];
  }
  os << line << '\n';
  for (const CsvRow& row : rows) {
    line.clear();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += ',';
      append_double(line, row[c]);
    }
    os << line << '\n';
  }
  if (!os) throw std::runtime_error("write_csv: stream error");
}

// Reads a file written by write_csv; the header must match exactly.
inline std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
  std::string header;
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    if (c) header += ',';
    header += kCsvColumns[c];
  }
  if (line != header) throw std::runtime_error("read_csv: unexpected header '" + line + "'");
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    CsvRow row{};
    std::string_view rest = line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[c]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::runtime_error("read_csv: line " + std::to_string(lineno) + ": bad number in column " +
                                 kCsvColumns[c]);
      }
      if ((comma == std::string_view::npos) != (c + 1 == row.size())) {
        throw std::runtime_error("read_csv: line " + std::to_string(lineno) + ": wrong column count");
      }
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    rows.push_back(row);
  }
  return rows;
}

// Per-substep disturbance realization: t (start of the substep), d_x, d_y.
inline void write_disturbance_csv(std::ostream& os, const SimLog& log) {
  std::string line = "t,d_x,d_y\n";
  const double h = log.delta / log.substeps;
  for (std::size_t i = 0; i < log.disturbances.size(); ++i) {
    append_double(line, static_cast<double>(i) * h);
    line += ',';
    append_double(line, log.disturbances[i].x);
    line += ',';
    append_double(line, log.disturbances[i].y);
    line += '\n';
  }
  os << line;
  if (!os) throw std::runtime_error("write_disturbance_csv: stream error");
}

struct RunSummary {
  std::string strategy;
  std::uint64_t seed = 0;
  double duration = 0.0;
  double max_abs_pfe = 0.0;  // max over substeps of max(|pfe_x|, |pfe_y|)
  double max_abs_pfe_x = 0.0;
  double max_abs_pfe_y = 0.0;
  double terminal_window = 10.0;    // s
  double terminal_mean_prf = 0.0;   // mean ||p_rf|| over the final window (substep samples)
  double initial_prf = 0.0;
  double min_input_index = 0.0;
  double max_input_index = 0.0;
  double feasibility_rate = 0.0;
  int fallback_steps = 0;
  int candidate_steps = 0;               // steps that had a shifted candidate
  double max_candidate_violation = 0.0;  // over those steps
  double cumulative_stage_cost = 0.0;    // trapezoid integrals over the run
  double cumulative_state_cost = 0.0;
  double cumulative_input_cost = 0.0;
  double cumulative_j_opt = 0.0;         // sum of J_opt over sampling instants
  double mean_solve_time = 0.0;
  double max_solve_time = 0.0;
  double runtime = 0.0;
  bool certified = false;
  bool forced = false;
};

inline RunSummary summarize(const SimLog& log, double window = 10.0) {
  RunSummary s;
  s.strategy = to_string(log.strategy);
  s.seed = log.seed;
  s.certified = log.certificate.all_pass();
  s.runtime = log.runtime;
  s.terminal_window = window;
  const SubstepSeries& ss = log.substep;
  if (ss.t.empty()) return s;
  s.duration = ss.t.back();
  s.initial_prf = ss.error.front().position_norm();
  s.min_input_index = std::numeric_limits<double>::infinity();
  double window_sum = 0.0;
  int window_n = 0;
  for (std::size_t i = 0; i < ss.t.size(); ++i) {
    s.max_abs_pfe_x = std::max(s.max_abs_pfe_x, std::abs(ss.pfe_x[i]));
    s.max_abs_pfe_y = std::max(s.max_abs_pfe_y, std::abs(ss.pfe_y[i]));
    s.min_input_index = std::min(s.min_input_index, ss.input_index[i]);
    s.max_input_index = std::max(s.max_input_index, ss.input_index[i]);
    if (ss.t[i] >= s.duration - window - 1e-9) {
      window_sum += ss.error[i].position_norm();
      ++window_n;
    }
    if (i > 0) {
      const double dt = ss.t[i] - ss.t[i - 1];
      s.cumulative_stage_cost += 0.5 * dt * (ss.stage_cost[i] + ss.stage_cost[i - 1]);
      s.cumulative_state_cost += 0.5 * dt * (ss.state_cost[i] + ss.state_cost[i - 1]);
      s.cumulative_input_cost += 0.5 * dt * (ss.input_cost[i] + ss.input_cost[i - 1]);
    }
  }
  s.max_abs_pfe = std::max(s.max_abs_pfe_x, s.max_abs_pfe_y);
  s.terminal_mean_prf = window_n ? window_sum / window_n : 0.0;
  int feasible = 0;
  for (const StepRecord& r : log.steps) {
    feasible += r.feasible;
    s.fallback_steps += r.fallback;
    s.cumulative_j_opt += r.j_opt;
    s.mean_solve_time += r.solve_time;
    s.max_solve_time = std::max(s.max_solve_time, r.solve_time);
    if (r.has_candidate) {
      ++s.candidate_steps;
      s.max_candidate_violation = std::max(s.max_candidate_violation, r.candidate_violation);
    }
  }
  if (!log.steps.empty()) {
    s.feasibility_rate = static_cast<double>(feasible) / static_cast<double>(log.steps.size());
    s.mean_solve_time /= static_cast<double>(log.steps.size());
  }
  return s;
}

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j;
  j["strategy"] = s.strategy;
  j["seed"] = s.seed;
  j["duration_s"] = s.duration;
  j["max_abs_pfe"] = s.max_abs_pfe;
  j["max_abs_pfe_x"] = s.max_abs_pfe_x;
  j["max_abs_pfe_y"] = s.max_abs_pfe_y;
  j["terminal_window_s"] = s.terminal_window;
  j["terminal_window_mean_prf"] = s.terminal_mean_prf;
  j["initial_prf"] = s.initial_prf;
  j["min_input_index"] = s.min_input_index;
  j["max_input_index"] = s.max_input_index;
  j["feasibility_rate"] = s.feasibility_rate;
  j["fallback_steps"] = s.fallback_steps;
  j["candidate_steps"] = s.candidate_steps;
  j["max_candidate_violation"] = s.max_candidate_violation;
  j["cumulative_stage_cost"] = s.cumulative_stage_cost;
  j["cumulative_state_cost"] = s.cumulative_state_cost;
  j["cumulative_input_cost"] = s.cumulative_input_cost;
  j["cumulative_J_opt"] = s.cumulative_j_opt;
  j["mean_solve_time_s"] = s.mean_solve_time;
  j["max_solve_time_s"] = s.max_solve_time;
  j["total_runtime_s"] = s.runtime;
  j["certified"] = s.certified;
  j["forced"] = s.forced;
  return j;
}

}  // namespace rmpc

#endif  // RMPC_IO_HPP_
