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

#ifndef RMPC_COMMANDS_HPP_
#define RMPC_COMMANDS_HPP_

// Experiment orchestration behind the command line tool. Every command
// returns a process exit code:
//   0 success, 1 certification failure, 2 parse error, 3 runtime/solver abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmpc/certify.hpp"
#include "rmpc/config.hpp"
#include "rmpc/io.hpp"
#include "rmpc/sim.hpp"

namespace rmpc {

enum ExitCode : int { kExitOk = 0, kExitCertification = 1, kExitParse = 2, kExitRuntime = 3 };

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool force = false;   // run even when the certificate fails (watermarked)
  bool timing = true;   // false writes solve_time_s = 0 for byte-stable CSVs
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void write_rows(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  write_text(path, os.str());
}

// Writes <stem>.csv, <stem>_substeps.csv and <stem>_disturbance.csv.
inline void write_log_files(const std::filesystem::path& dir, const std::string& stem, const SimLog& log,
                            bool timing) {
  write_rows(dir / (stem + ".csv"), step_rows(log, timing));
  write_rows(dir / (stem + "_substeps.csv"), substep_rows(log, timing));
  std::ostringstream d;
  write_disturbance_csv(d, log);
  write_text(dir / (stem + "_disturbance.csv"), d.str());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

// Certificate gate shared by the running commands.
inline bool gate(const CertifiedParams& cert, const char* what, const RunOptions& opt, std::ostream& err) {
  if (cert.all_pass()) return true;
  err << what << ": certificate failed:\n";
  for (const Check& c : cert.checks) {
    if (!c.pass) err << "  " << format_check(c) << "\n";
  }
  if (opt.force) {
    err << "warning: --force given, running uncertified parameters\n";
    return true;
  }
  return false;
}

inline nlohmann::json summary_json(const SimLog& log, bool forced) {
  RunSummary s = summarize(log);
  s.forced = forced;
  return to_json(s);
}

inline std::string gain_stem(double k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "tube_k%g", -k);
  return buf;
}

}  // namespace detail

inline int cmd_certify(const ExperimentConfig& cfg, std::ostream& out) {
  const CertifiedParams cert = certificate_for(cfg.sim);
  out << "strategy: " << to_string(cfg.sim.strategy) << "\n";
  print_report(out, cert);
  char buf[256];
  if (cfg.sim.strategy == Strategy::kTube) {
    std::snprintf(buf, sizeof buf,
                  "lambda_r = %.6g\nlambda_tube = %.6g\ndiamond_level = %.6g (|x|+|y| form: %.6g)\n"
                  "tube_halfwidth = [%.6g, %.6g]\n",
                  cert.lambda_r, cert.lambda_tube, cert.diamond_level, cert.diamond_level / cfg.sim.gains.k1,
                  cert.tube_halfwidth_x, cert.tube_halfwidth_y);
  } else {
    std::snprintf(buf, sizeof buf, "lambda_r = %.6g\nr = %.6g\nepsilon = %.6g\nk_tilde = %.6g\n", cert.lambda_r,
                  cert.r, cert.epsilon, cert.k_tilde);
  }
  out << buf << (cert.all_pass() ? "certificate: PASS\n" : "certificate: FAIL\n");
  return cert.all_pass() ? kExitOk : kExitCertification;
}

inline int cmd_run(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const CertifiedParams cert = certificate_for(cfg.sim);
  const char* name = to_string(cfg.sim.strategy);
  if (!detail::gate(cert, name, opt, err)) return kExitCertification;
  detail::ensure_dir(opt.out_dir);
  const SimLog log = run_closed_loop(cfg.sim);
  detail::write_log_files(opt.out_dir, name, log, opt.timing);
  const nlohmann::json summary = detail::summary_json(log, !cert.all_pass());
  detail::write_text(opt.out_dir / (std::string(name) + "_summary.json"), summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  SimConfig tube = cfg.sim;
  tube.strategy = Strategy::kTube;
  SimConfig nrmpc = cfg.sim;
  nrmpc.strategy = Strategy::kNrmpc;
  const CertifiedParams ct = certificate_for(tube);
  const CertifiedParams cn = certificate_for(nrmpc);
  const bool ok_t = detail::gate(ct, "tube", opt, err);
  const bool ok_n = detail::gate(cn, "nrmpc", opt, err);
  if (!ok_t || !ok_n) return kExitCertification;
  detail::ensure_dir(opt.out_dir);

  // Independent runs on the same seed, hence the same disturbance realization.
  auto ft = std::async(std::launch::async, [&] { return run_closed_loop(tube); });
  auto fn = std::async(std::launch::async, [&] { return run_closed_loop(nrmpc); });
  const SimLog lt = ft.get();
  const SimLog ln = fn.get();
  detail::write_log_files(opt.out_dir, "tube", lt, opt.timing);
  detail::write_log_files(opt.out_dir, "nrmpc", ln, opt.timing);

  const RunSummary st = summarize(lt);
  const RunSummary sn = summarize(ln);
  nlohmann::json j;
  j["seed"] = cfg.sim.disturbance.seed;
  j["tube"] = detail::summary_json(lt, !ct.all_pass());
  j["nrmpc"] = detail::summary_json(ln, !cn.all_pass());
  j["identical_disturbance"] = lt.disturbances.size() == ln.disturbances.size() &&
                               std::equal(lt.disturbances.begin(), lt.disturbances.end(), ln.disturbances.begin(),
                                          [](const Disturbance& a, const Disturbance& b) {
                                            return a.x == b.x && a.y == b.y;
                                          });
  j["nrmpc_input_cost_ge_tube"] = sn.cumulative_input_cost >= st.cumulative_input_cost;
  j["input_cost_ratio_nrmpc_over_tube"] =
      st.cumulative_input_cost > 0.0 ? sn.cumulative_input_cost / st.cumulative_input_cost : 0.0;
  j["state_cost_ratio_nrmpc_over_tube"] =
      st.cumulative_state_cost > 0.0 ? sn.cumulative_state_cost / st.cumulative_state_cost : 0.0;
  j["mean_solve_time_ratio_nrmpc_over_tube"] = st.mean_solve_time > 0.0 ? sn.mean_solve_time / st.mean_solve_time : 0.0;
  detail::write_text(opt.out_dir / "compare.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_gain_sweep(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out,
                          std::ostream& err) {
  std::vector<SimConfig> runs;
  bool all_ok = true;
  bool all_certified = true;
  for (double k : cfg.sweep_gains) {
    SimConfig c = cfg.sim;
    c.strategy = Strategy::kTube;
    c.feedback = {k, k};
    const CertifiedParams cert = certificate_for(c);
    all_certified = all_certified && cert.all_pass();
    all_ok = detail::gate(cert, detail::gain_stem(k).c_str(), opt, err) && all_ok;
    runs.push_back(c);
  }
  if (!all_ok) return kExitCertification;
  detail::ensure_dir(opt.out_dir);

  std::vector<std::future<SimLog>> futures;
  for (const SimConfig& c : runs) futures.push_back(std::async(std::launch::async, [c] { return run_closed_loop(c); }));
  std::vector<SimLog> logs;
  for (auto& f : futures) logs.push_back(f.get());

  nlohmann::json j;
  j["seed"] = cfg.sim.disturbance.seed;
  j["gains"] = nlohmann::json::array();
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double k = cfg.sweep_gains[i];
    const std::string stem = logs.size() == 1 ? "tube" : detail::gain_stem(k);
    detail::write_log_files(opt.out_dir, stem, logs[i], opt.timing);
    const RunSummary s = summarize(logs[i]);
    const double predicted = cfg.sim.disturbance.eta / std::abs(k);
    nlohmann::json g;
    g["k"] = k;
    g["csv"] = stem + ".csv";
    g["max_abs_pfe"] = s.max_abs_pfe;
    g["predicted_halfwidth"] = predicted;
    g["within_predicted_plus_10pct"] = s.max_abs_pfe <= 1.1 * predicted;
    g["feasibility_rate"] = s.feasibility_rate;
    j["gains"].push_back(g);
    decreasing = decreasing && s.max_abs_pfe < prev;
    prev = s.max_abs_pfe;
  }
  j["strictly_decreasing_in_listed_order"] = decreasing;
  j["forced"] = !all_certified;
  detail::write_text(opt.out_dir / "gain_sweep.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace rmpc

#endif  // RMPC_COMMANDS_HPP_
