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

#include "rmpc/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rmpc/commands.hpp"

namespace rmpc {
namespace {

namespace fs = std::filesystem;

SimConfig short_run(Strategy s, double duration = 2.0) {
  SimConfig c;
  c.strategy = s;
  c.duration = duration;
  return c;
}

std::string csv_text(const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rmpc_io_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(CsvTest, HeaderOrder) {
  const std::string text = csv_text({});
  EXPECT_EQ(text,
            "t,x_f,y_f,theta_f,x_r,y_r,theta_r,x_rf,y_rf,theta_rf,v_f,omega_f,input_index,pfe_x,pfe_y,J_opt,"
            "stage_cost,state_cost,input_cost,solver_iters,solve_time_s,feasible,fallback\n");
}

TEST(CsvTest, RoundTripIsExact) {
  const SimLog log = run_closed_loop(short_run(Strategy::kTube));
  const std::vector<CsvRow> rows = step_rows(log);
  ASSERT_EQ(rows.size(), 10u);
  std::istringstream in(csv_text(rows));
  const std::vector<CsvRow> back = read_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(back[i], rows[i]) << "row " << i;
}

TEST(CsvTest, SubstepRowsCoverTheRun) {
  const SimLog log = run_closed_loop(short_run(Strategy::kNrmpc));
  const std::vector<CsvRow> rows = substep_rows(log);
  ASSERT_EQ(rows.size(), 51u);  // N m + 1
  EXPECT_EQ(rows.front()[0], 0.0);
  EXPECT_DOUBLE_EQ(rows.back()[0], 2.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][0], rows[i - 1][0]);
}

TEST(CsvTest, RejectsMalformedInput) {
  std::istringstream bad_header("t,x\n1,2\n");
  EXPECT_THROW(read_csv(bad_header), std::runtime_error);
  std::string text = csv_text({CsvRow{}});
  text.insert(text.find('\n') + 1, "x");
  std::istringstream bad_cell(text);
  try {
    read_csv(bad_cell);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(CsvTest, DeterministicWithTimingOff) {
  const SimConfig c = short_run(Strategy::kTube);
  const SimLog a = run_closed_loop(c);
  const SimLog b = run_closed_loop(c);
  EXPECT_EQ(csv_text(step_rows(a, false)), csv_text(step_rows(b, false)));
  EXPECT_EQ(csv_text(substep_rows(a, false)), csv_text(substep_rows(b, false)));
}

TEST(SummaryTest, Fields) {
  const SimLog log = run_closed_loop(short_run(Strategy::kTube));
  const RunSummary s = summarize(log, 1.0);
  EXPECT_EQ(s.strategy, "tube");
  EXPECT_DOUBLE_EQ(s.duration, 2.0);
  EXPECT_NEAR(s.initial_prf, std::hypot(0.2, 0.2), 1e-12);
  EXPECT_LE(s.max_input_index, 1.0 + 1e-9);
  EXPECT_GE(s.feasibility_rate, 0.0);
  EXPECT_LE(s.feasibility_rate, 1.0);
  EXPECT_GT(s.cumulative_input_cost, 0.0);
  const nlohmann::json j = to_json(s);
  EXPECT_EQ(j["strategy"], "tube");
  EXPECT_TRUE(j.contains("cumulative_J_opt"));
  EXPECT_FALSE(j["forced"].get<bool>());
}

ExperimentConfig experiment(double duration) {
  ExperimentConfig e;
  e.sim = short_run(Strategy::kTube, duration);
  return e;
}

TEST(CommandTest, CertifyExitCodes) {
  std::ostringstream out;
  ExperimentConfig e = experiment(2.0);
  EXPECT_EQ(cmd_certify(e, out), kExitOk);
  EXPECT_NE(out.str().find("certificate: PASS"), std::string::npos);
  e.sim.disturbance.eta = 0.05;  // tube wider than the terminal margin
  std::ostringstream out2;
  EXPECT_EQ(cmd_certify(e, out2), kExitCertification);
  EXPECT_NE(out2.str().find("certificate: FAIL"), std::string::npos);
}

TEST(CommandTest, RunRefusesUncertifiedUnlessForced) {
  ExperimentConfig e = experiment(0.4);
  e.sim.strategy = Strategy::kNrmpc;
  e.sim.disturbance.eta = 0.0045;  // above the NRMPC feasibility margin
  RunOptions opt;
  opt.out_dir = scratch("forced");
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cmd_run(e, opt, out, err), kExitCertification);
  EXPECT_FALSE(fs::exists(opt.out_dir / "nrmpc.csv"));
  opt.force = true;
  EXPECT_EQ(cmd_run(e, opt, out, err), kExitOk);
  const nlohmann::json j = nlohmann::json::parse(slurp(opt.out_dir / "nrmpc_summary.json"));
  EXPECT_TRUE(j["forced"].get<bool>());
  EXPECT_FALSE(j["certified"].get<bool>());
  fs::remove_all(opt.out_dir);
}

TEST(CommandTest, SingleGainSweepEqualsRun) {
  ExperimentConfig e = experiment(1.0);
  e.sim.feedback = {-2.3, -2.3};
  e.sweep_gains = {-2.3};
  RunOptions opt;
  opt.timing = false;
  std::ostringstream out;
  std::ostringstream err;
  opt.out_dir = scratch("run");
  ASSERT_EQ(cmd_run(e, opt, out, err), kExitOk);
  const fs::path run_dir = opt.out_dir;
  opt.out_dir = scratch("sweep");
  ASSERT_EQ(cmd_gain_sweep(e, opt, out, err), kExitOk);
  EXPECT_EQ(slurp(run_dir / "tube.csv"), slurp(opt.out_dir / "tube.csv"));
  EXPECT_EQ(slurp(run_dir / "tube_substeps.csv"), slurp(opt.out_dir / "tube_substeps.csv"));
  EXPECT_TRUE(fs::exists(opt.out_dir / "gain_sweep.json"));
  fs::remove_all(run_dir);
  fs::remove_all(opt.out_dir);
}

TEST(CommandTest, CompareSharesDisturbance) {
  const ExperimentConfig e = experiment(1.0);
  RunOptions opt;
  opt.out_dir = scratch("compare");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cmd_compare(e, opt, out, err), kExitOk);
  const nlohmann::json j = nlohmann::json::parse(slurp(opt.out_dir / "compare.json"));
  EXPECT_TRUE(j["identical_disturbance"].get<bool>());
  EXPECT_EQ(slurp(opt.out_dir / "tube_disturbance.csv"), slurp(opt.out_dir / "nrmpc_disturbance.csv"));
  fs::remove_all(opt.out_dir);
}

}  // namespace
}  // namespace rmpc
