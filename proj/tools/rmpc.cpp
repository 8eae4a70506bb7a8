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

// rmpc: certify parameters and run robust MPC tracking experiments.
//
//   rmpc certify    --config FILE
//   rmpc run        --config FILE [--seed N] [--out DIR] [--force] [--feedback continuous|zoh]
//   rmpc compare    --config FILE ...
//   rmpc gain-sweep --config FILE ...

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rmpc/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
  std::string feedback;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, Flags& f, bool running) {
  cmd->add_option("--config", f.config, "experiment configuration file")->required();
  cmd->add_option("--seed", f.seed, "disturbance seed (overrides [sim] seed)");
  if (!running) return;
  cmd->add_option("--out", f.out, "output directory (overrides [output] dir)");
  cmd->add_flag("--force", f.force, "run even if the certificate fails; the summary is watermarked");
  cmd->add_option("--feedback", f.feedback, "tube feedback evaluation")
      ->check(CLI::IsMember({"continuous", "zoh"}));
  cmd->add_flag("--no-timing", f.no_timing, "write solve_time_s as 0 so CSVs are byte-reproducible");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust MPC (tube and nominal-robust) tracking of a disturbed unicycle"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* certify = app.add_subcommand("certify", "check the sufficient conditions for the selected strategy");
  CLI::App* run = app.add_subcommand("run", "closed-loop run of the selected strategy");
  CLI::App* compare = app.add_subcommand("compare", "tube and NRMPC on one disturbance realization");
  CLI::App* sweep = app.add_subcommand("gain-sweep", "tube runs over the configured feedback gains");
  add_common(certify, f, false);
  for (CLI::App* c : {run, compare, sweep}) add_common(c, f, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? rmpc::kExitOk : rmpc::kExitParse;
  }

  std::ifstream file(f.config);
  if (!file) {
    std::cerr << "error: cannot read config '" << f.config << "'\n";
    return rmpc::kExitParse;
  }
  std::stringstream text;
  text << file.rdbuf();
  rmpc::ParseResult parsed = rmpc::parse_config(text.str());
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors) std::cerr << f.config << ": " << e << "\n";
    return rmpc::kExitParse;
  }
  rmpc::ExperimentConfig cfg = std::move(*parsed.config);
  CLI::App* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) cfg.sim.disturbance.seed = f.seed;
  if (!f.feedback.empty()) {
    cfg.sim.feedback_mode = f.feedback == "zoh" ? rmpc::FeedbackMode::kZeroOrderHold : rmpc::FeedbackMode::kContinuous;
  }
  rmpc::RunOptions opt;
  opt.out_dir = f.out.empty() ? cfg.output_dir : f.out;
  opt.force = f.force;
  opt.timing = !f.no_timing;

  try {
    if (active == certify) return rmpc::cmd_certify(cfg, std::cout);
    if (active == run) return rmpc::cmd_run(cfg, opt, std::cout, std::cerr);
    if (active == compare) return rmpc::cmd_compare(cfg, opt, std::cout, std::cerr);
    return rmpc::cmd_gain_sweep(cfg, opt, std::cout, std::cerr);
  } catch (const rmpc::NumericalBreakdown& e) {
    std::cerr << "error: numerical breakdown: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return rmpc::kExitRuntime;
}
