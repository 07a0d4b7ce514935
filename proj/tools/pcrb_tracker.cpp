#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcrbtrack/harness.hpp"

namespace {

void add_run_flags(CLI::App* cmd, pcrbtrack::SimulateArgs& a) {
  cmd->add_option("--config", a.config, "scenario JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--policy", a.policy, "proposed | benchmark | both")
      ->check(CLI::IsMember({"proposed", "benchmark", "both"}));
  cmd->add_option("--trials", a.trials, "trials per policy")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "base seed (scenario seed when omitted)");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--jobs", a.jobs, "concurrent trials; PCRB_TRACKER_JOBS overrides")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--solver", a.solver, "inner solver: sdp | oracle")
      ->check(CLI::IsMember({"sdp", "oracle"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV target tracking under an energy budget: batch simulator"};
  app.require_subcommand(1);

  pcrbtrack::SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run seeded trials and write CSV logs");
  add_run_flags(simulate, sim);

  pcrbtrack::SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "repeat simulate over values of one parameter");
  add_run_flags(sw, sweep.base);
  sw->add_option("--param", sweep.param, "scenario key to vary");
  std::vector<std::string> raw_values;
  sw->add_option("--values", raw_values, "comma separated values")->delimiter(',')->required();

  pcrbtrack::SelftestArgs st;
  auto* selftest = app.add_subcommand("selftest", "run the oracle cross-checks");
  selftest->add_flag("--no-sdp", st.no_sdp, "run without an SDP backend");
  selftest->add_flag("--mutate-pcrb", st.mutate_pcrb, "perturb the closed-form PCRB (must fail)");
  selftest->add_option("--seed", st.seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  if (*simulate) return pcrbtrack::cmd_simulate(sim, std::cout, std::cerr);
  if (*sw) {
    for (const auto& v : raw_values) {
      if (v.empty()) continue;
      try {
        size_t used = 0;
        sweep.values.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        std::cerr << "error: --values: '" << v << "' is not a number\n";
        return 2;
      }
    }
    return pcrbtrack::cmd_sweep(sweep, std::cout, std::cerr);
  }
  return pcrbtrack::cmd_selftest(st, std::cout, std::cerr);
}
