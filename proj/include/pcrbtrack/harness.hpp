#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcrbtrack/controller.hpp"
#include "pcrbtrack/scenario.hpp"

namespace pcrbtrack {

/// Per-slot log columns, in file order.
inline constexpr std::string_view kCsvHeader =
    "trial,slot,time,policy,mode_tag,target_pos,uav_pos,uav_vel,rel_x,rel_v,est_x,est_v,"
    "pred_pcrb_x,pred_pcrb_v,act_pcrb_x,act_pcrb_v,weighted_actual,slot_energy,"
    "cumulative_energy,E_b,gate";

/// Header line plus one row per slot. Doubles use the shortest text that
/// parses back to the same value.
std::string to_csv(const EpisodeLog& log);

/// Inverse of to_csv. Throws std::runtime_error on malformed input.
EpisodeLog parse_csv(std::string_view text);

Policy policy_from_string(std::string_view s);
ModeTag mode_tag_from_string(std::string_view s);

struct PolicySummary {
  Policy policy = Policy::kProposed;
  int trials = 0;
  double mean_weighted_actual = 0.0;  // over every slot of every trial
  double energy_mean = 0.0;
  double energy_max = 0.0;
  double turning_point_mean = 0.0;
  std::map<int, int> turning_points;  // slot -> trial count
  double terminal_error_max = 0.0;
};

struct RunSummary {
  double x_F = 0.0;
  std::vector<PolicySummary> policies;
};

/// Aggregates per policy, in order of first appearance. Uses only fields that
/// are written to CSV, so a summary rebuilt from the files matches exactly.
RunSummary summarize(const std::vector<EpisodeLog>& logs, double x_F);

std::string summary_json(const RunSummary& s);
std::string summary_table(const RunSummary& s);

/// Seed of trial `trial` (1-based) in a run started from `base`. Both
/// policies of a trial share it, which pairs their noise draws.
std::uint64_t trial_seed(std::uint64_t base, int trial);

/// PCRB_TRACKER_JOBS, when set to a positive integer, wins over `requested`.
int effective_jobs(int requested);

struct BatchOptions {
  std::vector<Policy> policies{Policy::kProposed, Policy::kBenchmark};
  int trials = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  const SdpBackend* sdp = nullptr;
};

/// Runs every (trial, policy) pair, concurrently up to `jobs`. The result is
/// ordered by trial, then by the order of `policies`, whatever the schedule.
/// Rethrows the first failure in that order.
std::vector<EpisodeLog> run_batch(const Scenario& sc, const BatchOptions& opt);

/// Writes <policy>_trial<NNNN>.csv per log and summary.json into `dir`.
void write_run(const std::string& dir, const std::vector<EpisodeLog>& logs,
               const RunSummary& summary);

struct SimulateArgs {
  std::string config;  // empty: built-in defaults
  std::string policy = "both";
  int trials = 1;
  std::optional<std::uint64_t> seed;  // unset: the scenario's seed
  std::string out = "out";
  int jobs = 1;
  std::string solver = "sdp";  // sdp | oracle
};

struct SweepArgs {
  SimulateArgs base;
  std::string param = "E_tot";
  std::vector<double> values;
};

struct SelftestArgs {
  bool no_sdp = false;
  bool mutate_pcrb = false;
  std::uint64_t seed = 12345;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_selftest(const SelftestArgs& args, std::ostream& out, std::ostream& err);

/// Scenario with one key replaced, validated as if it came from a config file.
Scenario with_override(const Scenario& sc, const std::string& key, double value);

}  // namespace pcrbtrack
