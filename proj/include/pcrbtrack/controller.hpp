#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcrbtrack/dinkelbach.hpp"
#include "pcrbtrack/ekf.hpp"
#include "pcrbtrack/energy.hpp"
#include "pcrbtrack/scenario.hpp"
#include "pcrbtrack/sdp.hpp"

namespace pcrbtrack {

enum class Policy { kProposed, kBenchmark };
enum class Mode { kOptimizing, kFallback };
enum class ModeTag { kCandidate, kBackupFallback, kDirectFlight, kForcedTerminal };

const char* to_string(Policy p);
const char* to_string(ModeTag t);

/// Inner solvers for the per-slot ratio problem. A null `sdp` runs the
/// root-finding minimizer only.
struct Solvers {
  const SdpBackend* sdp = nullptr;
  std::vector<InnerProblem>* harvest = nullptr;
  std::vector<DinkelbachResult>* outer = nullptr;  // one entry per ratio solve
};

/// Everything the controller carries between slots. `slot` is the slot about
/// to be decided; `uav` and `belief` describe the end of slot - 1.
struct ControllerState {
  int slot = 1;
  UavMotion uav;
  Belief belief;
  EnergyLedger ledger;
  BackupPlan last_backup;
  int backup_first_slot = 0;  // slot served by last_backup.velocities[0]; 0 = none
  Mode mode = Mode::kOptimizing;
};

struct SlotDecision {
  double v_applied = 0.0;
  ModeTag tag = ModeTag::kCandidate;
  Interval bounds;
  int dinkelbach_iterations = 0;
  bool global_flag = false;
  bool gate_evaluated = false;
  bool gate_passed = false;
  double E_b = 0.0;  // bound that certified this slot (0 when none)
};

/// Bounds on the predicted relative position for the next slot:
///   lo = max(eta - step, omega - reach), hi = min(eta + step, omega + reach).
/// Returns lo > hi unchanged; callers decide whether that is an error.
Interval bounds_from(double eta, double omega, double step, double reach);

/// eta = xhat + vhat dT + v_prev dT, omega = x_prev + eta - x_F. Throws
/// InfeasibleError when the interval is empty beyond rounding.
Interval candidate_bounds(const ControllerState& state, const Scenario& sc);

/// Predicted position eta of the decision rule, exposed for tests.
double predicted_offset(const ControllerState& state, const Scenario& sc);

/// Gate-checked candidate with backup fallback. Advances `state` by one slot
/// (uav motion, ledger, mode, stored backup); the belief is left to the caller.
SlotDecision proposed_step(ControllerState& state, const Scenario& sc, const Solvers& solvers);

/// Energy-capped candidate with a direct-flight reserve rule.
SlotDecision benchmark_step(ControllerState& state, const Scenario& sc, const Solvers& solvers);

ControllerState initial_state(const Scenario& sc, const Belief& belief0);

struct SlotRecord {
  int trial = 0;
  int slot = 0;
  double time = 0.0;
  Policy policy = Policy::kProposed;
  ModeTag tag = ModeTag::kCandidate;
  double target_pos = 0.0;
  double uav_pos = 0.0;
  double uav_vel = 0.0;
  double rel_x = 0.0;
  double rel_v = 0.0;
  double est_x = 0.0;
  double est_v = 0.0;
  double pred_pcrb_x = 0.0;
  double pred_pcrb_v = 0.0;
  double act_pcrb_x = 0.0;
  double act_pcrb_v = 0.0;
  double weighted_actual = 0.0;
  double slot_energy = 0.0;
  double cumulative_energy = 0.0;
  double E_b = 0.0;
  int gate = -1;  // -1 not evaluated, 0 failed, 1 passed
};

struct EpisodeLog {
  int trial = 0;
  Policy policy = Policy::kProposed;
  std::uint64_t seed = 0;
  std::vector<SlotRecord> records;

  /// First slot whose tag is not CANDIDATE (N + 1 if there is none).
  int turning_point() const;
  double total_energy() const;
  double terminal_error(double x_F) const;
  double mean_weighted_actual() const;
  /// Cumulative energy after `slot` (0 for slot 0).
  double energy_through(int slot) const;
};

/// Initial relative state and estimate for a seed. Shared by both policies.
struct EpisodeStart {
  RelativeState truth;
  Belief belief;
};
EpisodeStart episode_start(const Scenario& sc, std::uint64_t seed);

/// Simulates N slots. Process noise, measurement noise and the initial
/// estimate come from separate streams derived from `seed`, so both policies
/// see the same target path and noise draws.
EpisodeLog run_episode(const Scenario& sc, Policy policy, std::uint64_t seed,
                       const Solvers& solvers, int trial = 0);

}  // namespace pcrbtrack
