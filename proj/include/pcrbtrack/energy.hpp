#pragma once

#include <stdexcept>
#include <vector>

#include "pcrbtrack/kernels.hpp"
#include "pcrbtrack/scenario.hpp"

namespace pcrbtrack {

/// Raised when a plan cannot satisfy the endpoint or the energy budget.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropulsionParams {
  double P0 = 79.8563;
  double Pi = 88.6279;
  double Utip = 120.0;
  double vh = 4.03;
  double chi = 0.0185;

  static PropulsionParams from(const Scenario& sc);
};

/// Rotary-wing propulsion power at forward speed v [W]. The induced term is
/// evaluated as Pi / sqrt(sqrt(1 + b^2) + b), b = v^2 / (2 vh^2), which avoids
/// the cancellation of the textbook form at high speed.
double propulsion_power(double v, const PropulsionParams& pp);

/// Textbook form of the same model, kept for cross-checking.
double propulsion_power_direct(double v, const PropulsionParams& pp);

/// sqrt(sqrt(1 + v^4 / (4 vh^4)) - v^2 / (2 vh^2)), in its stable form.
double induced_factor(double v, double vh);

/// Speed minimizing propulsion power on [0, v_hi].
double max_endurance_speed(const PropulsionParams& pp, double v_hi = 100.0);

struct BackupPlan {
  std::vector<double> velocities;  // slots n+1 .. N
  double E_b = 0.0;                // SCA surrogate energy, an upper bound
  double E_actual = 0.0;           // sum P(v_l) dT
  int sca_iterations = 0;
  double kkt_residual = 0.0;
  /// Surrogate objective per SCA iteration of the winning start.
  std::vector<double> surrogate_trace;
};

/// Minimum-energy velocity profile that covers x_F - x_start in exactly
/// `slots` slots with |v| <= v_max. Non-convex; solved by successive convex
/// approximation from two deterministic starts (constant velocity and an
/// alternating max-endurance profile). Throws InfeasibleError when the
/// displacement exceeds slots * v_max * dT.
BackupPlan backup_plan(double x_start, double x_F, int slots, double dT, double v_max,
                       const PropulsionParams& pp);

/// Runs SCA from a given feasible start profile (exposed for tests).
BackupPlan sca_from(std::vector<double> start, double displacement, double dT, double v_max,
                    const PropulsionParams& pp);

struct DpGrid {
  double v_step = 0.05;  // [m/s]
  double x_step = 0.01;  // [m]; v_step * dT must be an integer multiple
};

struct DpResult {
  std::vector<double> velocities;
  double energy = 0.0;
};

/// Exact minimum over velocity profiles on the grid, by forward dynamic
/// programming on cumulative displacement. The displacement must lie on the
/// x_step lattice.
DpResult dp_oracle(double x_start, double x_F, int slots, double dT, double v_max,
                   const PropulsionParams& pp, const DpGrid& grid = {}, Exec exec = Exec::kParallel);

struct SpeedInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Speeds in [0, v_max] whose slot energy P(v) dT stays within E_slot. P is
/// unimodal, so the result is empty or a single interval around the
/// max-endurance speed; each branch edge is found by bisection.
std::vector<SpeedInterval> feasible_speed_intervals(double E_slot, double dT, double v_max,
                                                    const PropulsionParams& pp);

struct EnergyLedger {
  double consumed = 0.0;
  double budget = 0.0;
};

inline constexpr double kGateTolerance = 1e-9;  // [J]

/// consumed + P(v_candidate) dT + E_b <= budget.
bool feasibility_gate(const EnergyLedger& ledger, double v_candidate, double dT, double E_b,
                      const PropulsionParams& pp);

}  // namespace pcrbtrack
