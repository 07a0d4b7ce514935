#include "pcrbtrack/controller.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pcrbtrack/pcrb.hpp"

namespace pcrbtrack {

const char* to_string(Policy p) {
  return p == Policy::kProposed ? "proposed" : "benchmark";
}

const char* to_string(ModeTag t) {
  switch (t) {
    case ModeTag::kCandidate: return "CANDIDATE";
    case ModeTag::kBackupFallback: return "BACKUP_FALLBACK";
    case ModeTag::kDirectFlight: return "DIRECT_FLIGHT";
    case ModeTag::kForcedTerminal: return "FORCED_TERMINAL";
  }
  return "?";
}

Interval bounds_from(double eta, double omega, double step, double reach) {
  return {std::max(eta - step, omega - reach), std::min(eta + step, omega + reach)};
}

double predicted_offset(const ControllerState& st, const Scenario& sc) {
  const double dT = sc.mission.dT;
  return st.belief.xhat.x + st.belief.xhat.v * dT + st.uav.vel * dT;
}

Interval candidate_bounds(const ControllerState& st, const Scenario& sc) {
  const auto& m = sc.mission;
  const double eta = predicted_offset(st, sc);
  const double omega = st.uav.pos + eta - m.x_F;
  const double step = m.v_max * m.dT;
  Interval iv = bounds_from(eta, omega, step, (m.N - st.slot) * step);
  if (iv.lo > iv.hi) {
    // Rounding in eta and omega can cross the endpoints of a zero-width interval.
    if (iv.lo - iv.hi <= 1e-9 * (1.0 + std::abs(eta) + std::abs(omega))) {
      const double mid = 0.5 * (iv.lo + iv.hi);
      return {mid, mid};
    }
    std::ostringstream msg;
    msg << "slot " << st.slot << ": final location unreachable (bounds [" << iv.lo << ", "
        << iv.hi << "])";
    throw InfeasibleError(msg.str());
  }
  return iv;
}

ControllerState initial_state(const Scenario& sc, const Belief& belief0) {
  ControllerState st;
  st.uav = {sc.mission.x_I, 0.0};
  st.belief = belief0;
  st.ledger = {0.0, sc.mission.E_tot};
  return st;
}

namespace {

struct RatioSolve {
  double x = 0.0;
  double ratio = 0.0;
  int iterations = 0;
  bool global = false;
};

RatioSolve solve_ratio(const Interval& iv, const ControllerState& st, const Scenario& sc,
                       const Solvers& solvers) {
  const auto& m = sc.mission;
  const Eigen::Matrix2d Mp = predict(st.belief, 0.0, m.dT, process_noise_cov(sc.sys.q_tilde, m.dT)).Mp;
  const SensingParams sp = SensingParams::from(sc);
  RatioSolve out;
  if (iv.width() <= 1e-12 * (1.0 + std::abs(iv.mid()))) {
    out.x = iv.mid();
    out.ratio = objective_at(out.x, st.belief.xhat.x, m.dT, Mp, sp, m.alpha, sc.planner.convention);
    out.global = true;
    return out;
  }
  const RatioPolys polys = build_ratio_polys(st.belief.xhat.x, Mp, sp, m.alpha, m.dT,
                                             sc.planner.convention, AffineMap::onto(iv));
  DinkelbachOptions opt;
  opt.tol = sc.planner.dinkelbach_tol;
  opt.max_iter = sc.planner.dinkelbach_max_iter;
  opt.harvest = solvers.harvest;
  const DinkelbachResult r = dinkelbach_minimize_ratio(polys, iv, opt, solvers.sdp);
  if (solvers.outer) solvers.outer->push_back(r);
  out.x = r.x_star;
  out.ratio = r.ratio;
  out.iterations = r.iterations;
  out.global = r.global_flag;
  return out;
}

void apply(ControllerState& st, SlotDecision& dec, const Scenario& sc, const PropulsionParams& pp) {
  const double dT = sc.mission.dT;
  dec.v_applied = std::clamp(dec.v_applied, -sc.mission.v_max, sc.mission.v_max);
  st.uav.pos += dec.v_applied * dT;
  st.uav.vel = dec.v_applied;
  st.ledger.consumed += propulsion_power(dec.v_applied, pp) * dT;
  ++st.slot;
}

double stored_backup_velocity(const ControllerState& st) {
  const int k = st.slot - st.backup_first_slot;
  if (st.backup_first_slot < 1 || k < 0 ||
      k >= static_cast<int>(st.last_backup.velocities.size()))
    throw std::logic_error("no stored backup velocity for this slot");
  return st.last_backup.velocities[static_cast<size_t>(k)];
}

// Velocity that lands exactly on x_F at the end of the last slot.
double terminal_velocity(const ControllerState& st, const Scenario& sc) {
  return (sc.mission.x_F - st.uav.pos) / sc.mission.dT;
}

}  // namespace

SlotDecision proposed_step(ControllerState& st, const Scenario& sc, const Solvers& solvers) {
  const auto& m = sc.mission;
  const PropulsionParams pp = PropulsionParams::from(sc);
  SlotDecision dec;

  if (st.mode == Mode::kFallback) {
    dec.tag = ModeTag::kBackupFallback;
    dec.v_applied = st.slot == m.N ? terminal_velocity(st, sc) : stored_backup_velocity(st);
    dec.E_b = st.last_backup.E_b;
    apply(st, dec, sc, pp);
    return dec;
  }

  dec.bounds = candidate_bounds(st, sc);
  const double eta = predicted_offset(st, sc);

  if (st.slot == m.N) {
    dec.tag = ModeTag::kForcedTerminal;
    dec.v_applied = terminal_velocity(st, sc);
    dec.gate_evaluated = true;
    dec.gate_passed = feasibility_gate(st.ledger, dec.v_applied, m.dT, 0.0, pp);
    apply(st, dec, sc, pp);
    return dec;
  }

  const RatioSolve rs = solve_ratio(dec.bounds, st, sc, solvers);
  dec.dinkelbach_iterations = rs.iterations;
  dec.global_flag = rs.global;
  const double v = std::clamp((eta - rs.x) / m.dT, -m.v_max, m.v_max);
  const double x_cand = st.uav.pos + v * m.dT;
  BackupPlan backup = backup_plan(x_cand, m.x_F, m.N - st.slot, m.dT, m.v_max, pp);

  dec.gate_evaluated = true;
  dec.gate_passed = feasibility_gate(st.ledger, v, m.dT, backup.E_b, pp);
  if (dec.gate_passed) {
    dec.tag = ModeTag::kCandidate;
    dec.v_applied = v;
    dec.E_b = backup.E_b;
    st.last_backup = std::move(backup);
    st.backup_first_slot = st.slot + 1;
    apply(st, dec, sc, pp);
    return dec;
  }

  st.mode = Mode::kFallback;
  if (st.backup_first_slot != st.slot) {
    // First slot: nothing certified yet, so plan the whole remaining horizon.
    BackupPlan whole = backup_plan(st.uav.pos, m.x_F, m.N - st.slot + 1, m.dT, m.v_max, pp);
    if (st.ledger.consumed + whole.E_b > st.ledger.budget + kGateTolerance) {
      std::ostringstream msg;
      msg << "mission infeasible: minimum-energy plan needs " << whole.E_b << " J of "
          << st.ledger.budget - st.ledger.consumed << " J remaining";
      throw InfeasibleError(msg.str());
    }
    st.last_backup = std::move(whole);
    st.backup_first_slot = st.slot;
  }
  dec.tag = ModeTag::kBackupFallback;
  dec.v_applied = stored_backup_velocity(st);
  dec.E_b = st.last_backup.E_b;
  apply(st, dec, sc, pp);
  return dec;
}

SlotDecision benchmark_step(ControllerState& st, const Scenario& sc, const Solvers& solvers) {
  const auto& m = sc.mission;
  const PropulsionParams pp = PropulsionParams::from(sc);
  SlotDecision dec;

  auto direct_flight = [&]() {
    const int left = m.N - st.slot + 1;
    const double v = (m.x_F - st.uav.pos) / (left * m.dT);
    if (st.mode == Mode::kOptimizing) {
      const double need = left * propulsion_power(v, pp) * m.dT;
      if (st.ledger.consumed + need > st.ledger.budget + kGateTolerance) {
        std::ostringstream msg;
        msg << "mission infeasible: direct flight needs " << need << " J of "
            << st.ledger.budget - st.ledger.consumed << " J remaining";
        throw InfeasibleError(msg.str());
      }
    }
    st.mode = Mode::kFallback;
    dec.tag = ModeTag::kDirectFlight;
    dec.v_applied = st.slot == m.N ? terminal_velocity(st, sc) : v;
    apply(st, dec, sc, pp);
    return dec;
  };

  if (st.mode == Mode::kFallback) return direct_flight();

  dec.bounds = candidate_bounds(st, sc);
  const double eta = predicted_offset(st, sc);
  if (st.slot == m.N) {
    dec.tag = ModeTag::kForcedTerminal;
    dec.v_applied = terminal_velocity(st, sc);
    apply(st, dec, sc, pp);
    return dec;
  }

  // x = eta - v dT, so each admissible speed band maps to a mirrored pair of
  // position intervals; bands touching zero speed merge into one.
  const double remaining = st.ledger.budget - st.ledger.consumed;
  std::vector<Interval> pieces;
  for (const SpeedInterval& s : feasible_speed_intervals(std::max(remaining, 0.0), m.dT, m.v_max, pp)) {
    std::vector<Interval> raw;
    if (s.lo <= 0.0) {
      raw.push_back({eta - s.hi * m.dT, eta + s.hi * m.dT});
    } else {
      raw.push_back({eta - s.hi * m.dT, eta - s.lo * m.dT});
      raw.push_back({eta + s.lo * m.dT, eta + s.hi * m.dT});
    }
    for (const Interval& r : raw) {
      Interval cut{std::max(r.lo, dec.bounds.lo), std::min(r.hi, dec.bounds.hi)};
      // A pinned slot sits on the max-speed edge; rounding may put it just outside.
      if (cut.lo > cut.hi && cut.lo - cut.hi <= 1e-9 * (1.0 + std::abs(eta)))
        cut.lo = cut.hi = 0.5 * (cut.lo + cut.hi);
      if (cut.lo <= cut.hi) pieces.push_back(cut);
    }
  }
  if (pieces.empty()) return direct_flight();

  RatioSolve best;
  bool have = false;
  for (const Interval& piece : pieces) {
    const RatioSolve rs = solve_ratio(piece, st, sc, solvers);
    dec.dinkelbach_iterations += rs.iterations;
    if (!have || rs.ratio < best.ratio) {
      best = rs;
      have = true;
    }
  }
  dec.global_flag = best.global;
  const double v = std::clamp((eta - best.x) / m.dT, -m.v_max, m.v_max);
  const double x_cand = st.uav.pos + v * m.dT;

  const int rest = m.N - st.slot;
  const double v_df = (m.x_F - x_cand) / (rest * m.dT);
  const double reserve =
      propulsion_power(m.v_max, pp) * m.dT + rest * propulsion_power(v_df, pp) * m.dT;
  dec.gate_evaluated = true;
  dec.gate_passed = remaining > reserve;
  if (!dec.gate_passed) return direct_flight();

  dec.tag = ModeTag::kCandidate;
  dec.v_applied = v;
  apply(st, dec, sc, pp);
  return dec;
}

// ---------------------------------------------------------------------------

int EpisodeLog::turning_point() const {
  for (const auto& r : records)
    if (r.tag != ModeTag::kCandidate) return r.slot;
  return static_cast<int>(records.size()) + 1;
}

double EpisodeLog::total_energy() const {
  return records.empty() ? 0.0 : records.back().cumulative_energy;
}

double EpisodeLog::terminal_error(double x_F) const {
  return records.empty() ? 0.0 : std::abs(records.back().uav_pos - x_F);
}

double EpisodeLog::mean_weighted_actual() const {
  double s = 0.0;
  for (const auto& r : records) s += r.weighted_actual;
  return records.empty() ? 0.0 : s / static_cast<double>(records.size());
}

double EpisodeLog::energy_through(int slot) const {
  if (slot <= 0 || records.empty()) return 0.0;
  const auto k = std::min(static_cast<size_t>(slot), records.size());
  return records[k - 1].cumulative_energy;
}

namespace {

Rng stream(std::uint64_t seed, std::uint32_t which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    which};
  return Rng(seq);
}

}  // namespace

EpisodeStart episode_start(const Scenario& sc, std::uint64_t seed) {
  const auto& m = sc.mission;
  const auto& e = sc.init;
  Rng rng = stream(seed, 3);
  std::normal_distribution<double> normal;
  EpisodeStart s;
  s.truth = {m.target_x0 - m.x_I, m.v_T0};
  const double ex = normal(rng);
  const double ev = normal(rng);
  s.belief.xhat = {s.truth.x + e.perturb_x * ex, s.truth.v + e.perturb_v * ev};
  s.belief.M = Eigen::Vector2d(e.M0_x, e.M0_v).asDiagonal();
  return s;
}

EpisodeLog run_episode(const Scenario& sc, Policy policy, std::uint64_t seed,
                       const Solvers& solvers, int trial) {
  const auto& m = sc.mission;
  const PropulsionParams pp = PropulsionParams::from(sc);
  const SensingParams sp = SensingParams::from(sc);
  const Eigen::Matrix2d Qp = process_noise_cov(sc.sys.q_tilde, m.dT);

  Rng process_rng = stream(seed, 1);
  Rng meas_rng = stream(seed, 2);
  const EpisodeStart start = episode_start(sc, seed);
  RelativeState truth = start.truth;
  ControllerState st = initial_state(sc, start.belief);

  EpisodeLog log;
  log.trial = trial;
  log.policy = policy;
  log.seed = seed;
  log.records.reserve(static_cast<size_t>(m.N));

  for (int n = 1; n <= m.N; ++n) {
    const double v_prev = st.uav.vel;
    const SlotDecision dec = policy == Policy::kProposed ? proposed_step(st, sc, solvers)
                                                         : benchmark_step(st, sc, solvers);
    const double u = dec.v_applied - v_prev;

    truth = evolve_relative(truth, u, m.dT, draw_process_noise(Qp, process_rng));
    const Prediction pred = predict(st.belief, u, m.dT, Qp);
    const Eigen::Vector3d y =
        synth_measurement(truth, meas_noise_vars(truth, sc), sc.sys.H, sc.sys.lambda, meas_rng);
    st.belief = update(pred, y, meas_noise_vars(pred.xbreve, sc), sc.sys.H, sc.sys.lambda);

    SlotRecord r;
    r.trial = trial;
    r.slot = n;
    r.time = n * m.dT;
    r.policy = policy;
    r.tag = dec.tag;
    r.uav_pos = st.uav.pos;
    r.uav_vel = st.uav.vel;
    r.target_pos = st.uav.pos + truth.x;
    r.rel_x = truth.x;
    r.rel_v = truth.v;
    r.est_x = st.belief.xhat.x;
    r.est_v = st.belief.xhat.v;
    const PcrbPair pred_pcrb =
        predicted_pcrb(fisher_terms(pred.xbreve, pred.Mp, sp), sc.planner.convention);
    r.pred_pcrb_x = pred_pcrb.pcrb_x;
    r.pred_pcrb_v = pred_pcrb.pcrb_v;
    r.act_pcrb_x = st.belief.M(0, 0);
    r.act_pcrb_v = st.belief.M(1, 1);
    r.weighted_actual = weighted_objective({r.act_pcrb_x, r.act_pcrb_v}, m.alpha);
    r.slot_energy = propulsion_power(st.uav.vel, pp) * m.dT;
    r.cumulative_energy = st.ledger.consumed;
    r.E_b = dec.E_b;
    r.gate = dec.gate_evaluated ? (dec.gate_passed ? 1 : 0) : -1;
    log.records.push_back(r);
  }
  return log;
}

}  // namespace pcrbtrack
