// Acceptance run: one PASS/FAIL line per criterion, with its wall time and
// budget. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pcrbtrack/controller.hpp"
#include "pcrbtrack/harness.hpp"
#include "pcrbtrack/kernels.hpp"

using namespace pcrbtrack;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Timed {
  Verdict v;
  double seconds = 0.0;
};

Timed timed(const std::function<Verdict()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.v = f();
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

int failures = 0;

void report(int id, const char* name, const Timed& t, double limit_s) {
  const bool ok = t.v.pass && t.seconds < limit_s;
  if (!ok) ++failures;
  std::printf("%s criterion %d %s: %s [%.2f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", id, name,
              t.v.detail.c_str(), t.seconds, limit_s);
  std::fflush(stdout);
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

const Scenario& base() {
  static const Scenario sc = load_scenario("");
  return sc;
}

Scenario with_budget(double E) {
  return with_override(base(), "E_tot", E);
}

// ---------------------------------------------------------------------------

Verdict hover_power() {
  const PropulsionParams pp = PropulsionParams::from(base());
  const double hover = propulsion_power(0.0, pp);
  // Independent argmin: dense scan of the power curve.
  double best_v = 0.0, best_p = hover;
  for (int i = 0; i <= 300000; ++i) {
    const double v = i * 1e-4;
    const double p = propulsion_power_direct(v, pp);
    if (p < best_p) {
      best_p = p;
      best_v = v;
    }
  }
  const bool ok = hover == pp.P0 + pp.Pi && std::abs(hover - 168.4842) <= 1e-12 &&
                  std::abs(best_v - 10.21) <= 0.05;
  return {ok, fmt("P(0) = %.10f W, argmin P = %.4f m/s", hover, best_v)};
}

Eigen::Matrix2d random_pd(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix2d A;
  A << u(rng), u(rng), u(rng), u(rng);
  return A * A.transpose() + 0.05 * Eigen::Matrix2d::Identity();
}

Verdict pcrb_formula() {
  const SensingParams p = SensingParams::from(base());
  Rng rng(1001);
  std::uniform_real_distribution<double> ux(-200.0, 200.0), uv(-20.0, 20.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const RelativeState xb{ux(rng), uv(rng)};
    const Eigen::Matrix2d Mp = random_pd(rng);
    const Matrix32 Hj = jacobian(xb, p.H, p.lambda);
    const MeasNoiseVars nv = meas_noise_vars(xb, p.gamma_r, p.H, p.a1, p.a2, p.a3);
    const Eigen::Vector3d w(1 / nv.s1, 1 / nv.s2, 1 / nv.s3);
    const Eigen::Matrix2d J = Hj.transpose() * w.asDiagonal() * Hj + Mp.inverse();
    const Eigen::Matrix2d Jinv = J.inverse();
    const PcrbPair c = predicted_pcrb(fisher_terms(xb, Mp, p));
    worst = std::max({worst, std::abs(c.pcrb_x - Jinv(0, 0)) / Jinv(0, 0),
                      std::abs(c.pcrb_v - Jinv(1, 1)) / Jinv(1, 1)});
  }
  return {worst <= 1e-10, fmt("1000 states, worst relative error %.3g", worst)};
}

Verdict jacobian_fd() {
  const auto& s = base().sys;
  Rng rng(303);
  std::uniform_real_distribution<double> ux(-200.0, 200.0), uv(-20.0, 20.0);
  double worst = 0.0;
  bool zeros_ok = true;
  const double h = 1e-4;
  for (int k = 0; k < 100; ++k) {
    const RelativeState xb{ux(rng), uv(rng)};
    const Matrix32 J = jacobian(xb, s.H, s.lambda);
    for (int c = 0; c < 2; ++c) {
      RelativeState up = xb, dn = xb;
      (c == 0 ? up.x : up.v) += h;
      (c == 0 ? dn.x : dn.v) -= h;
      const Eigen::Vector3d fd =
          (observables(up, s.H, s.lambda).vec() - observables(dn, s.H, s.lambda).vec()) / (2 * h);
      for (int r = 0; r < 3; ++r) {
        if (J(r, c) == 0.0)
          zeros_ok = zeros_ok && std::abs(fd(r)) <= 1e-9;
        else
          worst = std::max(worst, std::abs(fd(r) - J(r, c)) / std::abs(J(r, c)));
      }
    }
  }
  return {zeros_ok && worst <= 1e-5, fmt("100 states, worst relative error %.3g", worst)};
}

Verdict optimizer_agreement() {
  const PrimalDualSdpSolver sdp;
  std::vector<InnerProblem> harvest;
  std::vector<DinkelbachResult> outer;
  Solvers solvers{&sdp, &harvest, &outer};
  // Live episodes under both budgets and both policies.
  int episodes = 0;
  for (std::uint64_t seed = 1; harvest.size() < 100 || episodes < 4; ++seed) {
    for (double E : {1600.0, 1800.0}) {
      const Scenario sc = with_budget(E);
      run_episode(sc, Policy::kProposed, seed, solvers);
      run_episode(sc, Policy::kBenchmark, seed, solvers);
      episodes += 2;
    }
  }
  int bad_x = 0, bad_obj = 0, unverified = 0;
  double worst_dx = 0.0, worst_obj = 0.0;
  for (const InnerProblem& ip : harvest) {
    const Minimum root = minimize_on_interval(ip.C, ip.iv);
    const GridArgmin grid = grid_minimize(ip.C, ip.iv, 1000001, Exec::kParallel);
    const MomentSdpResult m = solve_moment_sdp(ip.C, ip.iv, sdp);
    if (!m.verified) ++unverified;
    const double w = ip.iv.width();
    const double dx = std::max(std::abs(m.x_star - root.x), std::abs(grid.x - root.x)) / w;
    const double c0 = ip.C[0];
    const double ref = root.value;
    const double tol = 1e-6 * (1.0 + std::abs(ref));
    const double dobj = std::max({std::abs(m.objective + c0 - ref), std::abs(ip.C.eval(m.x_star) - ref),
                                  std::abs(grid.value - ref)});
    worst_dx = std::max(worst_dx, dx);
    worst_obj = std::max(worst_obj, dobj / (1.0 + std::abs(ref)));
    if (dx > 1e-4) ++bad_x;
    if (dobj > tol) ++bad_obj;
  }
  int bad_trace = 0, max_iter = 0;
  for (const DinkelbachResult& r : outer) {
    max_iter = std::max(max_iter, r.iterations);
    for (size_t k = 1; k < r.zeta_trace.size(); ++k)
      if (r.zeta_trace[k] < r.zeta_trace[k - 1]) {
        ++bad_trace;
        break;
      }
  }
  const bool ok = harvest.size() >= 100 && bad_x == 0 && bad_obj == 0 && unverified == 0 &&
                  bad_trace == 0 && max_iter <= 50;
  return {ok, fmt("%zu inner problems from %d episodes: worst |dx|/width %.2g, worst objective "
                  "%.2g, %d unverified; %zu outer solves, max %d iterations, %d decreasing traces",
                  harvest.size(), episodes, worst_dx, worst_obj, unverified, outer.size(), max_iter,
                  bad_trace)};
}

Verdict backup_vs_dp() {
  const PropulsionParams pp = PropulsionParams::from(base());
  const auto& m = base().mission;
  Rng rng(505);
  int worse = 0, bound_broken = 0, zero_cases = 0, beats_hover = 0;
  double worst_gap = -1.0;
  for (int k = 0; k < 50; ++k) {
    const int slots = 1 + static_cast<int>(rng() % 10);
    const double reach = slots * m.v_max * m.dT;
    double D = 0.0;
    if (k % 5 != 0)
      D = std::round(std::uniform_real_distribution<double>(-reach, reach)(rng) * 100.0) / 100.0;
    const BackupPlan b = backup_plan(0.0, D, slots, m.dT, m.v_max, pp);
    const DpResult dp = dp_oracle(0.0, D, slots, m.dT, m.v_max, pp);
    const double gap = (b.E_actual - dp.energy) / dp.energy;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 0.01) ++worse;
    if (b.E_b < b.E_actual) ++bound_broken;
    if (D == 0.0) {
      ++zero_cases;
      if (dp.energy < slots * propulsion_power(0.0, pp) * m.dT) ++beats_hover;
    }
  }
  return {worse == 0 && bound_broken == 0,
          fmt("50 instances (%d zero-displacement, optimum below hover in %d): worst SCA excess "
              "over DP %.3f%%, E_b < E_actual in %d",
              zero_cases, beats_hover, 100.0 * worst_gap, bound_broken)};
}

// Episodes shared by the safety and trend criteria.
struct Campaign {
  std::map<double, std::vector<EpisodeLog>> logs;  // budget -> trial-major, proposed first
  double seconds = 0.0;
};

const Campaign& campaign() {
  static const Campaign c = [] {
    Campaign out;
    const auto t0 = std::chrono::steady_clock::now();
    const PrimalDualSdpSolver sdp;
    for (double E : {1600.0, 1800.0}) {
      BatchOptions opt;
      opt.trials = 100;
      opt.seed = 2024;
      opt.jobs = effective_jobs(1);
      opt.sdp = &sdp;
      out.logs[E] = run_batch(with_budget(E), opt);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return c;
}

Verdict episode_safety() {
  const auto& m = base().mission;
  int bad_terminal = 0, bad_energy = 0, episodes = 0;
  double worst_err = 0.0, worst_excess = -1e300;
  for (const auto& [E, logs] : campaign().logs) {
    for (const EpisodeLog& log : logs) {
      ++episodes;
      const double err = log.terminal_error(m.x_F);
      worst_err = std::max(worst_err, err);
      worst_excess = std::max(worst_excess, log.total_energy() - E);
      if (err > 1e-6) ++bad_terminal;
      if (log.total_energy() > E + 1e-9) ++bad_energy;
    }
  }
  return {bad_terminal == 0 && bad_energy == 0 && episodes == 400,
          fmt("%d episodes: worst terminal error %.3g m, largest energy minus budget %.3f J",
              episodes, worst_err, worst_excess)};
}

struct PolicyPair {
  const EpisodeLog* p;
  const EpisodeLog* b;
};

std::vector<PolicyPair> pairs(const std::vector<EpisodeLog>& logs) {
  std::vector<PolicyPair> out;
  for (size_t i = 0; i + 1 < logs.size(); i += 2) out.push_back({&logs[i], &logs[i + 1]});
  return out;
}

Verdict trends() {
  const auto& c = campaign();
  const auto& m = base().mission;
  std::map<double, double> turn_mean;
  std::map<double, int> lower_energy;
  std::map<double, int> n_pairs;
  double w_p = 0.0, w_b = 0.0;
  for (const auto& [E, logs] : c.logs) {
    const RunSummary s = summarize(logs, m.x_F);
    double t = 0.0;
    int n = 0;
    for (const auto& ps : s.policies) {
      t += ps.turning_point_mean * ps.trials;
      n += ps.trials;
    }
    turn_mean[E] = t / n;
    if (E == 1800.0) {
      w_p = s.policies[0].mean_weighted_actual;
      w_b = s.policies[1].mean_weighted_actual;
    }
    for (const PolicyPair& pp : pairs(logs)) {
      if (pp.p->policy != Policy::kProposed || pp.b->policy != Policy::kBenchmark)
        return {false, "unexpected batch order"};
      // Energy spent before the proposed policy turns.
      const int k = pp.p->turning_point() - 1;
      if (pp.p->energy_through(k) < pp.b->energy_through(k)) ++lower_energy[E];
      ++n_pairs[E];
    }
  }
  const bool a = turn_mean[1600.0] < turn_mean[1800.0];
  const bool b = w_p < w_b && n_pairs[1800.0] >= 20;
  bool cc = true;
  for (const auto& [E, n] : n_pairs) cc = cc && 2 * lower_energy[E] > n;
  return {a && b && cc,
          fmt("(a) %s mean turning point %.2f at 1.6 kJ vs %.2f at 1.8 kJ; (b) %s weighted PCRB "
              "%.5g proposed vs %.5g benchmark over %d pairs; (c) %s proposed spends less before "
              "its turning point in %d/%d pairs at 1.6 kJ and %d/%d at 1.8 kJ",
              a ? "ok" : "NOT MET", turn_mean[1600.0], turn_mean[1800.0], b ? "ok" : "NOT MET",
              w_p, w_b, n_pairs[1800.0], cc ? "ok" : "NOT MET", lower_energy[1600.0],
              n_pairs[1600.0], lower_energy[1800.0], n_pairs[1800.0])};
}

Verdict ekf_consistency() {
  const Scenario& sc = base();
  const int N = sc.mission.N, trials = 500;
  std::vector<double> se(static_cast<size_t>(N) + 1, 0.0), m11(static_cast<size_t>(N) + 1, 0.0);
  BatchOptions opt;
  opt.policies = {Policy::kProposed};
  opt.trials = trials;
  opt.seed = 8;
  opt.jobs = effective_jobs(1);
  for (const EpisodeLog& log : run_batch(sc, opt))
    for (const SlotRecord& r : log.records) {
      se[static_cast<size_t>(r.slot)] += (r.est_x - r.rel_x) * (r.est_x - r.rel_x);
      m11[static_cast<size_t>(r.slot)] += r.act_pcrb_x;
    }
  double lo = 1e300, hi = 0.0;
  for (int n = 11; n <= N; ++n) {
    const double ratio = se[static_cast<size_t>(n)] / m11[static_cast<size_t>(n)];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo >= 0.5 && hi <= 2.0,
          fmt("%d trials, slots 11..%d: MSE / mean M11 between %.3f and %.3f", trials, N, lo, hi)};
}

}  // namespace

int main() {
  report(1, "hover-power", timed(hover_power), 1);
  report(2, "pcrb-formula", timed(pcrb_formula), 5);
  report(3, "jacobian", timed(jacobian_fd), 1);
  report(4, "optimizer-agreement", timed(optimizer_agreement), 120);
  report(5, "backup-planner", timed(backup_vs_dp), 120);
  // Both lines use the same 400 episodes and both are charged their full cost.
  report(6, "episode-safety", timed(episode_safety), 600);
  Timed trend = timed(trends);
  trend.seconds += campaign().seconds;
  report(7, "trend-reproduction", trend, 600);
  report(8, "ekf-consistency", timed(ekf_consistency), 300);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
