#include "pcrbtrack/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "pcrbtrack/dinkelbach.hpp"
#include "pcrbtrack/ekf.hpp"
#include "pcrbtrack/energy.hpp"
#include "pcrbtrack/kernels.hpp"
#include "pcrbtrack/moment_sdp.hpp"

namespace pcrbtrack {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "PASS";
    case CheckStatus::kFail: return "FAIL";
    case CheckStatus::kSkipped: return "SKIPPED";
  }
  return "?";
}

namespace {

struct Sampler {
  Rng rng;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  RelativeState state() { return {uniform(-200.0, 200.0), uniform(-20.0, 20.0)}; }
  Eigen::Matrix2d pd() {
    Eigen::Matrix2d L;
    L << uniform(0.1, 2.0), 0.0, uniform(-1.0, 1.0), uniform(0.1, 2.0);
    return L * L.transpose();
  }
};

CheckResult check(std::string name, bool ok, const std::string& detail) {
  return {std::move(name), ok ? CheckStatus::kPass : CheckStatus::kFail, detail};
}

std::string fmt(const char* label, double v) {
  std::ostringstream os;
  os << label << "=" << v;
  return os.str();
}

CheckResult power_check(const Scenario& sc) {
  const auto pp = PropulsionParams::from(sc);
  const double hover = propulsion_power(0.0, pp);
  const double vme = max_endurance_speed(pp);
  const bool ok = std::abs(hover - (pp.P0 + pp.Pi)) <= 1e-12 * hover && std::abs(vme - 10.21) <= 0.05;
  return check("power-model", ok, fmt("hover", hover) + " " + fmt("v_me", vme));
}

// Closed form against a direct 2x2 inverse of H^T Qm^-1 H + Mp^-1.
CheckResult pcrb_check(const Scenario& sc, Sampler& s, const FormulaMutation& mutation) {
  const SensingParams sp = SensingParams::from(sc);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const RelativeState xb = s.state();
    const Eigen::Matrix2d Mp = s.pd();
    const Matrix32 Hj = jacobian(xb, sp.H, sp.lambda);
    const MeasNoiseVars nv = meas_noise_vars(xb, sp.gamma_r, sp.H, sp.a1, sp.a2, sp.a3);
    const Eigen::Vector3d w(1.0 / nv.s1, 1.0 / nv.s2, 1.0 / nv.s3);
    const Eigen::Matrix2d J = Hj.transpose() * w.asDiagonal() * Hj + Mp.inverse();
    const Eigen::Matrix2d Jinv = J.inverse();
    const PcrbPair p = predicted_pcrb(fisher_terms(xb, Mp, sp, mutation));
    worst = std::max({worst, std::abs(p.pcrb_x - Jinv(0, 0)) / Jinv(0, 0),
                      std::abs(p.pcrb_v - Jinv(1, 1)) / Jinv(1, 1)});
  }
  return check("pcrb-formula", worst <= 1e-10, fmt("max_rel_err", worst));
}

CheckResult jacobian_check(const Scenario& sc, Sampler& s) {
  const double H = sc.sys.H, lambda = sc.sys.lambda;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const RelativeState xb = s.state();
    const Matrix32 J = jacobian(xb, H, lambda);
    for (int c = 0; c < 2; ++c) {
      const double h = 1e-5 * (1.0 + std::abs(c == 0 ? xb.x : xb.v));
      RelativeState up = xb, dn = xb;
      (c == 0 ? up.x : up.v) += h;
      (c == 0 ? dn.x : dn.v) -= h;
      const Eigen::Vector3d fd =
          (observables(up, H, lambda).vec() - observables(dn, H, lambda).vec()) / (2.0 * h);
      for (int r = 0; r < 3; ++r) {
        const double scale = std::max(std::abs(J(r, c)), 1e-8 * J.row(r).cwiseAbs().maxCoeff());
        if (scale == 0.0) continue;
        worst = std::max(worst, std::abs(fd(r) - J(r, c)) / scale);
      }
    }
  }
  return check("jacobian-fd", worst <= 1e-5, fmt("max_rel_err", worst));
}

// Inner problems of Dinkelbach runs on random predicted states.
std::vector<InnerProblem> sample_inner_problems(const Scenario& sc, Sampler& s, int runs) {
  const SensingParams sp = SensingParams::from(sc);
  std::vector<InnerProblem> out;
  for (int k = 0; k < runs; ++k) {
    const double xhat = s.uniform(-100.0, 100.0);
    const double c = xhat + s.uniform(-10.0, 10.0);
    const double half = s.uniform(0.5, 6.0);
    const Interval iv{c - half, c + half};
    const Eigen::Matrix2d Mp = s.pd();
    const RatioPolys rp = build_ratio_polys(xhat, Mp, sp, sc.mission.alpha, sc.mission.dT,
                                            sc.planner.convention, AffineMap::onto(iv));
    DinkelbachOptions opt;
    opt.harvest = &out;
    dinkelbach_minimize_ratio(rp, iv, opt, nullptr);
  }
  return out;
}

CheckResult grid_roots_check(const std::vector<InnerProblem>& probs) {
  double worst_dx = 0.0;
  bool ok = !probs.empty();
  for (const auto& p : probs) {
    const Minimum m = minimize_on_interval(p.C, p.iv);
    const GridArgmin g = grid_minimize(p.C, p.iv, 100001, Exec::kParallel);
    const double scale = std::max(1.0, p.C.max_abs_coeff());
    ok = ok && m.value <= g.value + 1e-12 * scale;
    worst_dx = std::max(worst_dx, std::abs(m.x - g.x) / p.iv.width());
  }
  ok = ok && worst_dx <= 1e-3;
  return check("inner-grid-vs-roots", ok,
               "problems=" + std::to_string(probs.size()) + " " + fmt("max_dx_rel", worst_dx));
}

CheckResult sdp_roots_check(const std::vector<InnerProblem>& probs, const SdpBackend* sdp) {
  if (!sdp) return {"inner-sdp-vs-roots", CheckStatus::kSkipped, "no SDP backend"};
  double worst_dx = 0.0, worst_obj = 0.0;
  int unverified = 0;
  for (const auto& p : probs) {
    const Minimum m = minimize_on_interval(p.C, p.iv);
    try {
      const MomentSdpResult r = solve_moment_sdp(p.C, p.iv, *sdp);
      if (!r.verified) ++unverified;
      worst_dx = std::max(worst_dx, std::abs(r.x_first_moment - m.x) / p.iv.width());
      const double ref = m.value - p.C[0];
      worst_obj = std::max(worst_obj, std::abs(r.objective - ref) / (1.0 + std::abs(ref)));
    } catch (const SdpFailure&) {
      ++unverified;
    }
  }
  const bool ok = unverified == 0 && worst_dx <= 1e-4 && worst_obj <= 1e-6;
  return check("inner-sdp-vs-roots", ok,
               "unverified=" + std::to_string(unverified) + " " + fmt("max_dx_rel", worst_dx) +
                   " " + fmt("max_obj_rel", worst_obj));
}

CheckResult backup_check(const Scenario& sc, Sampler& s) {
  const auto pp = PropulsionParams::from(sc);
  const double dT = sc.mission.dT, vmax = sc.mission.v_max;
  double worst = 0.0;
  bool bound_ok = true;
  for (int k = 0; k < 6; ++k) {
    const int slots = 2 + k;
    const double reach = 0.9 * slots * vmax * dT;
    const double D = k == 0 ? 0.0 : std::round(s.uniform(-reach, reach) * 100.0) / 100.0;
    const BackupPlan b = backup_plan(0.0, D, slots, dT, vmax, pp);
    const DpResult dp = dp_oracle(0.0, D, slots, dT, vmax, pp);
    worst = std::max(worst, (b.E_actual - dp.energy) / dp.energy);
    bound_ok = bound_ok && b.E_b >= b.E_actual - 1e-9;
  }
  return check("backup-sca-vs-dp", worst <= 0.01 && bound_ok,
               fmt("max_excess_rel", worst) + (bound_ok ? "" : " E_b below E_actual"));
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& opt) {
  const Scenario sc = load_scenario("");
  Sampler s{Rng(opt.seed)};
  std::vector<CheckResult> out;
  out.push_back(power_check(sc));
  out.push_back(pcrb_check(sc, s, opt.mutation));
  out.push_back(jacobian_check(sc, s));
  const auto probs = sample_inner_problems(sc, s, 8);
  out.push_back(grid_roots_check(probs));
  out.push_back(sdp_roots_check(probs, opt.sdp));
  out.push_back(backup_check(sc, s));
  return out;
}

}  // namespace pcrbtrack
