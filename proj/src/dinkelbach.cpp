#include "pcrbtrack/dinkelbach.hpp"

#include <cmath>
#include <sstream>

#include "pcrbtrack/ekf.hpp"

namespace pcrbtrack {

namespace {

void check_positive_on_grid(const RatioPolys& polys, const Interval& iu) {
  constexpr int kGrid = 1000;
  for (int i = 0; i < kGrid; ++i) {
    const double u = iu.lo + iu.width() * i / (kGrid - 1);
    const double a = polys.A.eval(u);
    const double b = polys.B.eval(u);
    if (!(a > 0.0) || !(b > 0.0)) {
      std::ostringstream msg;
      msg << "ratio polynomials not positive on the interval (A=" << a << ", B=" << b
          << " at x=" << polys.map.to_x(u) << ")";
      throw NumericalError(msg.str());
    }
  }
}

bool sufficient_condition(const RatioPolys& polys, const Interval& iu) {
  constexpr int kGrid = 64;
  const Polynomial a2 = polys.A.derivative().derivative();
  const Polynomial b2 = polys.B.derivative().derivative();
  for (int i = 0; i < kGrid; ++i) {
    const double u = iu.lo + iu.width() * i / (kGrid - 1);
    if (a2.eval(u) > 0.0 || b2.eval(u) < 0.0) return false;
  }
  return true;
}

}  // namespace

DinkelbachResult dinkelbach_minimize_ratio(const RatioPolys& polys, const Interval& iv,
                                           const DinkelbachOptions& opt, const SdpBackend* sdp) {
  if (!(iv.lo <= iv.hi)) throw std::invalid_argument("dinkelbach: empty interval");
  const Interval iu{polys.map.to_u(iv.lo), polys.map.to_u(iv.hi)};

  DinkelbachResult res;
  auto ratio_ab = [&](double u) { return polys.A.eval(u) / polys.B.eval(u); };

  if (iv.lo == iv.hi) {
    res.x_star = iv.lo;
    res.ratio = 1.0 / ratio_ab(iu.lo);
    res.zeta_trace = {ratio_ab(iu.lo)};
    res.global_flag = true;
    return res;
  }
  check_positive_on_grid(polys, iu);
  res.global_flag = sufficient_condition(polys, iu);

  double u_best = iu.lo + 0.5 * iu.width();
  double zeta = ratio_ab(u_best);
  if (!std::isfinite(zeta)) throw NumericalError("dinkelbach: non-finite initial ratio");
  res.zeta_trace.push_back(zeta);

  for (int k = 0; k < opt.max_iter; ++k) {
    const Polynomial C = zeta * polys.B - polys.A;
    if (opt.harvest) opt.harvest->push_back({C, iu});

    double u_k;
    if (sdp) {
      ++res.sdp_solves;
      try {
        const MomentSdpResult m = solve_moment_sdp(C, iu, *sdp);
        if (!m.verified) ++res.sdp_fallbacks;
        u_k = m.x_star;
      } catch (const SdpFailure&) {
        ++res.sdp_fallbacks;
        u_k = minimize_on_interval(C, iu).x;
      }
    } else {
      u_k = minimize_on_interval(C, iu).x;
    }
    ++res.iterations;

    const double next = ratio_ab(u_k);
    if (!std::isfinite(next)) throw NumericalError("dinkelbach: non-finite ratio");
    const double step_tol = opt.tol * (1.0 + std::abs(zeta));
    if (next < zeta - step_tol) {
      std::ostringstream msg;
      msg << "dinkelbach: ratio decreased from " << zeta << " to " << next
          << " (inner solver failure)";
      throw NumericalError(msg.str());
    }
    if (next <= zeta) break;  // no improvement within tolerance; keep previous point
    u_best = u_k;
    const double prev = zeta;
    zeta = next;
    res.zeta_trace.push_back(zeta);
    if (zeta - prev <= step_tol) break;
  }

  res.x_star = iv.clamp(polys.map.to_x(u_best));
  res.ratio = 1.0 / zeta;
  return res;
}

}  // namespace pcrbtrack
