#pragma once

#include <vector>

#include "pcrbtrack/moment_sdp.hpp"
#include "pcrbtrack/pcrb.hpp"
#include "pcrbtrack/polynomial.hpp"
#include "pcrbtrack/sdp.hpp"

namespace pcrbtrack {

/// One parametric subproblem min_u C(u) over [lo, hi] as seen by the inner
/// solver (u is the normalized variable of the RatioPolys).
struct InnerProblem {
  Polynomial C;
  Interval iv;
};

struct DinkelbachOptions {
  double tol = 1e-9;
  int max_iter = 50;
  /// When non-null, every inner problem is appended here (for offline checks).
  std::vector<InnerProblem>* harvest = nullptr;
};

struct DinkelbachResult {
  double x_star = 0.0;
  double ratio = 0.0;  // B/A at x_star: the weighted predicted PCRB
  std::vector<double> zeta_trace;
  bool global_flag = false;  // A concave and B convex on the interval
  int iterations = 0;
  int sdp_solves = 0;
  int sdp_fallbacks = 0;  // inner solves answered by the root-finding oracle
};

/// Minimizes B/A over `iv` (in x) by Dinkelbach's transform: maximize A/B via
/// C_k = -A + zeta_k B, zeta_{k+1} = A(x_k)/B(x_k), starting at the midpoint.
/// Inner problems go to the moment SDP when `sdp` is non-null, with the
/// root-finding minimizer as fallback; with a null backend only the oracle
/// is used. Throws NumericalError on non-finite zeta, non-positive A or B on
/// the interval, or a decreasing zeta trace.
DinkelbachResult dinkelbach_minimize_ratio(const RatioPolys& polys, const Interval& iv,
                                           const DinkelbachOptions& opt, const SdpBackend* sdp);

}  // namespace pcrbtrack
