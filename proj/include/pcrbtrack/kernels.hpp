#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcrbtrack/polynomial.hpp"

namespace pcrbtrack {

/// Serial kernels are the reference; parallel ones must return identical
/// results (ties resolve to the lowest index in both).
enum class Exec { kSerial, kParallel };

struct GridArgmin {
  std::size_t index = 0;
  double x = 0.0;
  double value = 0.0;
};

/// Evaluates p at `points` uniformly spaced nodes of [lo, hi] (endpoints
/// included) and returns the smallest value.
GridArgmin grid_minimize(const Polynomial& p, const Interval& iv, std::size_t points, Exec exec);

/// Same for num(x) / den(x).
GridArgmin grid_minimize_ratio(const Polynomial& num, const Polynomial& den, const Interval& iv,
                               std::size_t points, Exec exec);

/// One forward step of the displacement DP:
///   next[s] = min_j prev[s - j * stride] + step_cost[j],   j in [0, step_cost.size())
/// where j indexes velocities from -J..J (offset by J). `arg[s]` receives the
/// minimizing j, or -1 when no predecessor is finite.
void dp_relax(std::span<const double> prev, std::span<const double> step_cost, int stride,
              std::span<double> next, std::span<int> arg, Exec exec);

}  // namespace pcrbtrack
