#include "pcrbtrack/kernels.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

namespace pcrbtrack {

namespace {

double node(const Interval& iv, std::size_t i, std::size_t points) {
  if (points < 2) return iv.lo;
  if (i + 1 == points) return iv.hi;
  return iv.lo + iv.width() * static_cast<double>(i) / static_cast<double>(points - 1);
}

template <class F>
GridArgmin grid_serial(F f, const Interval& iv, std::size_t points) {
  GridArgmin best{0, iv.lo, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < points; ++i) {
    const double x = node(iv, i, points);
    const double v = f(x);
    if (v < best.value) best = {i, x, v};
  }
  return best;
}

template <class F>
GridArgmin grid_parallel(F f, const Interval& iv, std::size_t points) {
  GridArgmin best{0, iv.lo, std::numeric_limits<double>::infinity()};
#pragma omp parallel
  {
    GridArgmin local{0, iv.lo, std::numeric_limits<double>::infinity()};
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double x = node(iv, ui, points);
      const double v = f(x);
      if (v < local.value) local = {ui, x, v};
    }
#pragma omp critical
    {
      if (local.value < best.value || (local.value == best.value && local.index < best.index))
        best = local;
    }
  }
  return best;
}

}  // namespace

GridArgmin grid_minimize(const Polynomial& p, const Interval& iv, std::size_t points, Exec exec) {
  auto f = [&p](double x) { return p.eval(x); };
  return exec == Exec::kSerial ? grid_serial(f, iv, points) : grid_parallel(f, iv, points);
}

GridArgmin grid_minimize_ratio(const Polynomial& num, const Polynomial& den, const Interval& iv,
                               std::size_t points, Exec exec) {
  auto f = [&](double x) { return num.eval(x) / den.eval(x); };
  return exec == Exec::kSerial ? grid_serial(f, iv, points) : grid_parallel(f, iv, points);
}

void dp_relax(std::span<const double> prev, std::span<const double> step_cost, int stride,
              std::span<double> next, std::span<int> arg, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(next.size());
  const auto choices = static_cast<std::ptrdiff_t>(step_cost.size());
  const std::ptrdiff_t half = (choices - 1) / 2;
  auto relax_one = [&](std::ptrdiff_t s) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (std::ptrdiff_t j = 0; j < choices; ++j) {
      const std::ptrdiff_t from = s - (j - half) * stride;
      if (from < 0 || from >= static_cast<std::ptrdiff_t>(prev.size())) continue;
      const double c = prev[static_cast<std::size_t>(from)] + step_cost[static_cast<std::size_t>(j)];
      if (c < best) {
        best = c;
        best_j = static_cast<int>(j);
      }
    }
    next[static_cast<std::size_t>(s)] = best;
    arg[static_cast<std::size_t>(s)] = best_j;
  };
  if (exec == Exec::kSerial) {
    for (std::ptrdiff_t s = 0; s < n; ++s) relax_one(s);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n; ++s) relax_one(s);
  }
}

}  // namespace pcrbtrack
