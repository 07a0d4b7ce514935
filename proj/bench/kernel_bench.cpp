// Serial reference kernels against their OpenMP versions.
#include <vector>

#include <benchmark/benchmark.h>

#include "pcrbtrack/energy.hpp"
#include "pcrbtrack/kernels.hpp"
#include "pcrbtrack/pcrb.hpp"

using namespace pcrbtrack;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::kParallel : Exec::kSerial; }

// A degree-16 ratio shaped like the planner's objective.
const RatioPolys& sample_ratio() {
  static const RatioPolys rp = [] {
    const Scenario sc = load_scenario("");
    const Interval iv{40.0, 52.0};
    return build_ratio_polys(45.0, Eigen::Matrix2d::Identity() * 0.05, SensingParams::from(sc),
                             0.5, 0.2, PcrbConvention::kMatrixConsistent, AffineMap::onto(iv));
  }();
  return rp;
}

void BM_GridRatio(benchmark::State& st) {
  const auto& rp = sample_ratio();
  const auto points = static_cast<std::size_t>(st.range(1));
  for (auto _ : st)
    benchmark::DoNotOptimize(grid_minimize_ratio(rp.B, rp.A, {-1.0, 1.0}, points, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(points));
}
BENCHMARK(BM_GridRatio)->ArgsProduct({{0, 1}, {100000, 1000000}})->Unit(benchmark::kMillisecond);

void BM_DpRelax(benchmark::State& st) {
  const int states = static_cast<int>(st.range(1));
  std::vector<double> prev(static_cast<size_t>(states), 0.0), next(prev.size());
  std::vector<int> arg(prev.size());
  std::vector<double> cost(1201);
  for (size_t j = 0; j < cost.size(); ++j) cost[j] = 1.0 + 1e-3 * static_cast<double>(j % 37);
  for (auto _ : st) {
    dp_relax(prev, cost, 1, next, arg, exec_of(st));
    benchmark::DoNotOptimize(next.data());
  }
}
BENCHMARK(BM_DpRelax)->ArgsProduct({{0, 1}, {6000, 12000}})->Unit(benchmark::kMillisecond);

void BM_DpOracle(benchmark::State& st) {
  const PropulsionParams pp;
  for (auto _ : st) benchmark::DoNotOptimize(dp_oracle(0.0, 12.34, 8, 0.2, 30.0, pp, {}, exec_of(st)));
}
BENCHMARK(BM_DpOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
