#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "pcrbtrack/kernels.hpp"

using namespace pcrbtrack;

TEST(Kernels, GridSerialAndParallelIdentical) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> c(17), d(17);
    for (auto& v : c) v = u(rng);
    for (auto& v : d) v = u(rng);
    d[0] = 40.0;  // keeps the denominator positive on [-1, 1]
    const Polynomial p(c), q(d);
    const Interval iv{-1.0, 1.0};
    const GridArgmin a = grid_minimize(p, iv, 200001, Exec::kSerial);
    const GridArgmin b = grid_minimize(p, iv, 200001, Exec::kParallel);
    EXPECT_EQ(a.index, b.index);
    EXPECT_EQ(a.value, b.value);
    const GridArgmin ra = grid_minimize_ratio(p, q, iv, 200001, Exec::kSerial);
    const GridArgmin rb = grid_minimize_ratio(p, q, iv, 200001, Exec::kParallel);
    EXPECT_EQ(ra.index, rb.index);
    EXPECT_EQ(ra.value, rb.value);
  }
}

TEST(Kernels, GridTiesResolveToLowestIndex) {
  // A constant ties everywhere; x^2 on two nodes ties at both ends.
  const Polynomial p{1.0};
  for (Exec e : {Exec::kSerial, Exec::kParallel}) {
    const GridArgmin g = grid_minimize(p, {-1.0, 1.0}, 1001, e);
    EXPECT_EQ(g.index, 0u);
    EXPECT_EQ(g.x, -1.0);
  }
  const Polynomial sq{0.0, 0.0, 1.0};
  for (Exec e : {Exec::kSerial, Exec::kParallel})
    EXPECT_EQ(grid_minimize(sq, {-1.0, 1.0}, 2, e).index, 0u);
}

TEST(Kernels, GridEndpointsIncluded) {
  const GridArgmin g = grid_minimize({0.0, 1.0}, {2.0, 5.0}, 7, Exec::kSerial);
  EXPECT_EQ(g.x, 2.0);
  const GridArgmin h = grid_minimize({0.0, -1.0}, {2.0, 5.0}, 7, Exec::kSerial);
  EXPECT_EQ(h.x, 5.0);
  EXPECT_EQ(h.index, 6u);
}

TEST(Kernels, DpRelaxMatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const double inf = std::numeric_limits<double>::infinity();
  const int n = 400, stride = 3;
  std::vector<double> prev(n), cost(21);
  for (auto& v : prev) v = u(rng) < 2.0 ? inf : u(rng);
  for (auto& v : cost) v = std::round(u(rng));  // integers make ties likely
  const int J = 10;
  std::vector<double> ns(n), np(n), ref(n, inf);
  std::vector<int> as(n), ap(n), aref(n, -1);
  dp_relax(prev, cost, stride, ns, as, Exec::kSerial);
  dp_relax(prev, cost, stride, np, ap, Exec::kParallel);
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < 2 * J + 1; ++j) {
      const int from = s - (j - J) * stride;
      if (from < 0 || from >= n || prev[from] == inf) continue;
      const double c = prev[from] + cost[j];
      if (c < ref[s]) {
        ref[s] = c;
        aref[s] = j;
      }
    }
  EXPECT_EQ(ns, np);
  EXPECT_EQ(as, ap);
  EXPECT_EQ(ns, ref);
  EXPECT_EQ(as, aref);
}
