#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pcrbtrack/kernels.hpp"
#include "pcrbtrack/polynomial.hpp"

using namespace pcrbtrack;

namespace {

Polynomial random_poly(std::mt19937_64& rng, int degree, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> c(static_cast<size_t>(degree + 1));
  for (auto& v : c) v = u(rng);
  return Polynomial(c);
}

// Dense grid followed by trisection on the bracket around the best node.
Minimum grid_trisect(const Polynomial& p, const Interval& iv) {
  const std::size_t n = 1000001;
  const GridArgmin g = grid_minimize(p, iv, n, Exec::kSerial);
  const double h = iv.width() / static_cast<double>(n - 1);
  double a = std::max(iv.lo, g.x - h), b = std::min(iv.hi, g.x + h);
  for (int k = 0; k < 200 && b - a > 1e-15; ++k) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (p.eval(m1) <= p.eval(m2))
      b = m2;
    else
      a = m1;
  }
  const double x = 0.5 * (a + b);
  return {x, p.eval(x)};
}

}  // namespace

TEST(Polynomial, Arithmetic) {
  EXPECT_EQ(Polynomial({0.0, -2.0, 1.0}).derivative(), Polynomial({-2.0, 2.0}));
  EXPECT_EQ(Polynomial({0.0, 0.0, 1.0}).compose_affine(2.0, 1.0), Polynomial({1.0, 4.0, 4.0}));
  EXPECT_EQ(Polynomial({1.0, 1.0}) * Polynomial({-1.0, 1.0}), Polynomial({-1.0, 0.0, 1.0}));
  EXPECT_EQ(Polynomial({1.0, 2.0, 0.0, 0.0}).degree(), 1);
  EXPECT_TRUE(Polynomial({0.0}).is_zero());
  EXPECT_EQ(Polynomial({2.0, 3.0}).pow(2), Polynomial({4.0, 12.0, 9.0}));
  EXPECT_EQ(Polynomial({1.0, 2.0, 3.0})[5], 0.0);
}

TEST(Polynomial, HornerEvaluation) {
  const Polynomial p{1.0, -3.0, 0.5, 2.0};
  for (double x : {-2.0, 0.0, 0.7, 3.0})
    EXPECT_NEAR(p.eval(x), 1.0 - 3.0 * x + 0.5 * x * x + 2.0 * x * x * x, 1e-13);
}

TEST(Polynomial, DegreeOverflowThrows) {
  const Polynomial x17 = Polynomial({0.0, 1.0}).pow(17);
  EXPECT_THROW(x17 * x17, std::length_error);
  std::vector<double> c(34, 1.0);
  EXPECT_THROW(Polynomial{c}, std::length_error);
}

TEST(Polynomial, RealRootsInUnitInterval) {
  const Polynomial p = Polynomial({-0.5, 1.0}) * Polynomial({0.3, 1.0}) * Polynomial({1.0, 0.0, 1.0});
  auto r = real_roots_in_unit_interval(p);
  std::sort(r.begin(), r.end());
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], -0.3, 1e-12);
  EXPECT_NEAR(r[1], 0.5, 1e-12);
}

TEST(Polynomial, MinimizeVertexInside) {
  const Minimum m = minimize_on_interval({0.0, -2.0, 1.0}, {0.0, 3.0});
  EXPECT_NEAR(m.x, 1.0, 1e-12);
  EXPECT_NEAR(m.value, -1.0, 1e-12);
}

TEST(Polynomial, MinimizeEndpointActive) {
  const Minimum m = minimize_on_interval({0.0, -2.0, 1.0}, {2.0, 3.0});
  EXPECT_EQ(m.x, 2.0);
  EXPECT_NEAR(m.value, 0.0, 1e-12);
}

TEST(Polynomial, MinimizeDegenerateInterval) {
  const Minimum m = minimize_on_interval({1.0, 1.0, 1.0}, {2.0, 2.0});
  EXPECT_EQ(m.x, 2.0);
  EXPECT_EQ(m.value, 7.0);
}

TEST(Polynomial, MinimizeAgreesWithDenseGrid) {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 200; ++seed) {
    const Polynomial p = random_poly(rng, 16);
    const Interval iv{-1.0, 1.0};
    const Minimum m = minimize_on_interval(p, iv);
    const Minimum g = grid_trisect(p, iv);
    EXPECT_LE(std::abs(m.x - g.x), 1e-6) << "seed " << seed;
    EXPECT_LE(std::abs(m.value - g.value), 1e-9 * (1.0 + std::abs(g.value))) << "seed " << seed;
  }
}

TEST(Polynomial, NormalizationInvariance) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> uc(-5.0, 5.0), uw(0.5, 4.0);
  for (int k = 0; k < 100; ++k) {
    const Polynomial p = random_poly(rng, 8, 1e3);
    const double c = uc(rng), w = uw(rng);
    const Interval iv{c - w, c + w};
    const Minimum a = minimize_on_interval(p, iv);
    const Minimum b = minimize_on_interval_unnormalized(p, iv);
    EXPECT_LE(std::abs(a.x - b.x), 1e-8 * iv.width()) << k;
  }
}

TEST(Polynomial, AffineMapRoundTrip) {
  const AffineMap m = AffineMap::onto({40.0, 52.0});
  EXPECT_EQ(m.to_x(-1.0), 40.0);
  EXPECT_EQ(m.to_x(1.0), 52.0);
  EXPECT_NEAR(m.to_u(m.to_x(0.3)), 0.3, 1e-15);
}
