#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pcrbtrack/ekf.hpp"

using namespace pcrbtrack;

namespace {

constexpr double kH = 50.0;
constexpr double kLambda = 0.01;

Eigen::Matrix2d random_pd(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix2d A;
  A << u(rng), u(rng), u(rng), u(rng);
  return A * A.transpose() + 0.05 * Eigen::Matrix2d::Identity();
}

double rel_diff(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Ekf, PredictZeroUncertaintyGivesProcessNoise) {
  const Eigen::Matrix2d Q = process_noise_cov(1.0, 0.2);
  Belief b;
  b.xhat = {10.0, 2.0};
  b.M.setZero();
  const Prediction p = predict(b, 0.0, 0.2, Q);
  EXPECT_NEAR((p.Mp - Q).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(p.xbreve.x, 10.4, 1e-12);
  EXPECT_NEAR(p.xbreve.v, 2.0, 1e-12);
}

TEST(Ekf, PredictIdentityCovariance) {
  const Eigen::Matrix2d Q = process_noise_cov(1.0, 0.2);
  Belief b;
  const Prediction p = predict(b, 0.0, 0.2, Q);
  Eigen::Matrix2d expect;
  expect << 1.04, 0.2, 0.2, 1.0;
  expect += Q;
  EXPECT_NEAR((p.Mp - expect).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Ekf, PredictAppliesInput) {
  Belief b;
  b.xhat = {10.0, 2.0};
  const Prediction p = predict(b, 1.0, 0.2, process_noise_cov(1.0, 0.2));
  EXPECT_NEAR(p.xbreve.x, 10.2, 1e-12);
  EXPECT_NEAR(p.xbreve.v, 1.0, 1e-12);
}

TEST(Ekf, JacobianAtBoresight) {
  const Matrix32 J = jacobian({0.0, 6.0}, kH, kLambda);
  EXPECT_NEAR(J(0, 0), -1.0 / kH, 1e-15);
  EXPECT_EQ(J(1, 0), 0.0);
  EXPECT_NEAR(J(2, 0), -2.0 * 6.0 / (kLambda * kH), 1e-9);
  EXPECT_EQ(J.col(1), Eigen::Vector3d::Zero());
}

TEST(Ekf, JacobianRangeDerivativeAt45Degrees) {
  EXPECT_NEAR(jacobian({50.0, 0.0}, kH, kLambda)(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Ekf, JacobianMatchesCentralDifferences) {
  const RelativeState xb{37.0, -4.0};
  const Matrix32 J = jacobian(xb, kH, kLambda);
  const double h = 1e-4;
  for (int c = 0; c < 2; ++c) {
    RelativeState up = xb, dn = xb;
    (c == 0 ? up.x : up.v) += h;
    (c == 0 ? dn.x : dn.v) -= h;
    const Eigen::Vector3d fd =
        (observables(up, kH, kLambda).vec() - observables(dn, kH, kLambda).vec()) / (2 * h);
    for (int r = 0; r < 3; ++r) {
      if (J(r, c) == 0.0)
        EXPECT_NEAR(fd(r), 0.0, 1e-9);
      else
        EXPECT_NEAR(fd(r), J(r, c), 1e-5 * std::abs(J(r, c))) << r << "," << c;
    }
  }
}

TEST(Ekf, ZeroInnovationKeepsPrediction) {
  Prediction p;
  p.xbreve = {25.0, -3.0};
  p.Mp << 0.5, 0.1, 0.1, 0.3;
  const Eigen::Vector3d y = observables(p.xbreve, kH, kLambda).vec();
  const Belief b = update(p, y, {1e-4, 1e-2, 10.0}, kH, kLambda);
  EXPECT_NEAR(b.xhat.x, p.xbreve.x, 1e-12);
  EXPECT_NEAR(b.xhat.v, p.xbreve.v, 1e-12);
}

TEST(Ekf, UninformativeMeasurementKeepsCovariance) {
  Prediction p;
  p.xbreve = {25.0, -3.0};
  p.Mp << 0.5, 0.1, 0.1, 0.3;
  const MeasNoiseVars v{1e-4 * 1e12, 1e-2 * 1e12, 10.0 * 1e12};
  const Belief b = update(p, observables(p.xbreve, kH, kLambda).vec(), v, kH, kLambda);
  EXPECT_LT(rel_diff(b.M, p.Mp), 1e-6);
}

TEST(Ekf, InformationAndGainFormsAgree) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    Prediction p;
    p.xbreve = {30.0, 5.0};
    p.Mp = random_pd(rng);
    const MeasNoiseVars v{1e-5, 2e-2, 40.0};
    const Belief b = update(p, observables(p.xbreve, kH, kLambda).vec(), v, kH, kLambda);
    EXPECT_LT(rel_diff(b.M, gain_form_cov(p, v, kH, kLambda)), 1e-8);
  }
}

TEST(Ekf, UpdateNeverIncreasesUncertainty) {
  Rng rng(8);
  std::uniform_real_distribution<double> ux(-150.0, 150.0);
  for (int k = 0; k < 200; ++k) {
    Prediction p;
    p.xbreve = {ux(rng), ux(rng) / 10.0};
    p.Mp = random_pd(rng);
    const MeasNoiseVars v{1e-4, 5e-2, 30.0};
    const Belief b = update(p, observables(p.xbreve, kH, kLambda).vec(), v, kH, kLambda);
    EXPECT_NEAR(b.M(0, 1), b.M(1, 0), 1e-12 * b.M.norm());
    const Eigen::Matrix2d diff = p.Mp - b.M;
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(diff).eigenvalues().minCoeff();
    EXPECT_GE(lmin, -1e-12 * p.Mp.norm());
  }
}

TEST(Ekf, RejectsNonPositiveVariances) {
  Prediction p;
  EXPECT_THROW(update(p, Eigen::Vector3d::Zero(), {0.0, 1.0, 1.0}, kH, kLambda), NumericalError);
}

TEST(Ekf, SingularInverseThrows) {
  EXPECT_THROW(inverse2(Eigen::Matrix2d::Zero()), NumericalError);
}

TEST(Ekf, PredictUpdateIsDeterministic) {
  Belief b;
  b.xhat = {40.0, -2.0};
  const Eigen::Matrix2d Q = process_noise_cov(1.0, 0.2);
  const Eigen::Vector3d y(1.0, 60.0, 100.0);
  const MeasNoiseVars v{1e-4, 1e-2, 10.0};
  const Belief a = update(predict(b, 0.5, 0.2, Q), y, v, kH, kLambda);
  const Belief c = update(predict(b, 0.5, 0.2, Q), y, v, kH, kLambda);
  EXPECT_EQ(a.xhat, c.xhat);
  EXPECT_EQ(a.M, c.M);
}
