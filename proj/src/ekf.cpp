#include "pcrbtrack/ekf.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace pcrbtrack {

Eigen::Matrix2d inverse2(const Eigen::Matrix2d& A) {
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  if (!(std::abs(det) > 1e-300)) throw NumericalError("2x2 matrix is singular", 0.0);
  Eigen::Matrix2d inv;
  inv << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  return inv / det;
}

Prediction predict(const Belief& prev, double u_delta_v, double dT, const Eigen::Matrix2d& Qp) {
  const Eigen::Matrix2d G = transition(dT);
  Prediction p;
  p.xbreve = RelativeState::from(G * prev.xhat.vec() - Eigen::Vector2d(u_delta_v * dT, u_delta_v));
  p.Mp = G * prev.M * G.transpose() + Qp;
  p.Mp = 0.5 * (p.Mp + p.Mp.transpose());
  return p;
}

Matrix32 jacobian(const RelativeState& xb, double H, double lambda) {
  const double d2 = H * H + xb.x * xb.x;
  const double d = std::sqrt(d2);
  Matrix32 J;
  J(0, 0) = -H / d2;
  J(1, 0) = xb.x / d;
  J(2, 0) = -2.0 * xb.v * H * H / (lambda * d2 * d);
  J(0, 1) = 0.0;
  J(1, 1) = 0.0;
  J(2, 1) = -2.0 * xb.x / (lambda * d);
  return J;
}

namespace {

Eigen::Matrix3d meas_cov(const MeasNoiseVars& v) {
  return Eigen::Vector3d(v.s1, v.s2, v.s3).asDiagonal();
}

Eigen::Matrix3d innovation_inverse(const Eigen::Matrix3d& S) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(S);
  const auto& sv = svd.singularValues();
  const double cond = sv(2) > 0.0 ? sv(0) / sv(2) : INFINITY;
  if (!(cond < 1e14)) {
    std::ostringstream msg;
    msg << "innovation covariance near-singular (condition " << cond << ")";
    throw NumericalError(msg.str(), cond);
  }
  return S.inverse();
}

}  // namespace

Eigen::Matrix2d gain_form_cov(const Prediction& pred, const MeasNoiseVars& vars, double H,
                              double lambda) {
  const Matrix32 Hj = jacobian(pred.xbreve, H, lambda);
  const Eigen::Matrix3d S = meas_cov(vars) + Hj * pred.Mp * Hj.transpose();
  const Eigen::Matrix<double, 2, 3> K = pred.Mp * Hj.transpose() * innovation_inverse(S);
  return (Eigen::Matrix2d::Identity() - K * Hj) * pred.Mp;
}

Belief update(const Prediction& pred, const Eigen::Vector3d& y, const MeasNoiseVars& vars,
              double H, double lambda) {
  if (!(vars.s1 > 0.0 && vars.s2 > 0.0 && vars.s3 > 0.0))
    throw NumericalError("measurement noise variances must be positive");
  const Matrix32 Hj = jacobian(pred.xbreve, H, lambda);
  const Eigen::Matrix3d S = meas_cov(vars) + Hj * pred.Mp * Hj.transpose();
  const Eigen::Matrix<double, 2, 3> K = pred.Mp * Hj.transpose() * innovation_inverse(S);

  Eigen::Vector3d innov = y - observables(pred.xbreve, H, lambda).vec();
  Belief b;
  b.xhat = RelativeState::from(pred.xbreve.vec() + K * innov);

  const Eigen::Vector3d qinv(1.0 / vars.s1, 1.0 / vars.s2, 1.0 / vars.s3);
  const Eigen::Matrix2d info = Hj.transpose() * qinv.asDiagonal() * Hj + inverse2(pred.Mp);
  b.M = inverse2(info);
  b.M = 0.5 * (b.M + b.M.transpose());
  return b;
}

}  // namespace pcrbtrack
