#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "pcrbtrack/dynamics.hpp"

namespace pcrbtrack {

/// Raised when a linear-algebra step cannot be trusted (singular or badly
/// conditioned matrices, solver breakdown).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition = 0.0)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

using Matrix32 = Eigen::Matrix<double, 3, 2>;

struct Belief {
  RelativeState xhat;
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
};

struct Prediction {
  RelativeState xbreve;
  Eigen::Matrix2d Mp = Eigen::Matrix2d::Identity();
};

/// Closed-form 2x2 inverse; throws NumericalError when |det| <= 1e-300.
Eigen::Matrix2d inverse2(const Eigen::Matrix2d& A);

Prediction predict(const Belief& prev, double u_delta_v, double dT, const Eigen::Matrix2d& Qp);

/// d(phi, d, mu) / d(x, v) at the predicted state. The angle row uses the
/// analytic derivative of atan2(H, x), i.e. -H / (H^2 + x^2).
Matrix32 jacobian(const RelativeState& xbreve, double H, double lambda);

/// Measurement update. The stored covariance is the information form
/// (H^T Qm^-1 H + Mp^-1)^-1; `gain_form_cov` below is kept for cross-checks.
Belief update(const Prediction& pred, const Eigen::Vector3d& y, const MeasNoiseVars& vars,
              double H, double lambda);

/// (I - K H) Mp with K = Mp H^T (Qm + H Mp H^T)^-1.
Eigen::Matrix2d gain_form_cov(const Prediction& pred, const MeasNoiseVars& vars, double H,
                              double lambda);

}  // namespace pcrbtrack
