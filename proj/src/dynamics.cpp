#include "pcrbtrack/dynamics.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace pcrbtrack {

Eigen::Matrix2d transition(double dT) {
  Eigen::Matrix2d G;
  G << 1.0, dT, 0.0, 1.0;
  return G;
}

Eigen::Matrix2d process_noise_cov(double q_tilde, double dT) {
  Eigen::Matrix2d Q;
  Q << dT * dT * dT / 3.0, dT * dT / 2.0, dT * dT / 2.0, dT;
  return q_tilde * Q;
}

RelativeState evolve_relative(const RelativeState& prev, double u_delta_v, double dT,
                              const Eigen::Vector2d& noise) {
  return {prev.x + dT * prev.v - u_delta_v * dT + noise(0), prev.v - u_delta_v + noise(1)};
}

Eigen::Vector2d draw_process_noise(const Eigen::Matrix2d& Qp, Rng& rng) {
  std::normal_distribution<double> n01;
  const Eigen::Matrix2d L = Qp.llt().matrixL();
  const double z0 = n01(rng);
  const double z1 = n01(rng);
  return L * Eigen::Vector2d(z0, z1);
}

Observables observables(const RelativeState& rel, double H, double lambda) {
  Observables o;
  o.d = std::hypot(H, rel.x);
  o.phi = std::atan2(H, rel.x);
  o.mu = -2.0 * rel.v * rel.x / (lambda * o.d);
  return o;
}

MeasNoiseVars meas_noise_vars(const RelativeState& rel, double gamma_r, double H, double a1,
                              double a2, double a3) {
  const double d2 = H * H + rel.x * rel.x;
  const double gamma_eff = gamma_r / (d2 * d2);
  const double sin2 = H * H / d2;
  return {a1 * a1 / (gamma_eff * sin2), a2 * a2 / gamma_eff, a3 * a3 / gamma_eff};
}

MeasNoiseVars meas_noise_vars(const RelativeState& rel, const Scenario& sc) {
  return meas_noise_vars(rel, sc.derived.gamma_r, sc.sys.H, sc.sys.a1, sc.sys.a2, sc.sys.a3);
}

Eigen::Vector3d synth_measurement(const RelativeState& rel, const MeasNoiseVars& vars, double H,
                                  double lambda, Rng& rng) {
  std::normal_distribution<double> n01;
  const double z1 = n01(rng);
  const double z2 = n01(rng);
  const double z3 = n01(rng);
  const Observables o = observables(rel, H, lambda);
  return {o.phi + std::sqrt(vars.s1) * z1, o.d + std::sqrt(vars.s2) * z2,
          o.mu + std::sqrt(vars.s3) * z3};
}

}  // namespace pcrbtrack
