#pragma once

#include <random>

#include <Eigen/Core>

#include "pcrbtrack/scenario.hpp"

namespace pcrbtrack {

using Rng = std::mt19937_64;

/// Target kinematics relative to the platform: x = target - platform.
struct RelativeState {
  double x = 0.0;  // [m]
  double v = 0.0;  // [m/s]

  Eigen::Vector2d vec() const { return {x, v}; }
  static RelativeState from(const Eigen::Vector2d& s) { return {s(0), s(1)}; }
  bool operator==(const RelativeState&) const = default;
};

struct UavMotion {
  double pos = 0.0;
  double vel = 0.0;
};

/// Elevation angle, slant range and Doppler shift seen by the platform.
struct Observables {
  double phi = 0.0;  // (0, pi) [rad]
  double d = 0.0;    // [m]
  double mu = 0.0;   // [Hz]

  Eigen::Vector3d vec() const { return {phi, d, mu}; }
};

struct MeasNoiseVars {
  double s1 = 0.0;  // angle [rad^2]
  double s2 = 0.0;  // range [m^2]
  double s3 = 0.0;  // Doppler [Hz^2]
};

/// Constant-velocity transition matrix G.
Eigen::Matrix2d transition(double dT);

/// Process noise covariance q * [[dT^3/3, dT^2/2], [dT^2/2, dT]].
Eigen::Matrix2d process_noise_cov(double q_tilde, double dT);

/// One slot of the relative dynamics. `u_delta_v` is the platform velocity
/// increment over the slot; the platform contributes (u dT, u) to the state.
RelativeState evolve_relative(const RelativeState& prev, double u_delta_v, double dT,
                              const Eigen::Vector2d& noise);

/// Draws process noise from N(0, Qp) with the lower Cholesky factor of Qp.
Eigen::Vector2d draw_process_noise(const Eigen::Matrix2d& Qp, Rng& rng);

Observables observables(const RelativeState& rel, double H, double lambda);

/// Noise variances at the true geometry. The effective SNR falls off as
/// gamma_r / d^4 (round trip).
MeasNoiseVars meas_noise_vars(const RelativeState& rel, double gamma_r, double H, double a1,
                              double a2, double a3);

MeasNoiseVars meas_noise_vars(const RelativeState& rel, const Scenario& sc);

/// y = h(rel) + z with z ~ N(0, diag(s1, s2, s3)). Always consumes exactly
/// three standard normals from `rng`, so streams stay aligned across policies.
Eigen::Vector3d synth_measurement(const RelativeState& rel, const MeasNoiseVars& vars, double H,
                                  double lambda, Rng& rng);

}  // namespace pcrbtrack
