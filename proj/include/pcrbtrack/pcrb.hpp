#pragma once

#include <Eigen/Core>

#include "pcrbtrack/dynamics.hpp"
#include "pcrbtrack/polynomial.hpp"
#include "pcrbtrack/scenario.hpp"

namespace pcrbtrack {

/// The subset of scenario constants the Fisher information depends on.
struct SensingParams {
  double H = 50.0;
  double lambda = 0.01;
  double gamma_r = 0.0;
  double a1 = 0.1;
  double a2 = 10.0;
  double a3 = 2000.0;

  static SensingParams from(const Scenario& sc);
};

/// Entries of the Bayesian information matrix J = H^T Qm^-1 H + Mp^-1:
/// Fx = J11, Fv = J22, D = det J, r_ij = [Mp^-1]_ij.
struct FisherTerms {
  double Fx = 0.0;
  double Fv = 0.0;
  double D = 0.0;
  double r11 = 0.0, r12 = 0.0, r21 = 0.0, r22 = 0.0;
};

struct PcrbPair {
  double pcrb_x = 0.0;
  double pcrb_v = 0.0;
};

/// Fault injection for the self-test: scales the angle term of Fx. Leave at
/// the default outside mutation tests.
struct FormulaMutation {
  double angle_term_scale = 1.0;
};

/// Closed-form Fisher terms at the predicted state. Throws NumericalError if
/// Mp is singular.
FisherTerms fisher_terms(const RelativeState& xbreve, const Eigen::Matrix2d& Mp,
                         const SensingParams& p, const FormulaMutation& mutation = {});

/// Throws NumericalError when D <= 0.
PcrbPair predicted_pcrb(const FisherTerms& ft,
                        PcrbConvention convention = PcrbConvention::kMatrixConsistent);

double weighted_objective(const PcrbPair& p, double alpha);

/// Weighted predicted PCRB as a function of the predicted position alone,
/// with the velocity tied to it through v = (x - xhat_prev) / dT.
double objective_at(double xbreve, double xhat_prev, double dT, const Eigen::Matrix2d& Mp,
                    const SensingParams& p, double alpha, PcrbConvention convention);

/// Numerator and denominator of the weighted PCRB lifted by (H^2 + x^2)^8 so
/// that both become polynomials of degree <= 16:
///   objective(x) = B(u) / A(u),  x = map.to_x(u).
/// Both are multiplied by the same positive `scale` to keep coefficients O(1).
struct RatioPolys {
  Polynomial A;
  Polynomial B;
  AffineMap map;
  double scale = 1.0;

  double ratio_at_x(double x) const;
};

RatioPolys build_ratio_polys(double xhat_prev, const Eigen::Matrix2d& Mp, const SensingParams& p,
                             double alpha, double dT, PcrbConvention convention,
                             AffineMap map = {});

}  // namespace pcrbtrack
