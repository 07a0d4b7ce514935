#include "pcrbtrack/pcrb.hpp"

#include <cmath>

#include "pcrbtrack/ekf.hpp"

namespace pcrbtrack {

SensingParams SensingParams::from(const Scenario& sc) {
  return {sc.sys.H, sc.sys.lambda, sc.derived.gamma_r, sc.sys.a1, sc.sys.a2, sc.sys.a3};
}

FisherTerms fisher_terms(const RelativeState& xb, const Eigen::Matrix2d& Mp,
                         const SensingParams& p, const FormulaMutation& mutation) {
  const Eigen::Matrix2d R = inverse2(Mp);
  const double H2 = p.H * p.H;
  const double H4 = H2 * H2;
  const double d2 = H2 + xb.x * xb.x;
  const double d4 = d2 * d2;
  const double d6 = d4 * d2;
  const double d8 = d4 * d4;
  const double d10 = d8 * d2;
  const double g = p.gamma_r;
  const double a3l2 = p.a3 * p.a3 * p.lambda * p.lambda;

  FisherTerms ft;
  ft.r11 = R(0, 0);
  ft.r12 = R(0, 1);
  ft.r21 = R(1, 0);
  ft.r22 = R(1, 1);
  ft.Fx = mutation.angle_term_scale * H4 * g / (p.a1 * p.a1 * d10) +
          g * xb.x * xb.x / (p.a2 * p.a2 * d6) +
          4.0 * H4 * g * xb.v * xb.v / (a3l2 * d10) + ft.r11;
  ft.Fv = 4.0 * g * xb.x * xb.x / (a3l2 * d6) + ft.r22;
  const double cross = 4.0 * H2 * g * xb.v * xb.x / (a3l2 * d8);
  ft.D = ft.Fx * ft.Fv - (ft.r12 + cross) * (ft.r21 + cross);
  return ft;
}

PcrbPair predicted_pcrb(const FisherTerms& ft, PcrbConvention convention) {
  if (!(ft.D > 0.0)) throw NumericalError("Fisher determinant is not positive");
  if (convention == PcrbConvention::kMatrixConsistent) return {ft.Fv / ft.D, ft.Fx / ft.D};
  return {ft.Fx / ft.D, ft.Fv / ft.D};
}

double weighted_objective(const PcrbPair& p, double alpha) {
  return alpha * p.pcrb_x + (1.0 - alpha) * p.pcrb_v;
}

double objective_at(double xbreve, double xhat_prev, double dT, const Eigen::Matrix2d& Mp,
                    const SensingParams& p, double alpha, PcrbConvention convention) {
  const RelativeState xb{xbreve, (xbreve - xhat_prev) / dT};
  return weighted_objective(predicted_pcrb(fisher_terms(xb, Mp, p), convention), alpha);
}

double RatioPolys::ratio_at_x(double x) const {
  const double u = map.to_u(x);
  return B.eval(u) / A.eval(u);
}

RatioPolys build_ratio_polys(double xhat_prev, const Eigen::Matrix2d& Mp, const SensingParams& p,
                             double alpha, double dT, PcrbConvention convention, AffineMap map) {
  const Eigen::Matrix2d R = inverse2(Mp);
  const double H2 = p.H * p.H;
  const double H4 = H2 * H2;
  const double g = p.gamma_r;
  const double a3l2 = p.a3 * p.a3 * p.lambda * p.lambda;

  const Polynomial X = Polynomial::affine(map.half_width, map.center);
  const Polynomial X2 = X * X;
  const Polynomial V = (X - Polynomial::constant(xhat_prev)) * (1.0 / dT);
  const Polynomial d2 = X2 + Polynomial::constant(H2);
  // Powers of d2 = H^2 + x^2: dk = d2^k.
  const Polynomial d4 = d2 * d2 * d2 * d2;
  const Polynomial d3 = d2 * d2 * d2;
  const Polynomial d5 = d3 * d2 * d2;

  // Fx (H^2+x^2)^5, Fv (H^2+x^2)^3, cross (H^2+x^2)^4
  const Polynomial fx_lift = Polynomial::constant(H4 * g / (p.a1 * p.a1)) +
                             (g / (p.a2 * p.a2)) * (X2 * d2 * d2) +
                             (4.0 * H4 * g / a3l2) * (V * V) + R(0, 0) * d5;
  const Polynomial fv_lift = (4.0 * g / a3l2) * X2 + R(1, 1) * d3;
  const double c = 4.0 * H2 * g / a3l2;
  const Polynomial vx = c * (V * X);
  const Polynomial cross1 = R(0, 1) * d4 + vx;
  const Polynomial cross2 = R(1, 0) * d4 + vx;

  RatioPolys out;
  out.map = map;
  out.A = fx_lift * fv_lift - cross1 * cross2;
  // Weighted numerator: the term multiplying alpha is the position bound.
  const Polynomial fx_full = fx_lift * d3;  // Fx (H^2+x^2)^8
  const Polynomial fv_full = fv_lift * d5;  // Fv (H^2+x^2)^8
  if (convention == PcrbConvention::kMatrixConsistent)
    out.B = alpha * fv_full + (1.0 - alpha) * fx_full;
  else
    out.B = alpha * fx_full + (1.0 - alpha) * fv_full;

  const double s = out.A.max_abs_coeff();
  if (s > 0.0 && std::isfinite(s)) {
    out.scale = 1.0 / s;
    out.A *= out.scale;
    out.B *= out.scale;
  }
  return out;
}

}  // namespace pcrbtrack
