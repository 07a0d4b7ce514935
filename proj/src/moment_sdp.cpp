#include "pcrbtrack/moment_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace pcrbtrack {

MomentVector MomentVector::dirac(double a) {
  MomentVector m;
  double p = 1.0;
  for (auto& tq : m.t) {
    p *= a;
    tq = p;
  }
  return m;
}

HankelPair hankel_pair(const MomentVector& t) {
  HankelPair h;
  for (int i = 0; i < kHankelSize; ++i)
    for (int j = 0; j < kHankelSize; ++j) {
      h.L(i, j) = t(i + j);
      h.M(i, j) = t(i + j + 1);
    }
  return h;
}

namespace {

constexpr int kChebCount = kMomentCount + 1;  // T_0 .. T_17
using ChebMatrix = Eigen::Matrix<double, kChebCount, kChebCount>;

// Column j holds the monomial coefficients of the Chebyshev polynomial T_j.
const ChebMatrix& chebyshev_basis() {
  static const ChebMatrix T = [] {
    ChebMatrix B = ChebMatrix::Zero();
    B(0, 0) = 1.0;
    B(1, 1) = 1.0;
    for (int j = 2; j < kChebCount; ++j) {
      // T_j = 2 u T_{j-1} - T_{j-2}
      for (int q = 1; q < kChebCount; ++q) B(q, j) += 2.0 * B(q - 1, j - 1);
      B.col(j) -= B.col(j - 2);
    }
    return B;
  }();
  return T;
}

// E[T_i T_j] = (y_{i+j} + y_{|i-j|}) / 2 and
// E[u T_i T_j] = (y_{i+j+1} + y_{|i+j-1|} + y_{|i-j|+1} + y_{||i-j|-1|}) / 4,
// as coefficient matrices of y_k (k = 0 is the constant).
Hankel9 gram_coeff(int k) {
  Hankel9 E = Hankel9::Zero();
  for (int i = 0; i < kHankelSize; ++i)
    for (int j = 0; j < kHankelSize; ++j) {
      if (i + j == k) E(i, j) += 0.5;
      if (std::abs(i - j) == k) E(i, j) += 0.5;
    }
  return E;
}

Hankel9 shifted_coeff(int k) {
  Hankel9 E = Hankel9::Zero();
  for (int i = 0; i < kHankelSize; ++i)
    for (int j = 0; j < kHankelSize; ++j)
      for (int s : {i + j, std::abs(i - j)})
        for (int t : {s + 1, std::abs(s - 1)})
          if (t == k) E(i, j) += 0.25;
  return E;
}

Eigen::VectorXd uniform_chebyshev_moments() {
  Eigen::VectorXd y(kMomentCount);
  for (int k = 1; k <= kMomentCount; ++k) y(k - 1) = (k % 2 == 0) ? 1.0 / (1.0 - k * k) : 0.0;
  return y;
}

// Chebyshev coefficients a_0..a_17 of a polynomial in u.
Eigen::Matrix<double, kChebCount, 1> chebyshev_coeffs(const Polynomial& p) {
  Eigen::Matrix<double, kChebCount, 1> q = Eigen::Matrix<double, kChebCount, 1>::Zero();
  for (int k = 0; k <= p.degree(); ++k) q(k) = p[k];
  return chebyshev_basis().triangularView<Eigen::Upper>().solve(q);
}

Hankel9 gram_matrix(const Eigen::VectorXd& y) {
  Hankel9 L = gram_coeff(0);
  for (int k = 1; k <= kMomentCount; ++k) L += y(k - 1) * gram_coeff(k);
  return L;
}

int numerical_rank(const Eigen::VectorXd& y) {
  Eigen::SelfAdjointEigenSolver<Hankel9> es(gram_matrix(y));
  const auto ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  int r = 0;
  for (int i = 0; i < kHankelSize; ++i)
    if (ev(i) > 1e-6 * top) ++r;
  return r;
}

}  // namespace

MomentVector monomial_moments(const Eigen::VectorXd& y) {
  // u^q = sum_j (T^-1)_{jq} T_j, so t_q = sum_j (T^-1)_{jq} y_j with y_0 = 1.
  Eigen::Matrix<double, kChebCount, 1> yy;
  yy(0) = 1.0;
  yy.tail(kMomentCount) = y;
  const Eigen::Matrix<double, kChebCount, 1> t =
      chebyshev_basis().triangularView<Eigen::Upper>().transpose().solve(yy);
  MomentVector m;
  for (int q = 1; q <= kMomentCount; ++q) m.t[static_cast<size_t>(q - 1)] = t(q);
  return m;
}

LmiProblem moment_lmi(const Polynomial& cost_u) {
  LmiBlock upper;  // (1 - u) localizer
  LmiBlock lower;  // (1 + u) localizer
  upper.F0 = gram_coeff(0) - shifted_coeff(0);
  lower.F0 = gram_coeff(0) + shifted_coeff(0);
  for (int k = 1; k <= kMomentCount; ++k) {
    upper.F.push_back(gram_coeff(k) - shifted_coeff(k));
    lower.F.push_back(gram_coeff(k) + shifted_coeff(k));
  }

  LmiProblem p;
  const auto a = chebyshev_coeffs(cost_u);
  p.cost = a.tail(kMomentCount);
  p.blocks = {std::move(upper), std::move(lower)};
  p.start = uniform_chebyshev_moments();
  return p;
}

MomentSdpResult solve_moment_sdp(const Polynomial& c, const Interval& iv, const SdpBackend& sdp) {
  if (c.degree() > 16) throw std::invalid_argument("moment SDP cost must have degree <= 16");
  if (!(iv.lo <= iv.hi)) throw std::invalid_argument("moment SDP: empty interval");
  for (double v : c.coeffs())
    if (!std::isfinite(v)) throw std::invalid_argument("moment SDP: non-finite cost");

  MomentSdpResult r;
  const double c0 = c[0];
  if (iv.lo == iv.hi) {
    r.degenerate = true;
    r.verified = true;
    r.x_star = r.x_first_moment = iv.lo;
    r.objective = c.eval(iv.lo) - c0;
    r.t = MomentVector::dirac(0.0);
    r.map = {iv.lo, 0.0};
    r.numerical_rank = 1;
    return r;
  }

  r.map = AffineMap::onto(iv);
  const Polynomial q = c.compose_affine(r.map.half_width, r.map.center);
  const auto a = chebyshev_coeffs(q);
  const double scale = a.tail(kMomentCount).cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    r.verified = true;
    r.x_star = r.x_first_moment = iv.mid();
    r.objective = q[0] - c0;
    r.t = MomentVector::dirac(0.0);
    r.numerical_rank = 1;
    return r;
  }

  r.sdp = sdp.solve(moment_lmi(q * (1.0 / scale)));
  if (r.sdp.status != SdpStatus::kConverged) {
    std::ostringstream msg;
    msg << "moment SDP backend '" << sdp.name() << "' status " << to_string(r.sdp.status)
        << " (gap " << r.sdp.rel_gap << ", dual residual " << r.sdp.dual_residual << ")";
    throw SdpFailure(msg.str());
  }
  r.t = monomial_moments(r.sdp.x);

  // y_1 = E[T_1(u)] = E[u]: the minimizer when the optimal measure is a point mass.
  const double obj_scaled = r.sdp.objective;
  const double u1 = std::clamp(r.sdp.x(0), -1.0, 1.0);
  r.x_first_moment = iv.clamp(r.map.to_x(u1));
  r.objective = obj_scaled * scale + a(0) - c0;
  r.numerical_rank = numerical_rank(r.sdp.x);

  const double at_u1 = (q.eval(u1) - a(0)) / scale;
  r.verified = std::abs(at_u1 - obj_scaled) <= 1e-6 * (1.0 + std::abs(obj_scaled));
  if (r.verified) {
    r.x_star = r.x_first_moment;
  } else {
    r.x_star = minimize_on_interval(c, iv).x;
    std::ostringstream msg;
    msg << "first moment is not a minimizer (moment matrix rank " << r.numerical_rank
        << "); using root-finding minimizer";
    r.diagnostic = msg.str();
  }
  return r;
}

}  // namespace pcrbtrack
