#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

#include "pcrbtrack/polynomial.hpp"
#include "pcrbtrack/sdp.hpp"

namespace pcrbtrack {

inline constexpr int kMomentCount = 17;  // t_1 .. t_17
inline constexpr int kHankelSize = 9;

/// t[q-1] stands in for x^q under the representing measure.
struct MomentVector {
  std::array<double, kMomentCount> t{};

  double operator()(int q) const { return q == 0 ? 1.0 : t[static_cast<size_t>(q - 1)]; }
  static MomentVector dirac(double a);
};

using Hankel9 = Eigen::Matrix<double, kHankelSize, kHankelSize>;

struct HankelPair {
  Hankel9 L;  // L_ij = t_{i+j}, t_0 = 1
  Hankel9 M;  // M_ij = t_{i+j+1}
};

HankelPair hankel_pair(const MomentVector& t);

/// Result of the order-8 moment relaxation
///   min c^T t  s.t.  hi L(t) - M(t) >= 0,  M(t) - lo L(t) >= 0.
/// `t` holds moments of the normalized variable u in [-1, 1]
/// (x = map.to_x(u)). `objective` is in the caller's units with the constant
/// term of c excluded.
struct MomentSdpResult {
  MomentVector t;
  AffineMap map;
  double x_star = 0.0;
  double objective = 0.0;
  double x_first_moment = 0.0;  // t_1 mapped to x, before verification
  bool verified = false;         // t_1 passed the post-check (no oracle fallback)
  bool degenerate = false;       // lo == hi, solvers bypassed
  int numerical_rank = 0;        // of L(t) in the orthogonal basis
  std::string diagnostic;
  SdpSolution sdp;
};

/// Raised when the conic backend reports an infeasible start or a numerical
/// breakdown; the moment feasible set is never empty, so this indicates a bug.
class SdpFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the LMI for the interval [-1, 1] in u. The decision variables are
/// the Chebyshev moments y_k = E[T_k(u)], k = 1..17, which keep the matrix
/// coefficients O(1); the two 9x9 blocks are the localizing forms for
/// (1 - u) and (1 + u) written in the Chebyshev basis. This is the monomial
/// Hankel relaxation under an invertible change of basis, so the feasible
/// set is unchanged.
LmiProblem moment_lmi(const Polynomial& cost_u);

/// Monomial moments t_q = E[u^q] from Chebyshev moments y_1..y_17.
MomentVector monomial_moments(const Eigen::VectorXd& y);

/// `c` is a polynomial in x of degree <= 16; its constant term is ignored.
MomentSdpResult solve_moment_sdp(const Polynomial& c, const Interval& iv, const SdpBackend& sdp);

}  // namespace pcrbtrack
