#include "pcrbtrack/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace pcrbtrack {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kConverged: return "converged";
    case SdpStatus::kInaccurate: return "inaccurate";
    case SdpStatus::kInfeasibleStart: return "infeasible-start";
    case SdpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd assemble(const LmiBlock& b, const VectorXd& x) {
  MatrixXd F = b.F0;
  for (Eigen::Index i = 0; i < x.size(); ++i) F.noalias() += x(i) * b.F[static_cast<size_t>(i)];
  return F;
}

MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

// Largest step a with X + a dX still PSD (infinity if unbounded). X must be PD.
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dX) {
  const auto L = chol.matrixL();
  const MatrixXd Y = L.solve(dX);
  const MatrixXd A = L.solve(Y.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(A), Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Direction {
  VectorXd dx;
  std::vector<MatrixXd> dS;
  std::vector<MatrixXd> dZ;
};

}  // namespace

SdpSolution PrimalDualSdpSolver::solve(const LmiProblem& p) const {
  const Eigen::Index n = p.cost.size();
  const size_t nb = p.blocks.size();
  double m = 0.0;
  for (const auto& b : p.blocks) m += static_cast<double>(b.F0.rows());

  SdpSolution sol;
  VectorXd x = p.start;
  sol.x = x;
  if (x.size() != n) {
    sol.status = SdpStatus::kInfeasibleStart;
    return sol;
  }

  std::vector<MatrixXd> S(nb), Z(nb), Sinv(nb), Wnt(nb);
  std::vector<Eigen::LLT<MatrixXd>> cholS(nb), cholZ(nb);
  auto factor_primal = [&](const VectorXd& xv) {
    for (size_t b = 0; b < nb; ++b) {
      S[b] = assemble(p.blocks[b], xv);
      cholS[b].compute(S[b]);
      if (cholS[b].info() != Eigen::Success) return false;
    }
    return true;
  };
  if (!factor_primal(x)) {
    sol.status = SdpStatus::kInfeasibleStart;
    return sol;
  }
  const double z0 = 1.0 + p.cost.cwiseAbs().maxCoeff();
  for (size_t b = 0; b < nb; ++b) Z[b] = z0 * MatrixXd::Identity(S[b].rows(), S[b].cols());

  VectorXd rd(n), tr_sinv(n);
  double gap = 0.0;

  auto measure = [&]() {
    gap = 0.0;
    for (size_t b = 0; b < nb; ++b) gap += S[b].cwiseProduct(Z[b]).sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = 0.0;
      for (size_t b = 0; b < nb; ++b)
        a += p.blocks[b].F[static_cast<size_t>(i)].cwiseProduct(Z[b]).sum();
      rd(i) = p.cost(i) - a;
    }
    sol.rel_gap = std::max(gap, 0.0) / (1.0 + std::abs(p.cost.dot(x)));
    sol.dual_residual = rd.norm() / (1.0 + p.cost.norm());
  };

  // Near the optimum S becomes nearly singular and rounding eventually
  // pushes the dual residual back up; keep the best iterate seen.
  VectorXd best_x = x;
  std::vector<MatrixXd> best_Z = Z;
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;

  int it = 0;
  for (; it < opt_.max_iterations; ++it) {
    measure();
    const double score = std::max(sol.rel_gap, sol.dual_residual);
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_Z = Z;
      since_best = 0;
    } else if (++since_best >= opt_.patience) {
      break;
    }
    if (sol.rel_gap <= opt_.gap_tol && sol.dual_residual <= opt_.feas_tol) break;
    const double mu = gap / m;

    // Nesterov-Todd scaling W with W S W = Z, built from S = L L^T,
    // Z = R R^T and the SVD R^T L = U diag(s) V^T as W = G G^T, G = R U s^-1/2.
    // The Schur matrix M_ij = tr(F_i W F_j W) is the Gram matrix of
    // B_j = G^T F_j G; a QR of B avoids forming M, which squares its conditioning.
    Eigen::Index rows = 0;
    for (size_t b = 0; b < nb; ++b) rows += S[b].size();
    MatrixXd basis(rows, n);
    tr_sinv.setZero();
    bool ok = true;
    Eigen::Index off = 0;
    for (size_t b = 0; b < nb; ++b) {
      Sinv[b] = cholS[b].solve(MatrixXd::Identity(S[b].rows(), S[b].cols()));
      cholZ[b].compute(Z[b]);
      if (cholZ[b].info() != Eigen::Success) {
        ok = false;
        break;
      }
      const MatrixXd Rz = cholZ[b].matrixL();
      const MatrixXd Ls = cholS[b].matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Rz.transpose() * Ls, Eigen::ComputeFullU);
      const VectorXd sv = svd.singularValues();
      if (!(sv.minCoeff() > 0.0)) {
        ok = false;
        break;
      }
      const MatrixXd G = Rz * svd.matrixU() * sv.cwiseSqrt().cwiseInverse().asDiagonal();
      Wnt[b] = G * G.transpose();
      const auto& F = p.blocks[b].F;
      for (Eigen::Index j = 0; j < n; ++j) {
        const MatrixXd Bj = G.transpose() * F[static_cast<size_t>(j)] * G;
        basis.col(j).segment(off, Bj.size()) = Eigen::Map<const VectorXd>(Bj.data(), Bj.size());
        tr_sinv(j) += F[static_cast<size_t>(j)].cwiseProduct(Sinv[b]).sum();
      }
      off += S[b].size();
    }
    if (!ok) break;
    const Eigen::HouseholderQR<MatrixXd> qr(basis);
    const MatrixXd Rq = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    if (!(Rq.diagonal().cwiseAbs().minCoeff() > 0.0)) break;
    auto schur_solve = [&Rq](const VectorXd& r) {
      const VectorXd y = Rq.transpose().triangularView<Eigen::Lower>().solve(r);
      return VectorXd(Rq.triangularView<Eigen::Upper>().solve(y));
    };

    // Direction towards the central-path point with S Z = target I.
    auto direction = [&](double target) {
      Direction d;
      d.dS.resize(nb);
      d.dZ.resize(nb);
      std::vector<MatrixXd> wsw(nb);
      const VectorXd rhs = target * tr_sinv - p.cost;
      d.dx = schur_solve(rhs);
      // Iterative refinement against the operator actually applied to dZ, so
      // the dual residual shrinks by (1 - step) as intended.
      for (int refine = 0; refine < 3; ++refine) {
        VectorXd applied = VectorXd::Zero(n);
        for (size_t b = 0; b < nb; ++b) {
          MatrixXd dS = MatrixXd::Zero(S[b].rows(), S[b].cols());
          for (Eigen::Index j = 0; j < n; ++j)
            dS.noalias() += d.dx(j) * p.blocks[b].F[static_cast<size_t>(j)];
          wsw[b] = sym(Wnt[b] * dS * Wnt[b]);
          d.dS[b] = std::move(dS);
          for (Eigen::Index i = 0; i < n; ++i)
            applied(i) += p.blocks[b].F[static_cast<size_t>(i)].cwiseProduct(wsw[b]).sum();
        }
        if (refine == 2) break;
        d.dx += schur_solve(rhs - applied);
      }
      for (size_t b = 0; b < nb; ++b) d.dZ[b] = sym(target * Sinv[b] - Z[b] - wsw[b]);
      return d;
    };
    auto steps = [&](const Direction& d, double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, opt_.step_fraction * max_step(cholS[b], d.dS[b]));
        ad = std::min(ad, opt_.step_fraction * max_step(cholZ[b], d.dZ[b]));
      }
    };

    const Direction pred = direction(0.0);
    double ap = 0.0, ad = 0.0;
    steps(pred, ap, ad);
    double gap_aff = 0.0;
    for (size_t b = 0; b < nb; ++b)
      gap_aff += (S[b] + ap * pred.dS[b]).cwiseProduct(Z[b] + ad * pred.dZ[b]).sum();
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    const Direction corr = direction(sigma * mu);
    steps(corr, ap, ad);

    // Rounding can leave the boundary step marginally infeasible; back off.
    VectorXd xn = x + ap * corr.dx;
    while (!factor_primal(xn) && ap > 1e-16) {
      ap *= 0.5;
      xn = x + ap * corr.dx;
    }
    if (ap <= 1e-16) {
      factor_primal(x);
      break;
    }
    x = xn;
    for (size_t b = 0; b < nb; ++b) Z[b] = sym(Z[b] + ad * corr.dZ[b]);
    if (ap < 1e-12 && ad < 1e-12) break;
  }
  x = best_x;
  Z = best_Z;
  factor_primal(x);
  measure();

  sol.x = x;
  sol.objective = p.cost.dot(x);
  double lmin = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < nb; ++b)
    lmin = std::min(lmin, Eigen::SelfAdjointEigenSolver<MatrixXd>(S[b], Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff());
  sol.primal_residual = std::max(0.0, -lmin);
  sol.iterations = it;
  const bool accurate = sol.rel_gap <= kAcceptTol && sol.dual_residual <= kAcceptTol;
  sol.status = accurate ? SdpStatus::kConverged : SdpStatus::kInaccurate;
  return sol;
}

}  // namespace pcrbtrack
