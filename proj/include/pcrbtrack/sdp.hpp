#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace pcrbtrack {

/// One linear matrix inequality F0 + sum_i x_i F[i] >= 0 (PSD). All matrices
/// are symmetric and share the block size.
struct LmiBlock {
  Eigen::MatrixXd F0;
  std::vector<Eigen::MatrixXd> F;
};

/// min cost^T x  s.t. every block is PSD.
/// `start` must be strictly feasible (every block positive definite).
struct LmiProblem {
  Eigen::VectorXd cost;
  std::vector<LmiBlock> blocks;
  Eigen::VectorXd start;
};

enum class SdpStatus { kConverged, kInaccurate, kInfeasibleStart, kNumericalFailure };

const char* to_string(SdpStatus s);

struct SdpSolution {
  Eigen::VectorXd x;
  SdpStatus status = SdpStatus::kNumericalFailure;
  double objective = 0.0;
  double primal_residual = 0.0;  // max(0, -lambda_min) over blocks
  double dual_residual = 0.0;    // |c - A^*(Z)| / (1 + |c|)
  double rel_gap = 0.0;          // tr(F Z) / (1 + |c^T x|)
  int iterations = 0;
};

/// Plug point for conic solvers. Implementations must be safe to call
/// concurrently on distinct problems.
class SdpBackend {
 public:
  /// Residual and gap thresholds a solution has to meet to count as converged.
  static constexpr double kAcceptTol = 1e-7;

  virtual ~SdpBackend() = default;
  virtual SdpSolution solve(const LmiProblem& problem) const = 0;
  virtual std::string name() const = 0;
};

/// Infeasible-start primal-dual path following on the pair
///   min c^T x  s.t. S = F(x) >= 0      max -tr(F0 Z)  s.t. tr(F_i Z) = c_i, Z >= 0
/// with the Nesterov-Todd search direction and Mehrotra's centering heuristic. The
/// primal iterate stays exactly feasible; the dual residual is driven to zero.
class PrimalDualSdpSolver final : public SdpBackend {
 public:
  struct Options {
    double gap_tol = 1e-12;       // tr(S Z) / (1 + |c^T x|)
    double feas_tol = 1e-12;      // dual residual
    int patience = 4;             // iterations without a better iterate before stopping
    double step_fraction = 0.98;  // of the distance to the cone boundary
    int max_iterations = 100;
  };

  PrimalDualSdpSolver() = default;
  explicit PrimalDualSdpSolver(Options opt) : opt_(opt) {}

  SdpSolution solve(const LmiProblem& problem) const override;
  std::string name() const override { return "primal-dual"; }

 private:
  Options opt_;
};

}  // namespace pcrbtrack
