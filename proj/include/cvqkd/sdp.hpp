#pragma once
#include <memory>
#include <vector>

#include "cvqkd/fock.hpp"

namespace cvqkd {

struct SdpOptions {
  int max_iters = 100;
  double tol_feas = 1e-9;
  double tol_gap = 1e-9;
};

enum class SdpStatus { optimal, stalled, infeasible, failed };

/// One scalar constraint <Gamma, rho> = value, optionally relaxed to
/// |<Gamma, rho> - value| <= relax.
struct SdpConstraint {
  Matrix observable;
  double value = 0.0;
  double relax = 0.0;
};

/// min <cost, rho> over Hermitian PSD rho meeting the (relaxed) constraints.
struct LinearSdpProblem {
  Matrix cost;
  std::vector<SdpConstraint> constraints;
  SdpOptions options;
};

struct SdpResult {
  Matrix minimizer;
  double primal_value = 0.0;
  /// Weak-duality lower bound on the primal optimum, corrected for any
  /// residual dual infeasibility; -inf when no certificate could be formed.
  double certified_dual = 0.0;
  SdpStatus status = SdpStatus::failed;
  int iterations = 0;
  double max_violation = 0.0;  // constraint violation beyond the allowed relax
  bool certified() const;
};

SdpResult solve_linear_sdp(const LinearSdpProblem& problem);

/// Reusable solver for a fixed constraint set: the conic program is assembled
/// once and re-solved for many cost observables (the Frank-Wolfe hot path).
class LinearSdpSolver {
 public:
  LinearSdpSolver(const std::vector<SdpConstraint>& constraints, const SdpOptions& options);
  ~LinearSdpSolver();
  LinearSdpSolver(LinearSdpSolver&&) noexcept;
  LinearSdpSolver& operator=(LinearSdpSolver&&) noexcept;

  SdpResult solve(const Matrix& cost) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Two-stage feasibility projection: minimize the worst constraint residual
/// over PSD states (identity-type rows held exactly), then, within that
/// residual budget, maximize overlap with `target`.
struct FeasibilityResult {
  Matrix rho;
  double minimax_residual;  // stage-1 optimum
  double residual;          // worst residual of the returned state
  SdpStatus status;
};

FeasibilityResult feasibility_project(const std::vector<SdpConstraint>& constraints,
                                      const Matrix& target, const SdpOptions& options = {});

/// Real-symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.
Eigen::MatrixXd embed_hermitian(const Matrix& h);
/// Inverse of embed_hermitian, averaging over the embedding symmetry.
Matrix unembed_hermitian(const Eigen::MatrixXd& x);

}  // namespace cvqkd
