#pragma once
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/protocol.hpp"
#include "cvqkd/sdp.hpp"

namespace cvqkd {

struct SolverOptions {
  int max_iters = 300;              // Frank-Wolfe iteration cap
  double gap_tol = 1e-6;            // stopping gap |<grad, omega - rho>|
  double eps_pert_per_dim = 1e-12;  // spectral floor eps = eps_pert_per_dim * dim(G)
  double line_search_tol = 1e-6;
  double eps_viol_floor = 1e-8;     // per-constraint relaxation floor in step 2
  double feas_residual_limit = 1e-8;
  SdpOptions sdp;
};

struct KeyRateProblem {
  ConstraintSet constraints;
  PostprocessingMaps maps;
  FockDim dim;
  SolverOptions options;
};

/// f(rho) = D(G(rho) || Z[G(rho)]) in bits, evaluated on the spectrally
/// floored map and rescaled to key-generation rounds.
double objective_value(const PostprocessingMaps& maps, const Matrix& rho,
                       double eps_pert_per_dim = 1e-12);

/// Exact gradient of the floored objective; Hermitian.
Matrix gradient(const PostprocessingMaps& maps, const Matrix& rho,
                double eps_pert_per_dim = 1e-12);

struct FrankWolfeResult {
  Matrix rho;
  double value = 0;
  int iterations = 0;
  double gap = 0;            // primal FW gap at termination
  double certified_gap = 0;  // gap against the subproblem's certified dual
  std::vector<double> objective_trace;
  bool converged = false;
};

/// Projects the simulated state onto the constraint set (PSD, worst residual
/// minimized, then overlap with the simulated state maximized). Throws when
/// the constraints cannot be met to within feas_residual_limit.
Matrix feasible_initial_point(const KeyRateProblem& problem, const Matrix& simulated_state);

FrankWolfeResult frank_wolfe(const KeyRateProblem& problem, const Matrix& rho0);

/// First-order certified lower bound on min f over the relaxed feasible set:
/// f(rho*) - <grad, rho*> + min_sigma <grad, sigma>; 0 on certification failure.
double reliable_lower_bound(const KeyRateProblem& problem, const Matrix& rho_star);

struct KeyRateReport {
  double step1_value = 0;
  double lower_bound = 0;
  double p_pass = 0;
  double delta_ec = 0;
  double key_rate = 0;
  int fw_iterations = 0;
  double fw_gap = 0;
  double max_residual = 0;
  int cutoff = 0;
  bool fw_converged = false;
  std::string status = "ok";
  std::string backend = "ipm-hkm";
  double sdp_tol = 1e-9;
};

/// Full pipeline: simulate statistics, assemble the problem, run both solver
/// steps and combine with the error-correction cost.
KeyRateReport key_rate(const ProtocolSpec& spec, const ChannelModel& ch, const FockDim& dim,
                       const SolverOptions& options = {});

}  // namespace cvqkd
