#include "cvqkd/solver.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "cvqkd/linalg.hpp"

namespace cvqkd {

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kTraceFloor = 1e-14;

double log2d(double x) { return std::log(x) / kLog2; }

Matrix psd_sqrt_state(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::domain_error("state has eigenvalue below -1e-8");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<SdpConstraint> to_sdp_constraints(const ConstraintSet& cs,
                                              const Eigen::VectorXd* relax = nullptr) {
  std::vector<SdpConstraint> out;
  out.reserve(cs.constraints.size());
  for (std::size_t i = 0; i < cs.constraints.size(); ++i)
    out.push_back({cs.constraints[i].observable, cs.constraints[i].value,
                   relax ? (*relax)(long(i)) : 0.0});
  return out;
}

/// Golden-section minimum of a convex function on [0, 1].
std::pair<double, double> golden_section(const std::function<double(double)>& f, double tol) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double best_t = x1, best_f = f1;
  if (f2 < best_f) best_t = x2, best_f = f2;
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    if (f1 < best_f) best_t = x1, best_f = f1;
    if (f2 < best_f) best_t = x2, best_f = f2;
  }
  const double fe = f(1.0);
  if (fe < best_f) best_t = 1.0, best_f = fe;
  return {best_t, best_f};
}

}  // namespace

double objective_value(const PostprocessingMaps& maps, const Matrix& rho,
                       double eps_pert_per_dim) {
  const int n = maps.ab_dim;
  const int gd = maps.g_dim();
  if (rho.rows() != n) throw std::invalid_argument("objective_value: dimension mismatch");

  const Matrix sq = psd_sqrt_state(rho);
  const Matrix core = hermitize(sq * maps.kdag_k * sq);
  Eigen::SelfAdjointEigenSolver<Matrix> es(core, Eigen::EigenvaluesOnly);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const double tr_g = lam.sum();
  if (tr_g < kTraceFloor) return 0.0;

  const double eps = eps_pert_per_dim * gd;
  const double floor = eps * tr_g / gd;

  double term_g = (gd - n) * floor * log2d(floor);
  for (int i = 0; i < n; ++i) {
    const double v = (1.0 - eps) * lam(i) + floor;
    term_g += v * log2d(v);
  }

  double term_z = 0;
  for (const Matrix& f : maps.factors) {
    const Matrix block = hermitize(f * rho * f.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eb(block, Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) {
      const double v = (1.0 - eps) * std::max(eb.eigenvalues()(i), 0.0) + floor;
      term_z += v * log2d(v);
    }
  }
  return maps.sift_scale * (term_g - term_z);
}

Matrix gradient(const PostprocessingMaps& maps, const Matrix& rho, double eps_pert_per_dim) {
  const int n = maps.ab_dim;
  const int gd = maps.g_dim();
  if (rho.rows() != n) throw std::invalid_argument("gradient: dimension mismatch");

  const Matrix sq = psd_sqrt_state(rho);
  const Matrix core = hermitize(sq * maps.kdag_k * sq);
  Eigen::SelfAdjointEigenSolver<Matrix> es(core);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const double tr_g = lam.sum();
  if (tr_g < kTraceFloor) return Matrix::Zero(n, n);

  const double eps = eps_pert_per_dim * gd;
  const double floor = eps * tr_g / gd;
  const double log_floor = log2d(floor);

  // log G on its range: G = (K sqrt_rho) V lam^-1/2 gives the eigenvectors,
  // so K^dag log(G) K collapses to small products through W = KdagK sqrt_rho V.
  const double lam_cut = lam.maxCoeff() * 1e-14;
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (lam(i) > lam_cut) keep.push_back(i);
  const int r = int(keep.size());

  Matrix w(n, r);
  Eigen::VectorXd phi(r);
  double tr_log_g = gd * log_floor;
  const Matrix kk_sq = maps.kdag_k * sq;
  for (int idx = 0; idx < r; ++idx) {
    const int i = keep[size_t(idx)];
    w.col(idx) = kk_sq * es.eigenvectors().col(i) / std::sqrt(lam(i));
    const double v = log2d((1.0 - eps) * lam(i) + floor);
    phi(idx) = v - log_floor;
    tr_log_g += phi(idx);
  }
  Matrix kdag_logg_k = w * phi.asDiagonal() * w.adjoint() + log_floor * maps.kdag_k;

  Matrix kdag_logz_k = Matrix::Zero(n, n);
  double tr_log_z = 0;
  for (const Matrix& f : maps.factors) {
    const Matrix block = hermitize(f * rho * f.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eb(block);
    Eigen::VectorXd lv(n);
    for (int i = 0; i < n; ++i) {
      lv(i) = log2d((1.0 - eps) * std::max(eb.eigenvalues()(i), 0.0) + floor);
      tr_log_z += lv(i);
    }
    const Matrix logb = eb.eigenvectors() * lv.asDiagonal() * eb.eigenvectors().adjoint();
    kdag_logz_k += f.adjoint() * logb * f;
  }

  Matrix grad = (1.0 - eps) * (kdag_logg_k - kdag_logz_k) +
                (eps / gd) * (tr_log_g - tr_log_z) * maps.kdag_k;
  return maps.sift_scale * hermitize(grad);
}

Matrix feasible_initial_point(const KeyRateProblem& problem, const Matrix& simulated_state) {
  const auto constraints = to_sdp_constraints(problem.constraints);

  // the truncated simulated state is usually feasible already; projecting it
  // would only round-trip through the solver
  double direct = 0;
  for (const auto& c : constraints)
    direct = std::max(direct, std::abs(real_inner(c.observable, simulated_state) - c.value));
  Eigen::SelfAdjointEigenSolver<Matrix> es(simulated_state, Eigen::EigenvaluesOnly);
  if (direct <= 0.5 * problem.options.feas_residual_limit && es.eigenvalues().minCoeff() > -1e-10)
    return hermitize(simulated_state);

  FeasibilityResult res = feasibility_project(constraints, simulated_state, problem.options.sdp);
  if (res.status == SdpStatus::failed || res.status == SdpStatus::infeasible ||
      res.minimax_residual > problem.options.feas_residual_limit)
    throw std::runtime_error("feasible_initial_point: constraint set is infeasible (residual " +
                             std::to_string(res.minimax_residual) + ")");
  if (res.residual > problem.options.feas_residual_limit)
    throw std::runtime_error("feasible_initial_point: projection residual too large");
  return res.rho;
}

FrankWolfeResult frank_wolfe(const KeyRateProblem& problem, const Matrix& rho0) {
  const auto& opt = problem.options;
  FrankWolfeResult out;
  out.rho = hermitize(rho0);
  out.value = objective_value(problem.maps, out.rho, opt.eps_pert_per_dim);
  out.objective_trace.push_back(out.value);

  const LinearSdpSolver subsolver(to_sdp_constraints(problem.constraints), opt.sdp);
  for (int k = 0; k < opt.max_iters; ++k) {
    const Matrix g = gradient(problem.maps, out.rho, opt.eps_pert_per_dim);
    const SdpResult step = subsolver.solve(g);
    if (step.status == SdpStatus::infeasible)
      throw std::runtime_error("frank_wolfe: direction subproblem infeasible");
    // a direction only has to be a near-feasible point of S; drift it causes
    // shows up in the measured residuals that the second step relaxes against.
    // An unusable direction ends the descent at the current (certifiable) iterate.
    if (step.max_violation > 1e-4) {
      out.iterations = k + 1;
      return out;
    }

    const double g_rho = real_inner(g, out.rho);
    out.gap = g_rho - real_inner(g, step.minimizer);
    out.certified_gap = step.certified() ? g_rho - step.certified_dual : out.gap;
    out.iterations = k;
    if (std::abs(out.gap) < opt.gap_tol) {
      out.converged = true;
      return out;
    }

    const Matrix dir = step.minimizer - out.rho;
    auto phi = [&](double t) {
      return objective_value(problem.maps, hermitize(out.rho + t * dir), opt.eps_pert_per_dim);
    };
    const auto [t_star, f_star] = golden_section(phi, opt.line_search_tol);
    if (f_star > out.value - 1e-14) {
      // no numerical descent left along this direction
      out.iterations = k + 1;
      return out;
    }
    out.rho = hermitize(out.rho + t_star * dir);
    out.value = f_star;
    out.objective_trace.push_back(out.value);
  }
  out.iterations = opt.max_iters;
  return out;
}

double reliable_lower_bound(const KeyRateProblem& problem, const Matrix& rho_star) {
  const auto& cs = problem.constraints;
  const Matrix g = gradient(problem.maps, rho_star, problem.options.eps_pert_per_dim);

  Eigen::VectorXd relax(long(cs.constraints.size()));
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const double resid =
        std::abs(real_inner(cs.constraints[i].observable, rho_star) - cs.constraints[i].value);
    relax(long(i)) = std::max(resid, problem.options.eps_viol_floor);
  }

  LinearSdpProblem sub;
  sub.cost = g;
  sub.constraints = to_sdp_constraints(cs, &relax);
  sub.options = problem.options.sdp;
  const SdpResult res = solve_linear_sdp(sub);
  // the dual certificate is valid by weak duality whenever it is finite, even
  // if the primal iteration stalled short of its own tolerances
  if (!res.certified()) return 0.0;

  const double f_star = objective_value(problem.maps, rho_star, problem.options.eps_pert_per_dim);
  const double bound = f_star - real_inner(g, rho_star) + res.certified_dual;
  return std::max(bound, 0.0);
}

KeyRateReport key_rate(const ProtocolSpec& spec, const ChannelModel& ch, const FockDim& dim,
                       const SolverOptions& options) {
  spec.validate();
  KeyRateReport rep;
  rep.cutoff = dim.cutoff;
  rep.sdp_tol = options.sdp.tol_feas;

  const SimulatedMoments moments = simulated_moments(ch, spec);
  KeyRateProblem problem{build_constraints(spec, moments, dim),
                         spec.detection == Detection::homodyne ? kraus_homodyne(spec, dim)
                                                               : kraus_heterodyne(spec, dim),
                         dim, options};

  if (spec.detection == Detection::homodyne) {
    const HomodyneStats st = ppass_and_error_homodyne(ch, spec);
    rep.p_pass = st.p_pass;
    rep.delta_ec = delta_ec_homodyne(st.error_prob, st.pz0, spec.beta);
  } else {
    const Eigen::Matrix4d pj = heterodyne_region_probs(ch, spec);
    const Eigen::Vector4d px(spec.probabilities[0], spec.probabilities[1], spec.probabilities[2],
                             spec.probabilities[3]);
    rep.p_pass = heterodyne_stats(pj, px).p_pass;
    rep.delta_ec = delta_ec_heterodyne(pj, px, spec.beta);
  }

  const Matrix rho_sim = simulated_joint_state(ch, spec, dim);
  const Matrix rho0 = feasible_initial_point(problem, rho_sim);
  const FrankWolfeResult fw = frank_wolfe(problem, rho0);
  rep.step1_value = fw.value;
  rep.fw_iterations = fw.iterations;
  rep.fw_gap = fw.gap;
  rep.fw_converged = fw.converged;

  rep.lower_bound = reliable_lower_bound(problem, fw.rho);
  for (const auto& c : problem.constraints.constraints)
    rep.max_residual =
        std::max(rep.max_residual, std::abs(real_inner(c.observable, fw.rho) - c.value));

  rep.key_rate = std::max(0.0, rep.lower_bound - rep.p_pass * rep.delta_ec);
  return rep;
}

}  // namespace cvqkd
