#include <doctest.h>

#include <cmath>
#include <random>

#include "cvqkd/entropy.hpp"
#include "cvqkd/linalg.hpp"
#include "cvqkd/solver.hpp"

using namespace cvqkd;

namespace {

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return hermitize(a);
}

Matrix random_density(int n, std::mt19937_64& rng) {
  Matrix a = random_hermitian(n, rng);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

/// Parity-pinching maps: F_0/F_1 project onto even/odd photon sectors, so any
/// parity-commuting state is fixed by the pinching.
PostprocessingMaps parity_maps(int dim) {
  PostprocessingMaps maps;
  maps.key_dim = 2;
  maps.ab_dim = dim;
  Matrix even = Matrix::Zero(dim, dim), odd = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) (k % 2 == 0 ? even : odd)(k, k) = 1.0;
  maps.factors = {even, odd};
  maps.sift_scale = 1.0;
  maps.kdag_k = Matrix::Identity(dim, dim);
  return maps;
}

KeyRateProblem desk_problem(double alpha, double length_km, double xi, FockDim dim) {
  const ChannelModel ch = ChannelModel::from_distance(length_km, xi);
  const ProtocolSpec spec = ProtocolSpec::homodyne_protocol(alpha);
  return KeyRateProblem{build_constraints(spec, simulated_moments(ch, spec), dim),
                        kraus_homodyne(spec, dim), dim, SolverOptions{}};
}

}  // namespace

TEST_CASE("objective on pinching-fixed states vanishes") {
  std::mt19937_64 rng(3);
  const auto maps = parity_maps(6);
  Matrix rho = Matrix::Zero(6, 6);
  // block-diagonal in parity: commutes with both projectors
  rho(0, 0) = 0.3;
  rho(2, 2) = 0.2;
  rho(1, 1) = 0.4;
  rho(3, 3) = 0.1;
  CHECK(std::abs(objective_value(maps, rho)) < 1e-9);

  const Matrix g = gradient(maps, rho);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-6);

  // generic states have strictly positive objective
  const Matrix mixed = random_density(6, rng);
  CHECK(objective_value(maps, mixed) >= -1e-9);
}

TEST_CASE("objective equals the relative-entropy kernel") {
  std::mt19937_64 rng(17);
  const FockDim dim(3);
  const auto spec = ProtocolSpec::homodyne_protocol(0.4);
  const auto maps = kraus_homodyne(spec, dim);
  const Matrix rho = random_density(maps.ab_dim, rng);

  const double eps_scale = 1e-12;
  const double f = objective_value(maps, rho, eps_scale);

  const Matrix g = apply_G(maps, rho);
  const double eps = eps_scale * maps.g_dim();
  const Matrix gp = (1.0 - eps) * g + eps * g.trace().real() / maps.g_dim() *
                                          Matrix::Identity(maps.g_dim(), maps.g_dim());
  const double want = maps.sift_scale * relative_entropy(gp, apply_Z(maps, gp));
  CHECK(std::abs(f - want) < 1e-8);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(29);
  const FockDim dim(3);
  const auto spec = ProtocolSpec::heterodyne_protocol(0.7);
  const auto maps = kraus_heterodyne(spec, dim);
  const int n = maps.ab_dim;

  // strictly positive base state keeps +-h steps inside the PSD cone
  Matrix rho = random_density(n, rng);
  rho = 0.9 * rho + 0.1 * Matrix::Identity(n, n) / n;

  const Matrix g = gradient(maps, rho);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix d = random_hermitian(n, rng);
    d /= d.norm();
    const double fd = (objective_value(maps, rho + h * d) - objective_value(maps, rho - h * d)) /
                      (2 * h);
    const double an = real_inner(g, d);
    CHECK(std::abs(fd - an) < 1e-4 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("frank-wolfe on a fully pinned feasible set") {
  const FockDim dim(1);
  const auto spec = ProtocolSpec::homodyne_protocol(0.4);
  const ChannelModel ch(0.6, 0.0);
  const Matrix target = simulated_joint_state(ch, spec, dim);
  const int n = int(target.rows());

  // pin every Hermitian coordinate of the state
  ConstraintSet cs;
  cs.a_dim = 4;
  cs.b_dim = dim.dim();
  cs.rho_a = alice_reduced_state(spec);
  cs.constraints.push_back({Matrix::Identity(n, n), target.trace().real()});
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Matrix g = Matrix::Zero(n, n);
      if (i == j) {
        g(i, i) = 1;
        cs.constraints.push_back({g, target(i, i).real()});
      } else {
        g(i, j) = 1;
        g(j, i) = 1;
        cs.constraints.push_back({g, 2 * target(i, j).real()});
        Matrix f = Matrix::Zero(n, n);
        f(i, j) = Complex(0, 1);
        f(j, i) = Complex(0, -1);
        cs.constraints.push_back({f, 2 * target(i, j).imag()});
      }
    }
  }

  KeyRateProblem problem{cs, kraus_homodyne(spec, dim), dim, SolverOptions{}};
  const Matrix rho0 = feasible_initial_point(problem, target);
  CHECK((rho0 - target).cwiseAbs().maxCoeff() < 1e-6);

  const FrankWolfeResult fw = frank_wolfe(problem, rho0);
  CHECK(fw.converged);
  CHECK(fw.iterations <= 1);

  const double lb = reliable_lower_bound(problem, fw.rho);
  CHECK(lb <= fw.value + 1e-6);
  CHECK(lb >= fw.value - 1e-4);
}

TEST_CASE("desk-scale homodyne run" * doctest::timeout(600)) {
  const FockDim dim(10);
  KeyRateProblem problem = desk_problem(0.4, 20.0, 0.01, dim);

  const ChannelModel ch = ChannelModel::from_distance(20.0, 0.01);
  const ProtocolSpec spec = ProtocolSpec::homodyne_protocol(0.4);
  const Matrix rho_sim = simulated_joint_state(ch, spec, dim);

  const Matrix rho0 = feasible_initial_point(problem, rho_sim);
  CHECK(std::abs(rho0.trace().real() - 1.0) < 1e-9);

  // the simulated state itself is nearly feasible
  double presidual = 0;
  for (const auto& c : problem.constraints.constraints)
    presidual = std::max(presidual, std::abs(real_inner(c.observable, rho_sim) - c.value));
  CHECK(presidual < 1e-6);

  const FrankWolfeResult fw = frank_wolfe(problem, rho0);
  CHECK(fw.converged);
  CHECK(fw.iterations < 300);
  CHECK(std::abs(fw.gap) < 1e-6);
  for (std::size_t k = 1; k < fw.objective_trace.size(); ++k)
    CHECK(fw.objective_trace[k] <= fw.objective_trace[k - 1] + 1e-10);

  const double lb = reliable_lower_bound(problem, fw.rho);
  CHECK(lb <= fw.value + 1e-6);
  CHECK(lb > 0);

  SUBCASE("full pipeline gives a positive rate") {
    const KeyRateReport rep = key_rate(spec, ch, dim);
    CHECK(rep.key_rate > 0);
    CHECK(rep.lower_bound <= rep.step1_value + 1e-6);
    CHECK(rep.p_pass == doctest::Approx(1.0));
    CHECK(rep.status == "ok");
  }
}

TEST_CASE("deliberately inconsistent statistics are rejected") {
  const FockDim dim(4);
  KeyRateProblem problem = desk_problem(0.4, 20.0, 0.01, dim);
  // the photon-number target of state 0 sits at slot 2 of the moment block
  problem.constraints.constraints[2].value = -0.1;
  const ChannelModel ch = ChannelModel::from_distance(20.0, 0.01);
  const Matrix rho_sim = simulated_joint_state(ch, ProtocolSpec::homodyne_protocol(0.4), dim);
  CHECK_THROWS_AS(feasible_initial_point(problem, rho_sim), std::runtime_error);
}
