#include "cvqkd/protocol.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/linalg.hpp"

namespace cvqkd {

namespace {

const Complex kI(0.0, 1.0);

void require_quaternary(const ProtocolSpec& spec, const std::vector<Complex>& expected,
                        const char* where) {
  if (spec.constellation.size() != 4)
    throw std::invalid_argument(std::string(where) + ": key map implemented for quaternary constellations only");
  for (std::size_t k = 0; k < 4; ++k) {
    if (std::abs(spec.constellation[k] - expected[k]) > 1e-12)
      throw std::invalid_argument(std::string(where) + ": constellation does not match the protocol ordering");
  }
}

}  // namespace

ProtocolSpec ProtocolSpec::homodyne_protocol(double alpha) {
  ProtocolSpec s;
  s.detection = Detection::homodyne;
  s.alpha = alpha;
  s.constellation = {Complex(alpha, 0), Complex(-alpha, 0), alpha * kI, -alpha * kI};
  s.probabilities = {0.25, 0.25, 0.25, 0.25};
  s.validate();
  return s;
}

ProtocolSpec ProtocolSpec::heterodyne_protocol(double alpha) {
  ProtocolSpec s;
  s.detection = Detection::heterodyne;
  s.alpha = alpha;
  s.constellation = {Complex(alpha, 0), alpha * kI, Complex(-alpha, 0), -alpha * kI};
  s.probabilities = {0.25, 0.25, 0.25, 0.25};
  s.validate();
  return s;
}

void ProtocolSpec::validate() const {
  if (alpha <= 0) throw std::invalid_argument("ProtocolSpec: alpha must be > 0");
  if (constellation.empty() || constellation.size() != probabilities.size())
    throw std::invalid_argument("ProtocolSpec: constellation/probability size mismatch");
  double sum = 0;
  for (double p : probabilities) {
    if (p < 0) throw std::invalid_argument("ProtocolSpec: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("ProtocolSpec: probabilities must sum to 1");
  if (delta_c < 0) throw std::invalid_argument("ProtocolSpec: delta_c must be >= 0");
  if (delta_a < 0) throw std::invalid_argument("ProtocolSpec: delta_a must be >= 0");
  if (delta_p < 0 || delta_p > M_PI / 4)
    throw std::invalid_argument("ProtocolSpec: delta_p must be in [0, pi/4]");
  if (beta <= 0 || beta > 1) throw std::invalid_argument("ProtocolSpec: beta must be in (0, 1]");
}

Complex coherent_overlap(Complex a, Complex b) {
  return std::exp(-0.5 * (std::norm(a) + std::norm(b)) + std::conj(b) * a);
}

Matrix alice_reduced_state(const ProtocolSpec& spec) {
  const int l = int(spec.num_states());
  Matrix rho(l, l);
  for (int x = 0; x < l; ++x)
    for (int xp = 0; xp < l; ++xp)
      rho(x, xp) = std::sqrt(spec.probabilities[size_t(x)] * spec.probabilities[size_t(xp)]) *
                   coherent_overlap(spec.constellation[size_t(x)], spec.constellation[size_t(xp)]);
  return rho;
}

ConstraintSet build_constraints(const ProtocolSpec& spec, const SimulatedMoments& moments,
                                const FockDim& dim) {
  spec.validate();
  const int l = int(spec.num_states());
  if (moments.per_state.size() != size_t(l))
    throw std::invalid_argument("build_constraints: missing moments for some constellation state");
  const int nb = dim.dim();

  ConstraintSet cs;
  cs.a_dim = l;
  cs.b_dim = nb;
  cs.rho_a = alice_reduced_state(spec);

  const QuadratureOps ops = build_observables(dim);
  const Matrix eye_b = Matrix::Identity(nb, nb);

  for (int x = 0; x < l; ++x) {
    Matrix proj = Matrix::Zero(l, l);
    proj(x, x) = 1.0;
    const double px = spec.probabilities[size_t(x)];
    const auto& m = moments.per_state[size_t(x)];
    cs.constraints.push_back({kron(proj, ops.q.mat), px * m.q});
    cs.constraints.push_back({kron(proj, ops.p.mat), px * m.p});
    cs.constraints.push_back({kron(proj, ops.n.mat), px * m.n});
    cs.constraints.push_back({kron(proj, ops.d.mat), px * m.d});
  }

  cs.constraints.push_back({Matrix::Identity(l * nb, l * nb), 1.0});

  // Tr_B rho = rho_A, split into real scalar equalities.
  for (int i = 0; i < l; ++i) {
    for (int j = i; j < l; ++j) {
      Matrix eij = Matrix::Zero(l, l);
      if (i == j) {
        eij(i, i) = 1.0;
        cs.constraints.push_back({kron(eij, eye_b), cs.rho_a(i, i).real()});
      } else {
        eij(i, j) = 1.0;
        eij(j, i) = 1.0;
        cs.constraints.push_back({kron(eij, eye_b), 2.0 * cs.rho_a(i, j).real()});
        Matrix fij = Matrix::Zero(l, l);
        fij(i, j) = kI;
        fij(j, i) = -kI;
        cs.constraints.push_back({kron(fij, eye_b), 2.0 * cs.rho_a(i, j).imag()});
      }
    }
  }
  return cs;
}

namespace {

PostprocessingMaps finalize_maps(std::vector<Matrix> factors, int key_dim, double sift_scale) {
  PostprocessingMaps maps;
  maps.key_dim = key_dim;
  maps.ab_dim = int(factors.front().rows());
  maps.factors = std::move(factors);
  maps.sift_scale = sift_scale;
  maps.kdag_k = Matrix::Zero(maps.ab_dim, maps.ab_dim);
  for (const auto& f : maps.factors) maps.kdag_k += f.adjoint() * f;
  maps.kdag_k = hermitize(maps.kdag_k);
  Eigen::SelfAdjointEigenSolver<Matrix> es(maps.kdag_k, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().maxCoeff() > 1.0 + 1e-9)
    throw std::runtime_error("postprocessing map is not trace non-increasing");
  return maps;
}

}  // namespace

PostprocessingMaps kraus_homodyne(const ProtocolSpec& spec, const FockDim& dim) {
  if (spec.detection != Detection::homodyne)
    throw std::invalid_argument("kraus_homodyne: spec is not a homodyne protocol");
  const double a = spec.alpha;
  require_quaternary(spec, {Complex(a, 0), Complex(-a, 0), a * kI, -a * kI}, "kraus_homodyne");

  const auto [i0, i1] = interval_operators(spec.delta_c, dim);
  Matrix proj = Matrix::Zero(4, 4);
  proj(0, 0) = 1.0;
  proj(1, 1) = 1.0;

  std::vector<Matrix> factors;
  factors.push_back(kron(proj, psd_sqrt(i0).mat));
  factors.push_back(kron(proj, psd_sqrt(i1).mat));

  const double key_mass = spec.probabilities[0] + spec.probabilities[1];
  return finalize_maps(std::move(factors), 2, 1.0 / key_mass);
}

PostprocessingMaps kraus_heterodyne(const ProtocolSpec& spec, const FockDim& dim) {
  if (spec.detection != Detection::heterodyne)
    throw std::invalid_argument("kraus_heterodyne: spec is not a heterodyne protocol");
  const double a = spec.alpha;
  require_quaternary(spec, {Complex(a, 0), a * kI, Complex(-a, 0), -a * kI}, "kraus_heterodyne");

  const auto regions = region_operators(spec.delta_a, spec.delta_p, dim);
  const Matrix eye_a = Matrix::Identity(4, 4);
  std::vector<Matrix> factors;
  for (const auto& r : regions) factors.push_back(kron(eye_a, psd_sqrt(r).mat));
  return finalize_maps(std::move(factors), 4, 1.0);
}

Matrix apply_G(const PostprocessingMaps& maps, const Matrix& rho_ab) {
  const int n = maps.ab_dim;
  if (rho_ab.rows() != n || rho_ab.cols() != n)
    throw std::invalid_argument("apply_G: state dimension mismatch");
  Matrix g = Matrix::Zero(maps.g_dim(), maps.g_dim());
  for (int z = 0; z < maps.key_dim; ++z) {
    const Matrix left = maps.factors[size_t(z)] * rho_ab;
    for (int zp = 0; zp < maps.key_dim; ++zp)
      g.block(z * n, zp * n, n, n) = left * maps.factors[size_t(zp)].adjoint();
  }
  return g;
}

Matrix apply_Z(const PostprocessingMaps& maps, const Matrix& sigma) {
  const int n = maps.ab_dim;
  if (sigma.rows() != maps.g_dim() || sigma.cols() != maps.g_dim())
    throw std::invalid_argument("apply_Z: dimension mismatch");
  Matrix out = Matrix::Zero(sigma.rows(), sigma.cols());
  for (int z = 0; z < maps.key_dim; ++z)
    out.block(z * n, z * n, n, n) = sigma.block(z * n, z * n, n, n);
  return out;
}

}  // namespace cvqkd
