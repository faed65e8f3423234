#include "cvqkd/fock.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {
constexpr double kHermTol = 1e-12;
constexpr double kEigClampTol = 1e-10;
}  // namespace

FockDim::FockDim(int cutoff_) : cutoff(cutoff_) {
  if (cutoff < 0) throw std::invalid_argument("FockDim: cutoff must be >= 0");
}

TruncatedOperator TruncatedOperator::hermitian_op(Matrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_op: square matrix required");
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermTol) throw std::invalid_argument("hermitian_op: matrix is not Hermitian");
  return TruncatedOperator{std::move(m), true};
}

TruncatedOperator TruncatedOperator::general_op(Matrix m) {
  return TruncatedOperator{std::move(m), false};
}

TruncatedOperator annihilation_matrix(const FockDim& dim) {
  const int d = dim.dim();
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return TruncatedOperator::general_op(std::move(a));
}

QuadratureOps build_observables(const FockDim& dim) {
  const int d = dim.dim();
  const double s = 1.0 / std::sqrt(2.0);
  Matrix q = Matrix::Zero(d, d), p = Matrix::Zero(d, d);
  Matrix n = Matrix::Zero(d, d), dd = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    n(k, k) = double(k);
    if (k + 1 < d) {
      const double r = std::sqrt(double(k + 1));
      q(k, k + 1) = s * r;
      q(k + 1, k) = s * r;
      p(k, k + 1) = Complex(0, -s * r);
      p(k + 1, k) = Complex(0, s * r);
    }
    if (k + 2 < d) {
      const double r = std::sqrt(double(k + 1) * double(k + 2));
      dd(k, k + 2) = r;
      dd(k + 2, k) = r;
    }
  }
  return QuadratureOps{TruncatedOperator::hermitian_op(std::move(q)),
                       TruncatedOperator::hermitian_op(std::move(p)),
                       TruncatedOperator::hermitian_op(std::move(n)),
                       TruncatedOperator::hermitian_op(std::move(dd))};
}

Vector coherent_fock_vector(Complex amplitude, const FockDim& dim) {
  const int d = dim.dim();
  Vector v(d);
  v(0) = std::exp(-0.5 * std::norm(amplitude));
  for (int n = 1; n < d; ++n) v(n) = v(n - 1) * amplitude / std::sqrt(double(n));
  return v;
}

std::vector<double> hermite_function_column(int nmax, double q) {
  if (nmax < 0) throw std::invalid_argument("hermite_function_column: nmax must be >= 0");
  std::vector<double> psi(size_t(nmax) + 1);
  psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * q * q);
  if (nmax >= 1) psi[1] = std::sqrt(2.0) * q * psi[0];
  for (int n = 1; n < nmax; ++n) {
    psi[size_t(n) + 1] = std::sqrt(2.0 / (n + 1)) * q * psi[size_t(n)] -
                         std::sqrt(double(n) / (n + 1)) * psi[size_t(n) - 1];
  }
  return psi;
}

double position_overlap(int n, double q) {
  if (n < 0) throw std::invalid_argument("position_overlap: n must be >= 0");
  return hermite_function_column(n, q)[size_t(n)];
}

std::pair<TruncatedOperator, TruncatedOperator> interval_operators(double delta_c,
                                                                   const FockDim& dim) {
  if (delta_c < 0) throw std::invalid_argument("interval_operators: delta_c must be >= 0");
  const int d = dim.dim();
  // Hermite functions of index <= cutoff are negligible beyond sqrt(2*cutoff+1) + 8.
  const double qmax = std::sqrt(2.0 * dim.cutoff + 1.0) + 8.0;
  using boost::math::quadrature::gauss_kronrod;

  auto entry = [&](int m, int n, double lo, double hi) {
    auto f = [&](double q) {
      const auto psi = hermite_function_column(std::max(m, n), q);
      return psi[size_t(m)] * psi[size_t(n)];
    };
    return gauss_kronrod<double, 15>::integrate(f, lo, hi, 12, 1e-13);
  };

  Matrix i0 = Matrix::Zero(d, d), i1 = Matrix::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = m; n < d; ++n) {
      const double v0 = entry(m, n, delta_c, qmax);
      const double v1 = entry(m, n, -qmax, -delta_c);
      i0(m, n) = v0;
      i0(n, m) = v0;
      i1(m, n) = v1;
      i1(n, m) = v1;
    }
  }
  return {TruncatedOperator::hermitian_op(std::move(i0)),
          TruncatedOperator::hermitian_op(std::move(i1))};
}

std::array<TruncatedOperator, 4> region_operators(double delta_a, double delta_p,
                                                  const FockDim& dim) {
  if (delta_a < 0) throw std::invalid_argument("region_operators: delta_a must be >= 0");
  if (delta_p < 0 || delta_p > M_PI / 4)
    throw std::invalid_argument("region_operators: delta_p must be in [0, pi/4]");
  const int d = dim.dim();

  // radial(m,n) = Gamma((m+n)/2 + 1, delta_a^2) / (2 pi sqrt(m! n!))
  Eigen::MatrixXd radial(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = m; n < d; ++n) {
      const double s = 0.5 * (m + n) + 1.0;
      const double g = boost::math::tgamma(s, delta_a * delta_a);
      const double norm = std::exp(-0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0)));
      radial(m, n) = g * norm / (2.0 * M_PI);
      radial(n, m) = radial(m, n);
    }
  }

  const double half_width = M_PI / 4 - delta_p;
  auto angular = [&](int k) {
    if (k == 0) return 2.0 * half_width;
    return 2.0 * std::sin(k * half_width) / double(k);
  };

  std::array<TruncatedOperator, 4> out{
      TruncatedOperator::hermitian_op(Matrix::Zero(d, d)),
      TruncatedOperator::hermitian_op(Matrix::Zero(d, d)),
      TruncatedOperator::hermitian_op(Matrix::Zero(d, d)),
      TruncatedOperator::hermitian_op(Matrix::Zero(d, d))};
  for (int j = 0; j < 4; ++j) {
    Matrix r = Matrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        const int k = m - n;
        const Complex phase = std::polar(1.0, k * j * M_PI / 2.0);
        r(m, n) = phase * angular(k) * radial(m, n);
      }
    }
    out[size_t(j)] = TruncatedOperator::hermitian_op(std::move(r));
  }
  return out;
}

TruncatedOperator psd_sqrt(const TruncatedOperator& m) {
  if (!m.hermitian) throw std::invalid_argument("psd_sqrt: operator must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat);
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kEigClampTol)
      throw std::domain_error("psd_sqrt: eigenvalue below -1e-10, operator is not PSD");
    if (ev(i) < 0) ev(i) = 0;
  }
  Matrix root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  // enforce exact Hermiticity against roundoff
  root = 0.5 * (root + root.adjoint()).eval();
  return TruncatedOperator::hermitian_op(std::move(root));
}

}  // namespace cvqkd
