#pragma once
#include <Eigen/Dense>
#include <array>
#include <complex>
#include <utility>
#include <vector>

namespace cvqkd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Truncated single-mode Fock space holding photon numbers 0..cutoff.
struct FockDim {
  explicit FockDim(int cutoff_);
  int cutoff;
  int dim() const { return cutoff + 1; }
};

/// Matrix of an operator compressed onto the truncated Fock space.
/// When `hermitian` is set the matrix equals its conjugate transpose
/// to 1e-12 entrywise (checked at construction).
struct TruncatedOperator {
  Matrix mat;
  bool hermitian = false;

  static TruncatedOperator hermitian_op(Matrix m);
  static TruncatedOperator general_op(Matrix m);
};

struct QuadratureOps {
  TruncatedOperator q, p, n, d;
};

/// Annihilation operator: sqrt(n) on the (n-1, n) superdiagonal.
TruncatedOperator annihilation_matrix(const FockDim& dim);

/// q, p, n and d = q^2 - p^2, each from exact Fock matrix elements.
QuadratureOps build_observables(const FockDim& dim);

/// (<n|amplitude>)_{n=0..cutoff}; squared norm approaches 1 as the cutoff grows.
Vector coherent_fock_vector(Complex amplitude, const FockDim& dim);

/// <q|n>: Hermite-function value via the normalized three-term recurrence.
double position_overlap(int n, double q);

/// psi_0(q) .. psi_nmax(q) in one recurrence sweep.
std::vector<double> hermite_function_column(int nmax, double q);

/// Homodyne acceptance-interval operators (I_0, I_1) for threshold delta_c >= 0.
std::pair<TruncatedOperator, TruncatedOperator> interval_operators(double delta_c,
                                                                   const FockDim& dim);

/// Heterodyne key-region operators R_0..R_3 for radial/angular postselection
/// cuts delta_a >= 0 and delta_p in [0, pi/4].
std::array<TruncatedOperator, 4> region_operators(double delta_a, double delta_p,
                                                  const FockDim& dim);

/// Square root of a PSD operator; eigenvalues in [-1e-10, 0) are clamped to 0,
/// anything below -1e-10 throws (an invalid measurement element).
TruncatedOperator psd_sqrt(const TruncatedOperator& m);

}  // namespace cvqkd
