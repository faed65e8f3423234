#include "cvqkd/entropy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvqkd {

namespace {
constexpr double kLog2 = 0.6931471805599453;
constexpr double kSupportTol = 1e-12;

double xlog2x(double x) { return x > 0 ? x * std::log(x) / kLog2 : 0.0; }
}  // namespace

double binary_entropy(double e) {
  if (e < 0 || e > 1) throw std::domain_error("binary_entropy: argument outside [0,1]");
  return -xlog2x(e) - xlog2x(1 - e);
}

double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) < -1e-12) throw std::domain_error("shannon_entropy: negative probability");
    h -= xlog2x(std::max(p(i), 0.0));
  }
  return h;
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double h = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) h -= xlog2x(std::max(es.eigenvalues()(i), 0.0));
  return h;
}

double relative_entropy(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma);

  double tr_rho_log_rho = 0;
  for (int i = 0; i < er.eigenvalues().size(); ++i)
    tr_rho_log_rho += xlog2x(std::max(er.eigenvalues()(i), 0.0));

  // Tr[rho log2 sigma] in sigma's eigenbasis; weight on a null direction => +inf
  const Eigen::MatrixXcd u = es.eigenvectors();
  const Eigen::MatrixXcd rho_in_s = u.adjoint() * rho * u;
  double tr_rho_log_sigma = 0;
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = rho_in_s(i, i).real();
    const double lam = es.eigenvalues()(i);
    if (lam <= scale * kSupportTol) {
      if (w > kSupportTol) return std::numeric_limits<double>::infinity();
      continue;
    }
    tr_rho_log_sigma += w * std::log(lam) / kLog2;
  }
  return tr_rho_log_rho - tr_rho_log_sigma;
}

}  // namespace cvqkd
