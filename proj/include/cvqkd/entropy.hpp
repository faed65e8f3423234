#pragma once
#include <Eigen/Dense>

namespace cvqkd {

/// Binary entropy h(e) in bits; h(0) = h(1) = 0.
double binary_entropy(double e);

/// Shannon entropy of a (sub)normalized distribution, in bits.
double shannon_entropy(const Eigen::VectorXd& p);

/// von Neumann entropy -Tr(rho log2 rho), extended to subnormalized PSD inputs.
double von_neumann_entropy(const Eigen::MatrixXcd& rho);

/// Quantum relative entropy D(rho||sigma) in bits. Returns +inf when rho has
/// support outside the support of sigma.
double relative_entropy(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

}  // namespace cvqkd
