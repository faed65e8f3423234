#pragma once
#include "cvqkd/protocol.hpp"

namespace cvqkd {

/// Eigenvalues of sum_k w_k |v_k><v_k| for normalized, possibly non-orthogonal
/// vectors, computed from the weighted Gram matrix.
Eigen::VectorXd weighted_gram_eigenvalues(const Eigen::VectorXd& weights, const Matrix& gram);

/// von Neumann entropy (bits) of such a mixture.
double entropy_from_gram(const Eigen::VectorXd& weights, const Matrix& gram);

/// Holevo information chi(Z:E) in bits under the beam-splitting attack on the
/// pure-loss channel, without postselection. Protocol 1 uses the paper's
/// two-dimensional representation of the +-alpha pair; protocol 2 works on the
/// spectrum of the 4x4 weighted Gram matrix.
double holevo_lossonly(const ProtocolSpec& spec, double eta);

/// Devetak-Winter rate max(0, beta I(X;Z) - chi(Z:E)) for the loss-only channel.
double dw_rate_lossonly(const ProtocolSpec& spec, double eta, double beta);

/// Classical mutual information I(X;Z) in bits for the loss-only channel.
double mutual_information_lossonly(const ProtocolSpec& spec, double eta);

/// Repeaterless secret-key capacity -log2(1 - eta); requires eta in (0, 1).
double plob_bound(double eta);

}  // namespace cvqkd
