#pragma once
#include "cvqkd/protocol.hpp"

namespace cvqkd {

/// Phase-invariant Gaussian channel: transmittance eta and excess noise xi
/// referenced to the channel input (the received-signal value is eta*xi).
struct ChannelModel {
  double eta = 1.0;
  double xi = 0.0;

  ChannelModel(double eta_, double xi_);
  /// eta = eta_det * 10^(-0.02 L) at 0.2 dB/km.
  static ChannelModel from_distance(double length_km, double xi, double eta_det = 1.0);

  double delta() const { return eta * xi; }
};

/// Channel expectations of q, p, n, d for every constellation state.
SimulatedMoments simulated_moments(const ChannelModel& ch, const ProtocolSpec& spec);

/// Truncation of sum_ij sqrt(p_i p_j) |i><j| (x) E(|phi_i><phi_j|) for the
/// Gaussian channel E; entries within the cutoff are quadrature-exact.
Matrix simulated_joint_state(const ChannelModel& ch, const ProtocolSpec& spec, const FockDim& dim);

struct HomodyneStats {
  double p_pass;     // probability a key round survives postselection
  double error_prob; // bit mismatch probability conditioned on passing
  double pz0;        // Bob's postselected marginal P(z = 0)
};

HomodyneStats ppass_and_error_homodyne(const ChannelModel& ch, const ProtocolSpec& spec);

/// delta_EC = (1 - beta) h(pz0) + beta h(e).
double delta_ec_homodyne(double error_prob, double pz0, double beta);

/// Unnormalized P(z = j | x = k), rows j, columns k, by 2-D quadrature of the
/// displaced Q function over the key regions. Throws if the quadrature cannot
/// certify 1e-9 absolute accuracy.
Eigen::Matrix4d heterodyne_region_probs(const ChannelModel& ch, const ProtocolSpec& spec);

struct HeterodyneStats {
  Eigen::Matrix4d p_given_x;  // renormalized columns
  double p_pass;
  double h_z;
  double h_z_given_x;
  double mutual_information() const { return h_z - h_z_given_x; }
};

HeterodyneStats heterodyne_stats(const Eigen::Matrix4d& p_unnorm, const Eigen::Vector4d& px);

/// delta_EC from the renormalized quaternary distribution.
double delta_ec_heterodyne(const Eigen::Matrix4d& p_unnorm, const Eigen::Vector4d& px, double beta);

}  // namespace cvqkd
