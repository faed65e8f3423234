#include "cvqkd/lossonly.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/channel.hpp"
#include "cvqkd/entropy.hpp"

namespace cvqkd {

namespace {

void check_oracle_scope(const ProtocolSpec& spec, double eta) {
  if (eta <= 0 || eta > 1) throw std::invalid_argument("lossonly: eta must be in (0, 1]");
  if (spec.delta_c != 0 || spec.delta_a != 0 || spec.delta_p != 0)
    throw std::invalid_argument("lossonly: oracle is defined without postselection");
  if (spec.num_states() != 4) throw std::invalid_argument("lossonly: quaternary constellation required");
}

double entropy2x2(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return shannon_entropy(ev);
}

}  // namespace

Eigen::VectorXd weighted_gram_eigenvalues(const Eigen::VectorXd& weights, const Matrix& gram) {
  const int k = int(weights.size());
  Matrix m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      m(i, j) = std::sqrt(std::max(weights(i), 0.0) * std::max(weights(j), 0.0)) * gram(i, j);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double entropy_from_gram(const Eigen::VectorXd& weights, const Matrix& gram) {
  return shannon_entropy(weighted_gram_eigenvalues(weights, gram).cwiseMax(0.0));
}

double holevo_lossonly(const ProtocolSpec& spec, double eta) {
  check_oracle_scope(spec, eta);
  const double a = spec.alpha;

  if (spec.detection == Detection::homodyne) {
    // two-dimensional representation of Eve's +-sqrt(1-eta) alpha states
    const double t = (1.0 - eta) * a * a;
    const double c0 = std::exp(-0.5 * t) * std::sqrt(std::cosh(t));
    const double c1 = std::exp(-0.5 * t) * std::sqrt(std::sinh(t));
    const double e = 0.5 * std::erfc(std::sqrt(2.0 * eta) * a);

    Eigen::Vector2d e0(c0, c1), e1(c0, -c1);
    auto cond_state = [&](double w0, double w1) {
      return Eigen::Matrix2d(w0 * e0 * e0.transpose() + w1 * e1 * e1.transpose());
    };
    // P(x|z): z = 0 collects (1-e) of x=0 and e of x=1
    const Eigen::Matrix2d rho_e0 = cond_state(1.0 - e, e);
    const Eigen::Matrix2d rho_e1 = cond_state(e, 1.0 - e);
    const Eigen::Matrix2d rho_bar = 0.5 * (rho_e0 + rho_e1);
    return entropy2x2(rho_bar) - 0.5 * entropy2x2(rho_e0) - 0.5 * entropy2x2(rho_e1);
  }

  // protocol 2: Eve's four conditional coherent states
  std::vector<Complex> eve(4);
  for (int k = 0; k < 4; ++k) eve[size_t(k)] = std::sqrt(1.0 - eta) * spec.constellation[size_t(k)];
  Matrix gram(4, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) gram(k, l) = coherent_overlap(eve[size_t(l)], eve[size_t(k)]);

  const Eigen::Matrix4d pj = heterodyne_region_probs(ChannelModel(eta, 0.0), spec);
  const Eigen::Vector4d px(spec.probabilities[0], spec.probabilities[1], spec.probabilities[2],
                           spec.probabilities[3]);
  Eigen::Vector4d pz = Eigen::Vector4d::Zero();
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) pz(j) += px(k) * pj(j, k);

  double chi = entropy_from_gram(px, gram);
  for (int j = 0; j < 4; ++j) {
    if (pz(j) <= 0) continue;
    Eigen::Vector4d w;
    for (int k = 0; k < 4; ++k) w(k) = px(k) * pj(j, k) / pz(j);
    chi -= pz(j) * entropy_from_gram(w, gram);
  }
  return chi;
}

double mutual_information_lossonly(const ProtocolSpec& spec, double eta) {
  check_oracle_scope(spec, eta);
  if (spec.detection == Detection::homodyne) {
    const double e = 0.5 * std::erfc(std::sqrt(2.0 * eta) * spec.alpha);
    return 1.0 - binary_entropy(e);
  }
  const Eigen::Matrix4d pj = heterodyne_region_probs(ChannelModel(eta, 0.0), spec);
  const Eigen::Vector4d px(spec.probabilities[0], spec.probabilities[1], spec.probabilities[2],
                           spec.probabilities[3]);
  return heterodyne_stats(pj, px).mutual_information();
}

double dw_rate_lossonly(const ProtocolSpec& spec, double eta, double beta) {
  if (beta <= 0 || beta > 1) throw std::invalid_argument("dw_rate_lossonly: beta out of range");
  const double rate = beta * mutual_information_lossonly(spec, eta) - holevo_lossonly(spec, eta);
  return std::max(0.0, rate);
}

double plob_bound(double eta) {
  if (eta <= 0 || eta >= 1) throw std::invalid_argument("plob_bound: eta must be in (0, 1)");
  return -std::log2(1.0 - eta);
}

}  // namespace cvqkd
