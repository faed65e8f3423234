#include "cvqkd/channel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "cvqkd/entropy.hpp"
#include "cvqkd/linalg.hpp"

namespace cvqkd {

namespace {

/// Gauss-Hermite nodes/weights (weight e^{-x^2}) via the Jacobi matrix.
void gauss_hermite(int order, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(0.5 * k);
    j(k - 1, k) = b;
    j(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  nodes = es.eigenvalues();
  weights.resize(order);
  for (int k = 0; k < order; ++k)
    weights(k) = std::sqrt(M_PI) * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
}

/// Pure-loss channel on a coherent dyad: |u><v| -> scale * |sqrt(eta) u><sqrt(eta) v|.
Complex loss_scale(Complex u, Complex v, double eta) {
  const double t = 1.0 - eta;
  return std::exp(-0.5 * t * (std::norm(u) + std::norm(v)) + t * std::conj(v) * u);
}

double gaussian_tail(double mean, double sigma, double from) {
  return 0.5 * std::erfc((from - mean) / (sigma * std::sqrt(2.0)));
}

}  // namespace

ChannelModel::ChannelModel(double eta_, double xi_) : eta(eta_), xi(xi_) {
  if (eta <= 0 || eta > 1) throw std::invalid_argument("ChannelModel: eta must be in (0, 1]");
  if (xi < 0) throw std::invalid_argument("ChannelModel: xi must be >= 0");
}

ChannelModel ChannelModel::from_distance(double length_km, double xi, double eta_det) {
  if (length_km < 0) throw std::invalid_argument("ChannelModel: negative distance");
  return ChannelModel(eta_det * std::pow(10.0, -0.02 * length_km), xi);
}

SimulatedMoments simulated_moments(const ChannelModel& ch, const ProtocolSpec& spec) {
  SimulatedMoments m;
  m.per_state.reserve(spec.num_states());
  for (const Complex& a : spec.constellation) {
    SimulatedMoments::Entry e;
    e.q = std::sqrt(2.0 * ch.eta) * a.real();
    e.p = std::sqrt(2.0 * ch.eta) * a.imag();
    e.n = ch.eta * std::norm(a) + 0.5 * ch.eta * ch.xi;
    e.d = ch.eta * (a * a + std::conj(a) * std::conj(a)).real();
    m.per_state.push_back(e);
  }
  return m;
}

Matrix simulated_joint_state(const ChannelModel& ch, const ProtocolSpec& spec, const FockDim& dim) {
  const int l = int(spec.num_states());
  const int nb = dim.dim();
  const double eta = ch.eta;
  Matrix rho = Matrix::Zero(l * nb, l * nb);

  auto put_block = [&](int i, int j, const Matrix& block) {
    const double w = std::sqrt(spec.probabilities[size_t(i)] * spec.probabilities[size_t(j)]);
    rho.block(i * nb, j * nb, nb, nb) = w * block;
  };

  if (ch.xi == 0.0) {
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) {
        const Complex u = spec.constellation[size_t(i)], v = spec.constellation[size_t(j)];
        const Vector cu = coherent_fock_vector(std::sqrt(eta) * u, dim);
        const Vector cv = coherent_fock_vector(std::sqrt(eta) * v, dim);
        put_block(i, j, loss_scale(u, v, eta) * (cu * cv.adjoint()));
      }
    }
    return hermitize(rho);
  }

  // Additive Gaussian displacement noise (variance xi/2) followed by pure loss.
  const double vc = 0.5 * ch.xi;
  const int order = 36;
  Eigen::VectorXd x, w;
  gauss_hermite(order, x, w);
  const double sn = std::sqrt(vc);

  for (int i = 0; i < l; ++i) {
    for (int j = i; j < l; ++j) {
      const Complex a = spec.constellation[size_t(i)], b = spec.constellation[size_t(j)];
      Matrix block = Matrix::Zero(nb, nb);
      for (int kx = 0; kx < order; ++kx) {
        for (int ky = 0; ky < order; ++ky) {
          const Complex nu = sn * Complex(x(kx), x(ky));
          const Complex u = a + nu, v = b + nu;
          // displacement phase on the dyad, then exact loss on it
          const Complex phase =
              std::exp(0.5 * (nu * std::conj(a - b) - std::conj(nu) * (a - b)));
          const Complex scale = phase * loss_scale(u, v, eta) * w(kx) * w(ky) / M_PI;
          const Vector cu = coherent_fock_vector(std::sqrt(eta) * u, dim);
          const Vector cv = coherent_fock_vector(std::sqrt(eta) * v, dim);
          block.noalias() += scale * (cu * cv.adjoint());
        }
      }
      put_block(i, j, block);
      if (j != i) put_block(j, i, Matrix(block.adjoint()));
    }
  }
  return hermitize(rho);
}

HomodyneStats ppass_and_error_homodyne(const ChannelModel& ch, const ProtocolSpec& spec) {
  if (spec.detection != Detection::homodyne)
    throw std::invalid_argument("ppass_and_error_homodyne: homodyne spec required");
  const double m = std::sqrt(2.0 * ch.eta) * spec.alpha;
  const double sigma = std::sqrt(0.5 * (1.0 + ch.eta * ch.xi));
  const double dc = spec.delta_c;

  const double keep_right_0 = gaussian_tail(m, sigma, dc);    // P(q >= dc | x=0)
  const double keep_left_0 = gaussian_tail(-m, sigma, dc);    // P(q <= -dc | x=0), by symmetry
  const double p_pass = keep_right_0 + keep_left_0;           // same for both key states
  if (p_pass <= 0) return {0.0, 0.5, 0.5};
  const double e = keep_left_0 / p_pass;
  const double pz0 = keep_right_0 / p_pass * 0.5 + keep_left_0 / p_pass * 0.5;
  return {p_pass, e, pz0};
}

double delta_ec_homodyne(double error_prob, double pz0, double beta) {
  if (error_prob < 0 || error_prob > 1) throw std::domain_error("delta_ec_homodyne: bad error probability");
  if (beta <= 0 || beta > 1) throw std::domain_error("delta_ec_homodyne: bad beta");
  return (1.0 - beta) * binary_entropy(pz0) + beta * binary_entropy(error_prob);
}

Eigen::Matrix4d heterodyne_region_probs(const ChannelModel& ch, const ProtocolSpec& spec) {
  if (spec.detection != Detection::heterodyne)
    throw std::invalid_argument("heterodyne_region_probs: heterodyne spec required");
  using boost::math::quadrature::gauss_kronrod;

  const double s = 1.0 + 0.5 * ch.eta * ch.xi;
  const double half_width = M_PI / 4 - spec.delta_p;
  const double gmax = std::sqrt(ch.eta) * spec.alpha + 8.0 * std::sqrt(s);

  Eigen::Matrix4d probs = Eigen::Matrix4d::Zero();
  if (half_width <= 0) return probs;

  double err_total = 0;
  for (int k = 0; k < 4; ++k) {
    const Complex mu = std::sqrt(ch.eta) * spec.constellation[size_t(k)];
    for (int j = 0; j < 4; ++j) {
      const double c = j * M_PI / 2;
      auto outer = [&](double g) {
        auto inner = [&](double th) {
          const Complex pt = std::polar(g, th);
          return std::exp(-std::norm(pt - mu) / s);
        };
        return g / (M_PI * s) *
               gauss_kronrod<double, 15>::integrate(inner, c - half_width, c + half_width, 10, 1e-13);
      };
      double err = 0;
      probs(j, k) =
          gauss_kronrod<double, 31>::integrate(outer, spec.delta_a, gmax, 10, 1e-12, &err);
      err_total += err;
    }
  }
  if (err_total > 1e-9)
    throw std::runtime_error("heterodyne_region_probs: quadrature failed to reach 1e-9");
  return probs;
}

HeterodyneStats heterodyne_stats(const Eigen::Matrix4d& p_unnorm, const Eigen::Vector4d& px) {
  HeterodyneStats st;
  const Eigen::Vector4d col_pass = p_unnorm.colwise().sum();
  st.p_pass = px.dot(col_pass);
  if (st.p_pass <= 0) {
    st.p_given_x.setZero();
    st.h_z = st.h_z_given_x = 0;
    return st;
  }
  Eigen::Vector4d pz = Eigen::Vector4d::Zero();
  st.h_z_given_x = 0;
  for (int k = 0; k < 4; ++k) {
    if (col_pass(k) <= 0) {
      st.p_given_x.col(k).setZero();
      continue;
    }
    st.p_given_x.col(k) = p_unnorm.col(k) / col_pass(k);
    const double px_pass = px(k) * col_pass(k) / st.p_pass;
    pz += px_pass * st.p_given_x.col(k);
    st.h_z_given_x += px_pass * shannon_entropy(st.p_given_x.col(k));
  }
  st.h_z = shannon_entropy(pz);
  return st;
}

double delta_ec_heterodyne(const Eigen::Matrix4d& p_unnorm, const Eigen::Vector4d& px, double beta) {
  if (beta <= 0 || beta > 1) throw std::domain_error("delta_ec_heterodyne: bad beta");
  const HeterodyneStats st = heterodyne_stats(p_unnorm, px);
  return (1.0 - beta) * st.h_z + beta * st.h_z_given_x;
}

}  // namespace cvqkd
