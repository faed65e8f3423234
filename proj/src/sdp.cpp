#include "cvqkd/sdp.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "cvqkd/linalg.hpp"

namespace cvqkd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Real conic program in standard form:
//   min <Cp, X> + cl.s   s.t.  <Ap_i, X> + Al_i.s = b_i,  X psd (n x n), s >= 0
// Constraint matrices are stored by their support (row/column index set) so
// the Schur complement assembly scales with the support size.
// ---------------------------------------------------------------------------

struct ConeRow {
  std::vector<int> support;
  MatrixXd block;  // dense support x support symmetric block
  Eigen::SparseVector<double> lin;
};

struct ConeData {
  int n = 0;
  int l = 0;
  std::vector<ConeRow> rows;
  VectorXd b;
  // certification metadata: bounds on Tr X and on each nonneg variable
  double trace_bound = -1;
  VectorXd lin_upper;
};

struct ConeCost {
  MatrixXd psd;
  VectorXd lin;
};

struct ConeSolution {
  MatrixXd x;
  VectorXd s;
  VectorXd y;
  double pobj = 0, dobj = 0;
  SdpStatus status = SdpStatus::failed;
  int iters = 0;
};

ConeRow make_row(const MatrixXd& a, Eigen::SparseVector<double> lin) {
  ConeRow r;
  r.lin = std::move(lin);
  if (a.size() == 0) return r;
  for (int i = 0; i < a.rows(); ++i) {
    if (a.row(i).cwiseAbs().maxCoeff() > 0 || a.col(i).cwiseAbs().maxCoeff() > 0)
      r.support.push_back(i);
  }
  const int k = int(r.support.size());
  r.block.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) r.block(i, j) = a(r.support[size_t(i)], r.support[size_t(j)]);
  return r;
}

double row_dot_psd(const ConeRow& r, const MatrixXd& x) {
  const int k = int(r.support.size());
  double acc = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) acc += r.block(i, j) * x(r.support[size_t(j)], r.support[size_t(i)]);
  return acc;
}

void row_axpy(const ConeRow& r, double coef, MatrixXd& target) {
  const int k = int(r.support.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) target(r.support[size_t(i)], r.support[size_t(j)]) += coef * r.block(i, j);
}

/// Longest step a in (0, 1] with m + (a/tau) dm still positive definite,
/// located by Cholesky bisection.
double psd_step(const MatrixXd& m, const MatrixXd& dm, double tau) {
  auto pd = [&](double a) {
    const MatrixXd trial = m + a * dm;
    return Eigen::LLT<MatrixXd>(trial).info() == Eigen::Success;
  };
  const double cap = 1.0 / tau;
  if (pd(cap)) return 1.0;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 9; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pd(mid) ? lo : hi) = mid;
  }
  return tau * lo;
}

double lin_step(const VectorXd& v, const VectorXd& dv, double tau) {
  double a = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv(i) < 0) a = std::min(a, -tau * v(i) / dv(i));
  return a;
}

class ConeSolver {
 public:
  ConeSolver(const ConeData& p, const ConeCost& c, const SdpOptions& opt)
      : p_(p), c_(c), opt_(opt), m_(int(p.rows.size())) {}

  ConeSolution solve() {
    const int n = p_.n, l = p_.l;
    const double bscale = 1.0 + (m_ ? p_.b.cwiseAbs().maxCoeff() : 0.0);
    const double cscale = 1.0 + std::max(n ? c_.psd.cwiseAbs().maxCoeff() : 0.0,
                                         l ? c_.lin.cwiseAbs().maxCoeff() : 0.0);

    ConeSolution sol;
    sol.x = MatrixXd::Identity(n, n) * std::max(1.0, bscale);
    MatrixXd z = MatrixXd::Identity(n, n) * std::max(1.0, cscale);
    sol.s = VectorXd::Constant(l, std::max(1.0, bscale));
    VectorXd w = VectorXd::Constant(l, std::max(1.0, cscale));
    sol.y = VectorXd::Zero(m_);

    double best_score = kInf;
    ConeSolution best = sol;
    int since_improved = 0;

    std::vector<MatrixXd> px(static_cast<std::size_t>(m_));
    std::vector<MatrixXd> qz(static_cast<std::size_t>(m_));
    MatrixXd schur(m_, m_);
    VectorXd rp(m_);

    for (int iter = 0; iter < opt_.max_iters; ++iter) {
      sol.iters = iter;
      for (int i = 0; i < m_; ++i)
        rp(i) = p_.b(i) - row_dot_psd(p_.rows[size_t(i)], sol.x) -
                (l ? p_.rows[size_t(i)].lin.dot(sol.s) : 0.0);
      MatrixXd rd = c_.psd - z;
      VectorXd rl = c_.lin - w;
      for (int i = 0; i < m_; ++i) {
        row_axpy(p_.rows[size_t(i)], -sol.y(i), rd);
        if (l) rl -= sol.y(i) * p_.rows[size_t(i)].lin;
      }
      const double mu = (sol.x.cwiseProduct(z).sum() + sol.s.dot(w)) / std::max(1, n + l);
      sol.pobj = (n ? sol.x.cwiseProduct(c_.psd).sum() : 0.0) + (l ? c_.lin.dot(sol.s) : 0.0);
      sol.dobj = m_ ? p_.b.dot(sol.y) : 0.0;

      const double rel_p = (m_ ? rp.cwiseAbs().maxCoeff() : 0.0) / bscale;
      const double rel_d =
          std::max(n ? rd.cwiseAbs().maxCoeff() : 0.0, l ? rl.cwiseAbs().maxCoeff() : 0.0) / cscale;
      const double rel_g = std::abs(sol.pobj - sol.dobj) / (1.0 + std::abs(sol.pobj) + std::abs(sol.dobj));
      const double score = std::max({rel_p, rel_d, rel_g});
      const bool big_improve = score < 0.9 * best_score;
      if (score < best_score) {
        best_score = score;
        best = sol;
      }
      since_improved = big_improve ? 0 : since_improved + 1;
      // near-converged problems that merely polish digits are not worth the tail
      if (since_improved >= 12 && best_score < 1e-7) break;
      if (since_improved >= 60) break;
      if (rel_p < opt_.tol_feas && rel_d < opt_.tol_feas && rel_g < opt_.tol_gap) {
        sol.status = SdpStatus::optimal;
        return sol;
      }
      if (sol.dobj > 1e10 * bscale && rel_d < 1e-6) {
        sol.status = SdpStatus::infeasible;
        return sol;
      }

      Eigen::LLT<MatrixXd> lltz(z);
      if (lltz.info() != Eigen::Success) break;
      MatrixXd zi = lltz.solve(MatrixXd::Identity(n, n));
      zi = 0.5 * (zi + zi.transpose()).eval();

      // Schur complement M_ij = Tr(A_i X A_j Z^-1) + sum_k D_ik D_jk s_k/w_k
      for (int i = 0; i < m_; ++i) {
        const auto& r = p_.rows[size_t(i)];
        const int k = int(r.support.size());
        if (k == 0) continue;
        MatrixXd xslice(k, n), zslice(k, n);
        for (int a = 0; a < k; ++a) {
          xslice.row(a) = sol.x.row(r.support[size_t(a)]);
          zslice.row(a) = zi.row(r.support[size_t(a)]);
        }
        px[size_t(i)].noalias() = r.block * xslice;
        qz[size_t(i)].noalias() = r.block * zslice;
      }
      VectorXd swratio = l ? VectorXd(sol.s.cwiseQuotient(w)) : VectorXd();
      for (int i = 0; i < m_; ++i) {
        const auto& ri = p_.rows[size_t(i)];
        const int ki = int(ri.support.size());
        for (int j = i; j < m_; ++j) {
          const auto& rj = p_.rows[size_t(j)];
          const int kj = int(rj.support.size());
          double v = 0;
          if (ki && kj) {
            const MatrixXd& pi = px[size_t(i)];
            const MatrixXd& qj = qz[size_t(j)];
            for (int a = 0; a < ki; ++a) {
              const int ra = ri.support[size_t(a)];
              for (int bb = 0; bb < kj; ++bb) v += pi(a, rj.support[size_t(bb)]) * qj(bb, ra);
            }
          }
          if (l)
            for (Eigen::SparseVector<double>::InnerIterator it(ri.lin); it; ++it)
              v += it.value() * rj.lin.coeff(it.index()) * swratio(it.index());
          schur(i, j) = v;
          schur(j, i) = v;
        }
      }

      Eigen::LDLT<MatrixXd> mfac;
      double ridge = 0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        mfac.compute(schur + ridge * MatrixXd::Identity(m_, m_));
        if (mfac.info() == Eigen::Success && mfac.isPositive()) break;
        ridge = ridge == 0 ? 1e-13 * std::max(1.0, schur.diagonal().maxCoeff()) : ridge * 100;
      }

      const MatrixXd x_rd_zi = sol.x * rd * zi;
      auto solve_direction = [&](const MatrixXd& rc_psd, const VectorXd& rc_lin, MatrixXd& dx,
                                 VectorXd& ds, VectorXd& dy, MatrixXd& dz, VectorXd& dw) {
        VectorXd rhs = rp;
        for (int i = 0; i < m_; ++i) {
          const auto& r = p_.rows[size_t(i)];
          rhs(i) -= row_dot_psd(r, rc_psd) - row_dot_psd(r, x_rd_zi);
          if (l) rhs(i) -= r.lin.dot(rc_lin) - r.lin.dot(swratio.cwiseProduct(rl));
        }
        dy = mfac.solve(rhs);
        dy += mfac.solve(rhs - schur * dy);  // one refinement pass against ridge loss
        dz = rd;
        VectorXd dtheta = rl;
        for (int i = 0; i < m_; ++i) {
          row_axpy(p_.rows[size_t(i)], -dy(i), dz);
          if (l) dtheta -= dy(i) * p_.rows[size_t(i)].lin;
        }
        dw = dtheta;
        dx = rc_psd - sol.x * dz * zi;
        dx = 0.5 * (dx + dx.transpose()).eval();
        ds = rc_lin - swratio.cwiseProduct(dw);
      };

      const double tau = 0.99;
      MatrixXd dxa, dza;
      VectorXd dsa, dya, dwa;
      solve_direction(-sol.x, -sol.s, dxa, dsa, dya, dza, dwa);
      const double apa = std::min(psd_step(sol.x, dxa, tau), lin_step(sol.s, dsa, tau));
      const double ada = std::min(psd_step(z, dza, tau), lin_step(w, dwa, tau));
      const double mu_aff = ((sol.x + apa * dxa).cwiseProduct(z + ada * dza).sum() +
                             (sol.s + apa * dsa).dot(w + ada * dwa)) /
                            std::max(1, n + l);
      double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
      sigma = std::min(1.0, std::max(sigma, 1e-8));
      // lean on centering once aggressive steps stop paying off
      if (since_improved > 10) sigma = std::max(sigma, 0.2);

      MatrixXd rc_psd = sigma * mu * zi - sol.x - dxa * dza * zi;
      rc_psd = 0.5 * (rc_psd + rc_psd.transpose()).eval();
      VectorXd rc_lin =
          l ? VectorXd((VectorXd::Constant(l, sigma * mu) - dsa.cwiseProduct(dwa)).cwiseQuotient(w) -
                       sol.s)
            : VectorXd();
      MatrixXd dx, dz;
      VectorXd ds, dy, dw;
      solve_direction(rc_psd, rc_lin, dx, ds, dy, dz, dw);

      const double ap = std::min(psd_step(sol.x, dx, tau), lin_step(sol.s, ds, tau));
      const double ad = std::min(psd_step(z, dz, tau), lin_step(w, dw, tau));
      if (!(ap > 0) || !(ad > 0)) break;

      sol.x += ap * dx;
      sol.s += ap * ds;
      sol.y += ad * dy;
      z += ad * dz;
      w += ad * dw;
      sol.x = 0.5 * (sol.x + sol.x.transpose()).eval();
      z = 0.5 * (z + z.transpose()).eval();
    }

    best.status = best_score < 1e-6 ? SdpStatus::stalled : SdpStatus::failed;
    return best;
  }

 private:
  const ConeData& p_;
  const ConeCost& c_;
  SdpOptions opt_;
  int m_;
};

bool is_identity_type(const Matrix& g, double* scale) {
  const int n = int(g.rows());
  const double t = g(0, 0).real();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex want = i == j ? Complex(t, 0) : Complex(0, 0);
      if (std::abs(g(i, j) - want) > 1e-14) return false;
    }
  if (scale) *scale = t;
  return true;
}

/// b.y plus penalty corrections for residual dual infeasibility; a valid lower
/// bound whenever the needed primal bounds (trace, slack ranges) are known.
double certify_dual(const ConeData& p, const ConeCost& c, const VectorXd& y) {
  MatrixXd s_mat = c.psd;
  VectorXd w = c.lin;
  for (int i = 0; i < int(p.rows.size()); ++i) {
    row_axpy(p.rows[size_t(i)], -y(i), s_mat);
    if (p.l) w -= y(i) * p.rows[size_t(i)].lin;
  }
  double bound = p.b.dot(y);
  if (p.n > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s_mat + s_mat.transpose()),
                                               Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0) {
      if (p.trace_bound < 0) return -kInf;
      bound += lmin * p.trace_bound;
    }
  }
  for (int k = 0; k < p.l; ++k) {
    if (w(k) < 0) {
      if (p.lin_upper(k) < 0) return -kInf;
      bound += w(k) * p.lin_upper(k);
    }
  }
  return bound;
}

/// Removes rows that are linear combinations of earlier rows. Dependent rows
/// with inconsistent targets flag the whole program as infeasible. Keeping the
/// system full-rank keeps the dual bounded, which the certificates rely on.
void drop_dependent_rows(ConeData& cp, bool* inconsistent) {
  *inconsistent = false;
  const int m = int(cp.rows.size());
  const long dim_flat = long(cp.n) * cp.n + cp.l;
  MatrixXd flat = MatrixXd::Zero(dim_flat, m);
  for (int i = 0; i < m; ++i) {
    const auto& r = cp.rows[size_t(i)];
    const int k = int(r.support.size());
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        flat(long(r.support[size_t(a)]) * cp.n + r.support[size_t(b)], i) = r.block(a, b);
    for (Eigen::SparseVector<double>::InnerIterator it(r.lin); it; ++it)
      flat(long(cp.n) * cp.n + it.index(), i) = it.value();
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(flat);
  qr.setThreshold(1e-10);
  const int rank = int(qr.rank());
  if (rank == m) return;

  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) order[size_t(i)] = qr.colsPermutation().indices()(i);
  std::vector<bool> keep(static_cast<std::size_t>(m), false);
  for (int i = 0; i < rank; ++i) keep[size_t(order[size_t(i)])] = true;

  MatrixXd basis(dim_flat, rank);
  VectorXd b_kept(rank);
  for (int i = 0; i < rank; ++i) {
    basis.col(i) = flat.col(order[size_t(i)]);
    b_kept(i) = cp.b(order[size_t(i)]);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr_basis(basis);
  const double bscale = 1.0 + cp.b.cwiseAbs().maxCoeff();
  for (int i = 0; i < m; ++i) {
    if (keep[size_t(i)]) continue;
    const VectorXd coef = qr_basis.solve(flat.col(i));
    if (std::abs(cp.b(i) - coef.dot(b_kept)) > 1e-8 * bscale) *inconsistent = true;
  }

  ConeData out;
  out.n = cp.n;
  out.l = cp.l;
  out.trace_bound = cp.trace_bound;
  out.lin_upper = cp.lin_upper;
  std::vector<double> b_entries;
  for (int i = 0; i < m; ++i) {
    if (!keep[size_t(i)]) continue;
    out.rows.push_back(std::move(cp.rows[size_t(i)]));
    b_entries.push_back(cp.b(i));
  }
  out.b = Eigen::Map<VectorXd>(b_entries.data(), long(b_entries.size()));
  cp = std::move(out);
}

ConeData build_cone_data(const std::vector<SdpConstraint>& constraints, int n_complex) {
  ConeData cp;
  cp.n = 2 * n_complex;

  int l = 0;
  for (const auto& c : constraints)
    if (c.relax > 0) l += 2;
  cp.l = l;
  cp.lin_upper = VectorXd::Constant(l, -1.0);

  int slack = 0;
  std::vector<double> b_entries;
  for (const auto& c : constraints) {
    if (c.relax < 0) throw std::invalid_argument("solve_linear_sdp: negative relax");
    if (c.observable.rows() != n_complex)
      throw std::invalid_argument("solve_linear_sdp: constraint dimension mismatch");
    double idsc = 0;
    if (is_identity_type(c.observable, &idsc) && idsc > 0)
      cp.trace_bound = 2.0 * (c.value + c.relax) / idsc;
    const MatrixXd e = embed_hermitian(c.observable);
    if (c.relax == 0) {
      cp.rows.push_back(make_row(e, Eigen::SparseVector<double>(l)));
      b_entries.push_back(2.0 * c.value);
    } else {
      // <E, X> + u = 2(value + relax);  u + u' = 4 relax
      Eigen::SparseVector<double> lv(l);
      lv.insert(slack) = 1.0;
      cp.rows.push_back(make_row(e, lv));
      b_entries.push_back(2.0 * (c.value + c.relax));
      Eigen::SparseVector<double> lv2(l);
      lv2.insert(slack) = 1.0;
      lv2.insert(slack + 1) = 1.0;
      cp.rows.push_back(make_row(MatrixXd(), lv2));
      b_entries.push_back(4.0 * c.relax);
      cp.lin_upper(slack) = 4.0 * c.relax;
      cp.lin_upper(slack + 1) = 4.0 * c.relax;
      slack += 2;
    }
  }
  cp.b = Eigen::Map<VectorXd>(b_entries.data(), long(b_entries.size()));
  return cp;
}

}  // namespace

Eigen::MatrixXd embed_hermitian(const Matrix& h) {
  const int n = int(h.rows());
  Eigen::MatrixXd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.bottomRightCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  return e;
}

Matrix unembed_hermitian(const Eigen::MatrixXd& x) {
  const int n = int(x.rows()) / 2;
  Eigen::MatrixXd re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  Eigen::MatrixXd im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  Matrix h = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  return hermitize(h);
}

bool SdpResult::certified() const { return std::isfinite(certified_dual); }

struct LinearSdpSolver::Impl {
  ConeData data;
  std::vector<SdpConstraint> constraints;
  SdpOptions options;
  int n_complex = 0;
  bool inconsistent = false;
};

LinearSdpSolver::LinearSdpSolver(const std::vector<SdpConstraint>& constraints,
                                 const SdpOptions& options)
    : impl_(std::make_unique<Impl>()) {
  if (constraints.empty()) throw std::invalid_argument("LinearSdpSolver: no constraints");
  impl_->n_complex = int(constraints.front().observable.rows());
  impl_->data = build_cone_data(constraints, impl_->n_complex);
  drop_dependent_rows(impl_->data, &impl_->inconsistent);
  impl_->constraints = constraints;
  impl_->options = options;
}

LinearSdpSolver::~LinearSdpSolver() = default;
LinearSdpSolver::LinearSdpSolver(LinearSdpSolver&&) noexcept = default;
LinearSdpSolver& LinearSdpSolver::operator=(LinearSdpSolver&&) noexcept = default;

SdpResult LinearSdpSolver::solve(const Matrix& cost) const {
  if (impl_->inconsistent) {
    SdpResult out;
    out.status = SdpStatus::infeasible;
    out.minimizer = Matrix::Zero(impl_->n_complex, impl_->n_complex);
    out.certified_dual = -kInf;
    return out;
  }
  // cost_psd = E(C)/2 keeps the embedded objective in complex-trace units
  ConeCost cc{0.5 * embed_hermitian(cost), VectorXd::Zero(impl_->data.l)};
  ConeSolution sol = ConeSolver(impl_->data, cc, impl_->options).solve();

  SdpResult out;
  out.status = sol.status;
  out.iterations = sol.iters;
  out.minimizer = unembed_hermitian(sol.x);
  out.primal_value = real_inner(cost, out.minimizer);
  out.certified_dual = certify_dual(impl_->data, cc, sol.y);
  out.max_violation = 0;
  for (const auto& c : impl_->constraints) {
    const double v = real_inner(c.observable, out.minimizer);
    out.max_violation = std::max(out.max_violation, std::abs(v - c.value) - c.relax);
  }
  out.max_violation = std::max(out.max_violation, 0.0);
  return out;
}

SdpResult solve_linear_sdp(const LinearSdpProblem& problem) {
  return LinearSdpSolver(problem.constraints, problem.options).solve(problem.cost);
}

FeasibilityResult feasibility_project(const std::vector<SdpConstraint>& constraints,
                                      const Matrix& target, const SdpOptions& options) {
  const int nc = int(target.rows());

  std::vector<int> soft;
  for (int i = 0; i < int(constraints.size()); ++i)
    if (!is_identity_type(constraints[size_t(i)].observable, nullptr)) soft.push_back(i);

  // stage 1: min t  s.t. |<Gamma_i, rho> - gamma_i| <= t on soft rows
  ConeData cp;
  cp.n = 2 * nc;
  cp.l = 1 + 2 * int(soft.size());
  cp.lin_upper = VectorXd::Constant(cp.l, -1.0);
  std::vector<double> b_entries;
  for (int i = 0; i < int(constraints.size()); ++i) {
    const auto& c = constraints[size_t(i)];
    if (std::find(soft.begin(), soft.end(), i) != soft.end()) continue;
    cp.rows.push_back(make_row(embed_hermitian(c.observable), Eigen::SparseVector<double>(cp.l)));
    b_entries.push_back(2.0 * c.value);
  }
  int slack = 1;
  for (int i : soft) {
    const auto& c = constraints[size_t(i)];
    Eigen::SparseVector<double> lv(cp.l);
    lv.insert(0) = -2.0;  // <E, X> + u - 2t = 2 gamma
    lv.insert(slack) = 1.0;
    cp.rows.push_back(make_row(embed_hermitian(c.observable), lv));
    b_entries.push_back(2.0 * c.value);
    Eigen::SparseVector<double> lv2(cp.l);
    lv2.insert(0) = -4.0;  // u + u' = 4t
    lv2.insert(slack) = 1.0;
    lv2.insert(slack + 1) = 1.0;
    cp.rows.push_back(make_row(MatrixXd(), lv2));
    b_entries.push_back(0.0);
    slack += 2;
  }
  cp.b = Eigen::Map<VectorXd>(b_entries.data(), long(b_entries.size()));

  ConeCost cc{MatrixXd::Zero(cp.n, cp.n), VectorXd::Zero(cp.l)};
  cc.lin(0) = 1.0;
  ConeSolution sol1 = ConeSolver(cp, cc, options).solve();

  FeasibilityResult out;
  out.status = sol1.status;
  out.minimax_residual = std::max(sol1.pobj, 0.0);
  if (sol1.status == SdpStatus::failed || sol1.status == SdpStatus::infeasible) {
    out.rho = unembed_hermitian(sol1.x);
    out.residual = kInf;
    return out;
  }

  // stage 2: within the residual budget, maximize overlap with the target state
  const double eps = std::max(out.minimax_residual * 2.0, 1e-9);
  LinearSdpProblem align;
  align.options = options;
  const double tscale = std::max(1.0, target.norm());
  align.cost = -target / tscale;
  for (const auto& c : constraints) {
    const bool hard = is_identity_type(c.observable, nullptr);
    align.constraints.push_back({c.observable, c.value, hard ? 0.0 : eps});
  }
  SdpResult res2 = solve_linear_sdp(align);
  out.rho = res2.minimizer;
  out.status = res2.status;
  out.residual = 0;
  for (const auto& c : constraints)
    out.residual = std::max(out.residual, std::abs(real_inner(c.observable, out.rho) - c.value));
  return out;
}

}  // namespace cvqkd
