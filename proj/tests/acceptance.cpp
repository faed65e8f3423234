// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "cvqkd/entropy.hpp"
#include "cvqkd/linalg.hpp"
#include "cvqkd/lossonly.hpp"
#include "cvqkd/solver.hpp"

using namespace cvqkd;
using boost::math::quadrature::gauss_kronrod;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << idx << " (" << name << "): " << detail
            << std::endl;
  if (!pass) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

ProtocolSpec make_spec(Detection det, double alpha, double dc, double da, double dp, double beta) {
  ProtocolSpec spec = det == Detection::homodyne ? ProtocolSpec::homodyne_protocol(alpha)
                                                 : ProtocolSpec::heterodyne_protocol(alpha);
  spec.delta_c = dc;
  spec.delta_a = da;
  spec.delta_p = dp;
  spec.beta = beta;
  spec.validate();
  return spec;
}

KeyRateReport solve_point(Detection det, double length_km, double xi, double alpha, double dc,
                          double da, double dp, double beta, int nc) {
  try {
    const ChannelModel ch = ChannelModel::from_distance(length_km, xi);
    return key_rate(make_spec(det, alpha, dc, da, dp, beta), ch, FockDim(nc), SolverOptions{});
  } catch (const std::exception& ex) {
    std::cout << "  [point failed: " << ex.what() << "]" << std::endl;
    KeyRateReport rep;
    rep.key_rate = 0;
    rep.status = ex.what();
    return rep;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- criteria 1+2

struct LossOnlyBest {
  double solver_rate = 0, dw_rate = 0, alpha = 0;
};

LossOnlyBest scan_lossonly(Detection det, double length_km, const std::vector<double>& alphas,
                           double beta) {
  LossOnlyBest best;
  const double eta = std::pow(10.0, -0.02 * length_km);
  for (double a : alphas) {
    const KeyRateReport rep = solve_point(det, length_km, 0.0, a, 0, 0, 0, beta, 10);
    if (rep.key_rate > best.solver_rate) {
      best.solver_rate = rep.key_rate;
      best.alpha = a;
    }
    best.dw_rate = std::max(best.dw_rate, dw_rate_lossonly(make_spec(det, a, 0, 0, 0, beta), eta, beta));
  }
  return best;
}

void criteria_1_2() {
  Timer timer;
  const std::vector<double> hom_grid{0.36, 0.42, 0.48, 0.54, 0.60};
  const std::vector<double> het_grid{0.60, 0.67, 0.74, 0.81, 0.88, 0.95};

  bool ok1 = true;
  std::ostringstream d1;
  std::vector<LossOnlyBest> hom3, het3;
  for (double length : {10.0, 20.0, 40.0}) {
    const LossOnlyBest h = scan_lossonly(Detection::homodyne, length, hom_grid, 0.95);
    const LossOnlyBest t = scan_lossonly(Detection::heterodyne, length, het_grid, 0.95);
    hom3.push_back(h);
    het3.push_back(t);
    for (const auto* b : {&h, &t}) {
      const bool within = b->solver_rate >= 0.93 * b->dw_rate && b->solver_rate <= b->dw_rate + 1e-4;
      ok1 = ok1 && within;
    }
    d1 << " L=" << length << " hom " << fmt(h.solver_rate) << "/" << fmt(h.dw_rate) << " het "
       << fmt(t.solver_rate) << "/" << fmt(t.dw_rate) << ";";
  }
  const double secs = timer.seconds();
  ok1 = ok1 && secs <= 600.0;
  report(1, "oracle equivalence", ok1, "solver/dw:" + d1.str() + " runtime " + fmt(secs) + "s");

  bool ok2 = true;
  std::ostringstream d2;
  for (std::size_t i = 1; i < 3; ++i) {  // L = 20, 40
    const double length = i == 1 ? 20.0 : 40.0;
    const double plob = plob_bound(std::pow(10.0, -0.02 * length));
    const double r_h = hom3[i].solver_rate / plob;
    const double r_t = het3[i].solver_rate / plob;
    ok2 = ok2 && r_h >= 1.0 / 20 && r_h <= 1.0 / 10;
    ok2 = ok2 && r_t >= 1.0 / 14 && r_t <= 1.0 / 7;
    d2 << " L=" << length << " hom " << fmt(r_h) << " het " << fmt(r_t) << ";";
  }
  report(2, "PLOB ratio", ok2, d2.str());
}

// ------------------------------------------------------------------ criterion 3

void criterion_3() {
  auto argmax_alpha = [](Detection det, const std::vector<double>& grid) {
    double best_rate = -1, best_alpha = 0;
    for (double a : grid) {
      const KeyRateReport rep = solve_point(det, 20.0, 0.01, a, 0, 0, 0, 0.95, 10);
      if (rep.key_rate > best_rate) {
        best_rate = rep.key_rate;
        best_alpha = a;
      }
    }
    return best_alpha;
  };
  const double a_hom = argmax_alpha(Detection::homodyne, {0.30, 0.35, 0.40, 0.45, 0.50, 0.55});
  const double a_het = argmax_alpha(Detection::heterodyne, {0.60, 0.65, 0.70, 0.75, 0.80, 0.85});
  const bool ok = std::abs(a_hom - 0.40) <= 0.05 + 1e-12 && std::abs(a_het - 0.70) <= 0.05 + 1e-12;
  report(3, "optimal amplitude location", ok,
         "argmax homodyne " + fmt(a_hom) + " (want 0.40+-0.05), heterodyne " + fmt(a_het) +
             " (want 0.70+-0.05)");
}

// ------------------------------------------------------------------ criterion 4

void criterion_4() {
  const KeyRateReport h0 = solve_point(Detection::homodyne, 20.0, 0.02, 0.45, 0.0, 0, 0, 0.9, 10);
  const KeyRateReport h1 = solve_point(Detection::homodyne, 20.0, 0.02, 0.45, 0.6, 0, 0, 0.9, 10);
  const KeyRateReport t0 = solve_point(Detection::heterodyne, 20.0, 0.04, 0.6, 0, 0.0, 0, 0.9, 10);
  const KeyRateReport t1 = solve_point(Detection::heterodyne, 20.0, 0.04, 0.6, 0, 0.6, 0, 0.9, 10);
  const bool ok_h = h1.key_rate - h0.key_rate >= 1e-4;
  const bool ok_t = t1.key_rate > t0.key_rate;
  report(4, "postselection improvement", ok_h && ok_t,
         "homodyne " + fmt(h0.key_rate) + " -> " + fmt(h1.key_rate) + ", heterodyne " +
             fmt(t0.key_rate) + " -> " + fmt(t1.key_rate));
}

// ------------------------------------------------------------------ criterion 5

void criterion_5() {
  bool ok = true;
  std::ostringstream d;
  const struct {
    Detection det;
    double alpha;
  } cases[2] = {{Detection::homodyne, 0.4}, {Detection::heterodyne, 0.7}};
  for (const auto& c : cases) {
    const double r10 = solve_point(c.det, 20.0, 0.01, c.alpha, 0, 0, 0, 0.95, 10).key_rate;
    const double r12 = solve_point(c.det, 20.0, 0.01, c.alpha, 0, 0, 0, 0.95, 12).key_rate;
    const double allow = std::max(1e-3, 0.02 * r10);
    ok = ok && std::abs(r12 - r10) <= allow;
    d << (c.det == Detection::homodyne ? " hom " : " het ") << fmt(r10) << "/" << fmt(r12);
  }
  report(5, "cutoff stability", ok, "Nc=10 vs Nc=12:" + d.str());
}

// ------------------------------------------------------------------ criterion 6

void criterion_6() {
  const KeyRateReport rep = solve_point(Detection::homodyne, 80.0, 0.01, 0.4, 0, 0, 0, 0.95, 10);
  report(6, "positive rate at distance", rep.key_rate > 0,
         "L=80 km rate " + fmt(rep.key_rate) + " after " + std::to_string(rep.fw_iterations) +
             " iterations");
}

// ------------------------------------------------------------------ criterion 7

double hermite_derivative(int n, double q) {
  const auto psi = hermite_function_column(n, q);
  return -q * psi[size_t(n)] + std::sqrt(2.0 * n) * (n > 0 ? psi[size_t(n) - 1] : 0.0);
}

double interval_entry_wronskian(int m, int n, double a) {
  const auto psi = hermite_function_column(std::max(m, n), a);
  const double v =
      psi[size_t(m)] * hermite_derivative(n, a) - hermite_derivative(m, a) * psi[size_t(n)];
  return v / (2.0 * (n - m));
}

Complex region_entry_quadrature(int j, int m, int n, double da, double dp) {
  const double lo = j * M_PI / 2 - (M_PI / 4 - dp);
  const double hi = j * M_PI / 2 + (M_PI / 4 - dp);
  const double norm = std::exp(-0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0)));
  auto entry = [&](bool re_part) {
    auto outer = [&](double th) {
      auto inner = [&](double g) {
        const double trig = re_part ? std::cos((m - n) * th) : std::sin((m - n) * th);
        return std::pow(g, m + n + 1) * std::exp(-g * g) * trig;
      };
      return gauss_kronrod<double, 31>::integrate(inner, da, da + 10.0, 8, 1e-12);
    };
    return gauss_kronrod<double, 15>::integrate(outer, lo, hi, 8, 1e-12);
  };
  return norm / M_PI * Complex(entry(true), entry(false));
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return hermitize(a);
}

void criterion_7() {
  std::vector<std::string> bad;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) bad.push_back(what);
  };

  {  // interval operators vs the Wronskian closed form
    const FockDim dim(10);
    const auto [i0, i1] = interval_operators(0.6, dim);
    double worst = 0;
    for (int m = 0; m <= 10; ++m)
      for (int n = 0; n <= 10; ++n)
        if (m != n)
          worst = std::max(worst, std::abs(i0.mat(m, n).real() - interval_entry_wronskian(m, n, 0.6)));
    expect(worst < 1e-10, "interval quadrature agreement");
  }

  {  // region operators vs 2-D quadrature
    const FockDim dim(10);
    const auto regs = region_operators(0.6, 0.1, dim);
    double worst = 0;
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m <= 10; ++m)
        for (int n = m; n <= 10; ++n)
          worst = std::max(worst,
                           std::abs(regs[size_t(j)].mat(m, n) - region_entry_quadrature(j, m, n, 0.6, 0.1)));
    expect(worst < 1e-8, "region quadrature agreement");
  }

  {  // truncated commutator
    const auto ops = build_observables(FockDim(10));
    Matrix comm = ops.q.mat * ops.p.mat - ops.p.mat * ops.q.mat;
    Matrix want = Complex(0, 1) * Matrix::Identity(11, 11);
    want(10, 10) -= Complex(0, 11);
    expect((comm - want).cwiseAbs().maxCoeff() < 1e-12, "commutator identity");
  }

  {  // POVM completeness at zero postselection
    const FockDim dim(10);
    const auto [i0, i1] = interval_operators(0.0, dim);
    expect((i0.mat + i1.mat - Matrix::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-10,
           "interval completeness");
    const auto regs = region_operators(0.0, 0.0, dim);
    Matrix sum = Matrix::Zero(11, 11);
    for (const auto& r : regs) sum += r.mat;
    expect((sum - Matrix::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-10, "region completeness");
  }

  // shared desk-scale problem for the solver properties
  const FockDim dim(10);
  const ChannelModel ch = ChannelModel::from_distance(20.0, 0.01);
  const ProtocolSpec spec = make_spec(Detection::homodyne, 0.4, 0, 0, 0, 0.95);
  KeyRateProblem problem{build_constraints(spec, simulated_moments(ch, spec), dim),
                         kraus_homodyne(spec, dim), dim, SolverOptions{}};
  const Matrix rho_sim = simulated_joint_state(ch, spec, dim);
  const Matrix rho0 = feasible_initial_point(problem, rho_sim);

  {  // gradient vs central finite differences
    std::mt19937_64 rng(71);
    const Matrix base = hermitize(0.95 * rho0 + 0.05 * Matrix::Identity(44, 44) / 44.0);
    const Matrix g = gradient(problem.maps, base);
    double worst = 0;
    for (int t = 0; t < 10; ++t) {
      Matrix d = random_hermitian(44, rng);
      d /= d.norm();
      const double h = 1e-5;
      const double fd =
          (objective_value(problem.maps, base + h * d) - objective_value(problem.maps, base - h * d)) /
          (2 * h);
      const double an = real_inner(g, d);
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
    expect(worst < 1e-4, "gradient finite differences (worst " + fmt(worst) + ")");
  }

  {  // tangent-plane bound on perturbed feasible states
    const FrankWolfeResult fw = frank_wolfe(problem, rho0);
    const Matrix g = gradient(problem.maps, fw.rho);
    const double f_star = fw.value;
    std::mt19937_64 rng(137);
    auto sdp_constraints = [&]() {
      std::vector<SdpConstraint> cs;
      for (const auto& c : problem.constraints.constraints) cs.push_back({c.observable, c.value, 0.0});
      return cs;
    }();
    bool all_ok = true;
    for (int t = 0; t < 20; ++t) {
      LinearSdpProblem sub;
      sub.cost = random_hermitian(44, rng);
      sub.constraints = sdp_constraints;
      const SdpResult vertex = solve_linear_sdp(sub);
      const double mix = t % 2 == 0 ? 1.0 : 0.5;
      const Matrix sigma = hermitize(mix * vertex.minimizer + (1 - mix) * rho0);
      const double lhs = objective_value(problem.maps, sigma);
      const double rhs = f_star + real_inner(g, sigma - fw.rho);
      if (lhs < rhs - 1e-7) all_ok = false;
    }
    expect(all_ok, "tangent bound validity");

    // G-map pass probability against the analytic sifting statistics
    const double tr_g = apply_G(problem.maps, rho_sim).trace().real();
    const auto st = ppass_and_error_homodyne(ch, spec);
    expect(std::abs(problem.maps.sift_scale * tr_g - st.p_pass) < 1e-6, "homodyne G-map pass probability");
  }

  {  // heterodyne pass probability through the G map
    const ProtocolSpec het = make_spec(Detection::heterodyne, 0.7, 0, 0.4, 0, 0.95);
    const ChannelModel ch2(0.5, 0.02);
    const auto maps = kraus_heterodyne(het, dim);
    const Matrix sim = simulated_joint_state(ch2, het, dim);
    const double tr_g = apply_G(maps, sim).trace().real();
    const Eigen::Vector4d px = Eigen::Vector4d::Constant(0.25);
    const double p_pass = heterodyne_stats(heterodyne_region_probs(ch2, het), px).p_pass;
    expect(std::abs(tr_g - p_pass) < 1e-5, "heterodyne G-map pass probability");
  }

  {  // Lemma-1 style block decomposition of the entropy kernel
    std::mt19937_64 rng(11);
    const int blocks = 3, d = 4;
    Eigen::VectorXd p(blocks), q(blocks);
    p << 0.5, 0.3, 0.2;
    q << 0.2, 0.5, 0.3;
    Matrix rho_qx = Matrix::Zero(blocks * d, blocks * d), sigma_qx = rho_qx;
    double want = 0;
    for (int x = 0; x < blocks; ++x) {
      Matrix a = random_hermitian(d, rng);
      Matrix rx = a * a.adjoint();
      rx /= rx.trace().real();
      Matrix b = random_hermitian(d, rng);
      Matrix sx = b * b.adjoint();
      sx /= sx.trace().real();
      rho_qx.block(x * d, x * d, d, d) = p(x) * rx;
      sigma_qx.block(x * d, x * d, d, d) = q(x) * sx;
      want += p(x) * relative_entropy(rx, sx) + p(x) * std::log2(p(x) / q(x));
    }
    expect(std::abs(relative_entropy(rho_qx, sigma_qx) - want) < 1e-9, "block decomposition");
  }

  {  // heterodyne P(z|x): quadrature vs Monte Carlo and vs operator traces
    const ProtocolSpec het = make_spec(Detection::heterodyne, 0.7, 0, 0, 0, 0.95);
    const ChannelModel unit(1.0, 0.0);
    const auto pq = heterodyne_region_probs(unit, het);

    std::mt19937_64 rng(321);
    std::normal_distribution<double> gauss;
    const double sx = std::sqrt(0.5);
    const Complex mu = het.constellation[0];
    Eigen::Vector4d counts = Eigen::Vector4d::Zero();
    const int samples = 10'000'000;
    for (int i = 0; i < samples; ++i) {
      const Complex y = mu + Complex(sx * gauss(rng), sx * gauss(rng));
      double th = std::arg(y);
      if (th < -M_PI / 4) th += 2 * M_PI;
      counts(int(std::floor((th + M_PI / 4) / (M_PI / 2))) % 4) += 1.0;
    }
    counts /= double(samples);
    double worst_mc = 0;
    for (int j = 0; j < 4; ++j) worst_mc = std::max(worst_mc, std::abs(counts(j) - pq(j, 0)));
    expect(worst_mc < 5e-4, "Monte Carlo agreement (worst " + fmt(worst_mc) + ")");

    const auto regs = region_operators(0, 0, dim);
    const Matrix sim = simulated_joint_state(unit, het, dim);
    double worst_tr = 0;
    for (int k = 0; k < 4; ++k) {
      const Matrix cond = sim.block(11 * k, 11 * k, 11, 11) / 0.25;
      for (int j = 0; j < 4; ++j)
        worst_tr =
            std::max(worst_tr, std::abs((cond * regs[size_t(j)].mat).trace().real() - pq(j, k)));
    }
    expect(worst_tr < 1e-5, "operator-trace agreement (worst " + fmt(worst_tr) + ")");
  }

  std::string detail = "all property suites hold";
  if (!bad.empty()) {
    detail = "failing:";
    for (const auto& b : bad) detail += " [" + b + "]";
  }
  report(7, "property suites", bad.empty(), detail);
}

}  // namespace

int main() {
  Timer total;
  criteria_1_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
            << fmt(total.seconds()) << "s total)" << std::endl;
  return failures == 0 ? 0 : 1;
}
