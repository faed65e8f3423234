#include "cvqkd/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "cvqkd/lossonly.hpp"

namespace cvqkd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct GridPoint {
  double length_km, xi, alpha, delta_c, delta_a, delta_p, beta;
};

std::vector<GridPoint> enumerate_points(const RunConfig& cfg) {
  std::vector<GridPoint> pts;
  const bool hom = cfg.protocol == Detection::homodyne;
  const std::vector<double> zero{0.0};
  const auto& dcs = hom ? cfg.delta_cs : zero;
  const auto& das = hom ? zero : cfg.delta_as;
  const auto& dps = hom ? zero : cfg.delta_ps;
  for (double l : cfg.distances_km)
    for (double xi : cfg.xis)
      for (double a : cfg.alphas)
        for (double dc : dcs)
          for (double da : das)
            for (double dp : dps)
              for (double b : cfg.betas) pts.push_back({l, xi, a, dc, da, dp, b});
  return pts;
}

SweepRow evaluate_point(const RunConfig& cfg, const GridPoint& pt) {
  SweepRow row;
  row.protocol = cfg.protocol == Detection::homodyne ? "homodyne" : "heterodyne";
  row.length_km = pt.length_km;
  row.xi = pt.xi;
  row.alpha = pt.alpha;
  row.delta_c = pt.delta_c;
  row.delta_a = pt.delta_a;
  row.delta_p = pt.delta_p;
  row.beta = pt.beta;
  row.cutoff = cfg.cutoff;
  row.step1_value = row.lower_bound = row.p_pass = row.delta_ec = row.key_rate = 0;
  row.fw_iters = 0;
  row.max_residual = 0;
  row.status = "ok";

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ChannelModel ch = ChannelModel::from_distance(pt.length_km, pt.xi, cfg.eta_det);
    row.eta = ch.eta;
    ProtocolSpec spec = cfg.protocol == Detection::homodyne
                            ? ProtocolSpec::homodyne_protocol(pt.alpha)
                            : ProtocolSpec::heterodyne_protocol(pt.alpha);
    spec.delta_c = pt.delta_c;
    spec.delta_a = pt.delta_a;
    spec.delta_p = pt.delta_p;
    spec.beta = pt.beta;
    spec.validate();

    const KeyRateReport rep = key_rate(spec, ch, FockDim(cfg.cutoff), cfg.solver);
    row.step1_value = rep.step1_value;
    row.lower_bound = rep.lower_bound;
    row.p_pass = rep.p_pass;
    row.delta_ec = rep.delta_ec;
    row.key_rate = rep.key_rate;
    row.fw_iters = rep.fw_iterations;
    row.max_residual = rep.max_residual;
  } catch (const std::exception& ex) {
    row.status = std::string("error: ") + ex.what();
    row.key_rate = 0;
  }
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

std::vector<SweepRow> run_keyrate(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<GridPoint> pts = enumerate_points(cfg);
  std::vector<SweepRow> rows(pts.size());

  const int workers = std::max(1, std::min<int>(cfg.jobs, int(pts.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pts.size()) return;
      rows[i] = evaluate_point(cfg, pts[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "protocol,L,eta,xi,alpha,delta_c,delta_a,delta_p,beta,Nc,step1_value,lower_bound,"
        "p_pass,delta_ec,key_rate,fw_iters,max_residual,wall_time_s,status\n";
  for (const auto& r : rows) {
    os << r.protocol << ',' << fmt(r.length_km) << ',' << fmt(r.eta) << ',' << fmt(r.xi) << ','
       << fmt(r.alpha) << ',' << fmt(r.delta_c) << ',' << fmt(r.delta_a) << ',' << fmt(r.delta_p)
       << ',' << fmt(r.beta) << ',' << r.cutoff << ',' << fmt(r.step1_value) << ','
       << fmt(r.lower_bound) << ',' << fmt(r.p_pass) << ',' << fmt(r.delta_ec) << ','
       << fmt(r.key_rate) << ',' << r.fw_iters << ',' << fmt(r.max_residual) << ','
       << fmt(r.wall_time_s) << ',' << r.status << '\n';
  }
  return os.str();
}

std::vector<OracleRow> run_oracle(const RunConfig& cfg) {
  cfg.validate();
  for (double xi : cfg.xis)
    if (xi != 0) throw ConfigError("oracle: requires channel.xi = 0");
  for (double d : cfg.delta_cs)
    if (d != 0) throw ConfigError("oracle: requires protocol.delta_c = 0");
  for (double d : cfg.delta_as)
    if (d != 0) throw ConfigError("oracle: requires protocol.delta_a = 0");
  for (double d : cfg.delta_ps)
    if (d != 0) throw ConfigError("oracle: requires protocol.delta_p = 0");

  std::vector<OracleRow> rows;
  for (double l : cfg.distances_km) {
    for (double a : cfg.alphas) {
      for (double b : cfg.betas) {
        const ChannelModel ch = ChannelModel::from_distance(l, 0.0, cfg.eta_det);
        const ProtocolSpec spec = cfg.protocol == Detection::homodyne
                                      ? ProtocolSpec::homodyne_protocol(a)
                                      : ProtocolSpec::heterodyne_protocol(a);
        OracleRow row;
        row.protocol = cfg.protocol == Detection::homodyne ? "homodyne" : "heterodyne";
        row.length_km = l;
        row.alpha = a;
        row.beta = b;
        row.mutual_information = mutual_information_lossonly(spec, ch.eta);
        row.holevo = holevo_lossonly(spec, ch.eta);
        row.dw_rate = dw_rate_lossonly(spec, ch.eta, b);
        row.plob = ch.eta < 1 ? plob_bound(ch.eta) : std::numeric_limits<double>::infinity();
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::ostringstream os;
  os << "protocol,L,alpha,beta,I_XZ,holevo,dw_rate,plob\n";
  for (const auto& r : rows) {
    os << r.protocol << ',' << fmt(r.length_km) << ',' << fmt(r.alpha) << ',' << fmt(r.beta) << ','
       << fmt(r.mutual_information) << ',' << fmt(r.holevo) << ',' << fmt(r.dw_rate) << ','
       << fmt(r.plob) << '\n';
  }
  return os.str();
}

std::string dump_operator_csv(const std::string& name, int cutoff, double delta_c, double delta_a,
                              double delta_p, bool take_sqrt) {
  const FockDim dim(cutoff);
  TruncatedOperator op = annihilation_matrix(dim);
  if (name == "annihilation") {
    op = annihilation_matrix(dim);
  } else if (name == "q" || name == "p" || name == "n" || name == "d") {
    const QuadratureOps ops = build_observables(dim);
    op = name == "q" ? ops.q : name == "p" ? ops.p : name == "n" ? ops.n : ops.d;
  } else if (name == "i0" || name == "i1") {
    auto pair = interval_operators(delta_c, dim);
    op = name == "i0" ? pair.first : pair.second;
  } else if (name == "r0" || name == "r1" || name == "r2" || name == "r3") {
    const auto regs = region_operators(delta_a, delta_p, dim);
    op = regs[size_t(name[1] - '0')];
  } else {
    throw ConfigError("dump-operators: unknown operator '" + name + "'");
  }
  if (take_sqrt) op = psd_sqrt(op);

  std::ostringstream os;
  os << "name,row,col,re,im\n";
  for (int r = 0; r < op.mat.rows(); ++r)
    for (int c = 0; c < op.mat.cols(); ++c)
      os << name << ',' << r << ',' << c << ',' << fmt(op.mat(r, c).real()) << ','
         << fmt(op.mat(r, c).imag()) << '\n';
  return os.str();
}

}  // namespace cvqkd
