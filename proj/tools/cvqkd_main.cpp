#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cvqkd/runner.hpp"

namespace {

struct CliOverrides {
  std::string config_path, out_path, protocol;
  std::string distance, alpha, xi, delta_c, delta_a, delta_p, beta;
  int jobs = -1;
  int cutoff = -1;
  int max_iters = -1;
  double gap_tol = -1;
};

void add_common(CLI::App* sub, CliOverrides& ov) {
  sub->add_option("--config", ov.config_path, "configuration file (key = value)");
  sub->add_option("--out", ov.out_path, "output CSV path (default: stdout)");
  sub->add_option("--jobs", ov.jobs, "parallel workers for sweeps");
  sub->add_option("--protocol", ov.protocol, "homodyne|heterodyne")
      ->check(CLI::IsMember({"homodyne", "heterodyne"}));
  sub->add_option("--distance", ov.distance, "distance grid in km (list / lo:hi:step)");
  sub->add_option("--alpha", ov.alpha, "coherent amplitude grid");
  sub->add_option("--xi", ov.xi, "excess noise grid");
  sub->add_option("--delta-c", ov.delta_c, "homodyne postselection grid");
  sub->add_option("--delta-a", ov.delta_a, "heterodyne radial postselection grid");
  sub->add_option("--delta-p", ov.delta_p, "heterodyne angular postselection grid");
  sub->add_option("--beta", ov.beta, "reconciliation efficiency grid");
  sub->add_option("--nc", ov.cutoff, "photon-number cutoff");
  sub->add_option("--max-iters", ov.max_iters, "Frank-Wolfe iteration cap");
  sub->add_option("--gap-tol", ov.gap_tol, "Frank-Wolfe stopping gap");
}

cvqkd::RunConfig build_config(const CliOverrides& ov, const CLI::App* sub) {
  cvqkd::RunConfig cfg;
  if (!ov.config_path.empty()) cfg = cvqkd::parse_config_file(ov.config_path);
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  auto grid = [](const std::string& s) { return cvqkd::parse_grid(s); };
  if (given("--protocol"))
    cfg.protocol = ov.protocol == "homodyne" ? cvqkd::Detection::homodyne
                                             : cvqkd::Detection::heterodyne;
  if (given("--distance")) cfg.distances_km = grid(ov.distance);
  if (given("--alpha")) cfg.alphas = grid(ov.alpha);
  if (given("--xi")) cfg.xis = grid(ov.xi);
  if (given("--delta-c")) cfg.delta_cs = grid(ov.delta_c);
  if (given("--delta-a")) cfg.delta_as = grid(ov.delta_a);
  if (given("--delta-p")) cfg.delta_ps = grid(ov.delta_p);
  if (given("--beta")) cfg.betas = grid(ov.beta);
  if (given("--out")) cfg.out_path = ov.out_path;
  if (given("--jobs")) cfg.jobs = ov.jobs;
  if (given("--nc")) cfg.cutoff = ov.cutoff;
  if (given("--max-iters")) cfg.solver.max_iters = ov.max_iters;
  if (given("--gap-tol")) cfg.solver.gap_tol = ov.gap_tol;
  cfg.validate();
  return cfg;
}

int write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot open output file '" << path << "'\n";
    return 2;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic key rates for discrete-modulated CV QKD"};
  app.require_subcommand(1);

  CliOverrides ov;
  auto* keyrate = app.add_subcommand("keyrate", "evaluate a single parameter point");
  auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
  auto* oracle = app.add_subcommand("oracle", "loss-only analytical rates and the PLOB bound");
  auto* dump = app.add_subcommand("dump-operators", "serialize a truncated operator as CSV");
  add_common(keyrate, ov);
  add_common(sweep, ov);
  add_common(oracle, ov);

  std::string op_name;
  bool op_sqrt = false;
  dump->add_option("--operator", op_name, "annihilation|q|p|n|d|i0|i1|r0|r1|r2|r3")->required();
  dump->add_flag("--sqrt", op_sqrt, "apply the PSD square root");
  add_common(dump, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (dump->parsed()) {
      cvqkd::RunConfig cfg = build_config(ov, dump);
      const std::string csv = cvqkd::dump_operator_csv(
          op_name, cfg.cutoff, cfg.delta_cs.front(), cfg.delta_as.front(), cfg.delta_ps.front(),
          op_sqrt);
      return write_output(cfg.out_path, csv);
    }
    if (oracle->parsed()) {
      cvqkd::RunConfig cfg = build_config(ov, oracle);
      return write_output(cfg.out_path, cvqkd::oracle_csv(cvqkd::run_oracle(cfg)));
    }
    cvqkd::RunConfig cfg = build_config(ov, keyrate->parsed() ? keyrate : sweep);
    if (keyrate->parsed() && cfg.grid_size() != 1)
      throw cvqkd::ConfigError("keyrate expects a single parameter point; use sweep for grids");
    const auto rows = cvqkd::run_keyrate(cfg);
    const int rc = write_output(cfg.out_path, cvqkd::sweep_csv(rows));
    if (rc != 0) return rc;
    for (const auto& r : rows)
      if (!r.ok()) return 3;
    return 0;
  } catch (const cvqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
