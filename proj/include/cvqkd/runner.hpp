#pragma once
#include <string>
#include <vector>

#include "cvqkd/config.hpp"

namespace cvqkd {

struct SweepRow {
  std::string protocol;
  double length_km, eta, xi, alpha, delta_c, delta_a, delta_p, beta;
  int cutoff;
  double step1_value, lower_bound, p_pass, delta_ec, key_rate;
  int fw_iters;
  double max_residual, wall_time_s;
  std::string status;  // "ok" or the failure reason; failed rows carry key_rate 0
  bool ok() const { return status == "ok"; }
};

/// Evaluates every grid point (parallel over `jobs` workers); row order is the
/// deterministic grid order regardless of scheduling.
std::vector<SweepRow> run_keyrate(const RunConfig& cfg);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct OracleRow {
  std::string protocol;
  double length_km, alpha, beta;
  double mutual_information, holevo, dw_rate, plob;
};

/// Loss-only analytical rates; requires xi = 0 and no postselection.
std::vector<OracleRow> run_oracle(const RunConfig& cfg);

std::string oracle_csv(const std::vector<OracleRow>& rows);

/// Serializes a named operator as CSV rows (name,row,col,re,im).
/// Names: annihilation, q, p, n, d, i0, i1, r0..r3; take_sqrt applies the
/// PSD square root (valid for the interval/region operators).
std::string dump_operator_csv(const std::string& name, int cutoff, double delta_c, double delta_a,
                              double delta_p, bool take_sqrt);

}  // namespace cvqkd
