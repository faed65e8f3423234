#pragma once
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/protocol.hpp"
#include "cvqkd/solver.hpp"

namespace cvqkd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key-value run configuration with dotted section keys. Grids are comma
/// lists whose items may be single numbers or lo:hi:step ranges.
struct RunConfig {
  Detection protocol = Detection::homodyne;
  std::vector<double> distances_km{20.0};
  std::vector<double> xis{0.0};
  double eta_det = 1.0;
  std::vector<double> alphas{0.4};
  std::vector<double> delta_cs{0.0};
  std::vector<double> delta_as{0.0};
  std::vector<double> delta_ps{0.0};
  std::vector<double> betas{0.95};
  int cutoff = 10;
  SolverOptions solver;
  std::string out_path;  // empty = stdout
  int jobs = 1;

  std::size_t grid_size() const;
  void validate() const;
};

/// "0.3,0.4" / "0.35:0.6:0.05" / mixtures of both.
std::vector<double> parse_grid(const std::string& text);

/// Applies one `key = value` assignment; throws ConfigError on unknown keys or
/// malformed values, quoting the offending line.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        int lineno);

RunConfig parse_config_file(const std::string& path);

}  // namespace cvqkd
