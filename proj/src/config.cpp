#include "cvqkd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cvqkd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& where) {
  const double v = parse_double(s, where);
  if (v != std::floor(v)) throw ConfigError(where + ": integer expected, got '" + s + "'");
  return int(v);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(parse_double(item, "grid"));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("grid: range needs lo:hi:step, got '" + item + "'");
    const double lo = parse_double(trim(item.substr(0, c1)), "grid");
    const double hi = parse_double(trim(item.substr(c1 + 1, c2 - c1 - 1)), "grid");
    const double step = parse_double(trim(item.substr(c2 + 1)), "grid");
    if (step <= 0) throw ConfigError("grid: step must be positive in '" + item + "'");
    for (double v = lo; v <= hi + 1e-12 * std::max(1.0, std::abs(hi)); v += step) out.push_back(v);
  }
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        int lineno) {
  const std::string where = "line " + std::to_string(lineno) + ", key '" + key + "'";
  if (key == "protocol") {
    if (value == "homodyne")
      cfg.protocol = Detection::homodyne;
    else if (value == "heterodyne")
      cfg.protocol = Detection::heterodyne;
    else
      throw ConfigError(where + ": expected homodyne|heterodyne, got '" + value + "'");
  } else if (key == "channel.distance_km") {
    cfg.distances_km = parse_grid(value);
  } else if (key == "channel.xi") {
    cfg.xis = parse_grid(value);
  } else if (key == "channel.eta_det") {
    cfg.eta_det = parse_double(value, where);
  } else if (key == "protocol.alpha") {
    cfg.alphas = parse_grid(value);
  } else if (key == "protocol.delta_c") {
    cfg.delta_cs = parse_grid(value);
  } else if (key == "protocol.delta_a") {
    cfg.delta_as = parse_grid(value);
  } else if (key == "protocol.delta_p") {
    cfg.delta_ps = parse_grid(value);
  } else if (key == "protocol.beta") {
    cfg.betas = parse_grid(value);
  } else if (key == "cutoff.nc") {
    cfg.cutoff = parse_int(value, where);
  } else if (key == "solver.max_iters") {
    cfg.solver.max_iters = parse_int(value, where);
  } else if (key == "solver.gap_tol") {
    cfg.solver.gap_tol = parse_double(value, where);
  } else if (key == "solver.eps_pert_per_dim") {
    cfg.solver.eps_pert_per_dim = parse_double(value, where);
  } else if (key == "solver.sdp_tol") {
    cfg.solver.sdp.tol_feas = parse_double(value, where);
    cfg.solver.sdp.tol_gap = parse_double(value, where);
  } else if (key == "run.out") {
    cfg.out_path = value;
  } else if (key == "run.jobs") {
    cfg.jobs = parse_int(value, where);
  } else {
    throw ConfigError(where + ": unknown key");
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno);
  }
  return cfg;
}

std::size_t RunConfig::grid_size() const {
  const auto& deltas = protocol == Detection::homodyne ? delta_cs : delta_as;
  const std::size_t dp = protocol == Detection::heterodyne ? delta_ps.size() : 1;
  return distances_km.size() * xis.size() * alphas.size() * deltas.size() * dp * betas.size();
}

void RunConfig::validate() const {
  auto nonempty = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw ConfigError(std::string("empty grid for ") + name);
  };
  nonempty(distances_km, "channel.distance_km");
  nonempty(xis, "channel.xi");
  nonempty(alphas, "protocol.alpha");
  nonempty(delta_cs, "protocol.delta_c");
  nonempty(delta_as, "protocol.delta_a");
  nonempty(delta_ps, "protocol.delta_p");
  nonempty(betas, "protocol.beta");
  for (double a : alphas)
    if (a <= 0) throw ConfigError("protocol.alpha must be > 0");
  for (double b : betas)
    if (b <= 0 || b > 1) throw ConfigError("protocol.beta must be in (0, 1]");
  for (double x : xis)
    if (x < 0) throw ConfigError("channel.xi must be >= 0");
  for (double l : distances_km)
    if (l < 0) throw ConfigError("channel.distance_km must be >= 0");
  if (eta_det <= 0 || eta_det > 1) throw ConfigError("channel.eta_det must be in (0, 1]");
  if (cutoff < 1) throw ConfigError("cutoff.nc must be >= 1");
  if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
}

}  // namespace cvqkd
