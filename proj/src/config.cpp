#include "pagecurve/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace pagecurve {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"model.delta_sys", "1"},        {"model.delta_bath", "1"},      {"model.j_prime", "0"},
      {"model.L_S", "10"},             {"model.L_B", "200"},           {"state.kind", "filled"},
      {"state.seed", "1"},             {"state.circuit_depth", "0"},   {"tebd.chi_max", "150"},
      {"tebd.svd_cutoff", "1e-12"},    {"tebd.dt", "0.05"},            {"tebd.t_max", "10"},
      {"tebd.measure_cadence", "10"},  {"tebd.variance_cadence", "10"}, {"output.dir", "run"},
      {"output.snapshot_times", ""},   {"output.bin_size", "0"},       {"output.boltzmann", "true"},
      {"output.fit_tol", "1e-8"},      {"output.checkpoint", "false"}, {"early.t_lo", "0.05"},
      {"early.t_hi", "0.5"},           {"early.seeds", "8"},           {"early.tolerance", "0"},
      {"fit.t_lo", "0"},               {"fit.t_hi", "0"},             {"overlap.precision", "single"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double as_double(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long as_int(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t as_u64(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

bool as_bool(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

int narrow(long long v, const std::string& key) {
  if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(key + ": value out of range");
  return static_cast<int>(v);
}

}  // namespace

ConfigMap::ConfigMap() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

std::string ConfigMap::qualify(const std::string& key) const {
  if (values_.count(key)) return key;
  if (key.find('.') != std::string::npos) throw ConfigError("unknown config key '" + key + "'");
  std::string found;
  for (const auto& [k, v] : values_)
    if (k.substr(k.find('.') + 1) == key) {
      if (!found.empty()) throw ConfigError("ambiguous config key '" + key + "'");
      found = k;
    }
  if (found.empty()) throw ConfigError("unknown config key '" + key + "'");
  return found;
}

void ConfigMap::set(const std::string& key, const std::string& value) { values_[qualify(key)] = trim(value); }

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

void ConfigMap::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void ConfigMap::load_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!values_.count(full)) throw ConfigError("unknown config key '" + full + "' in " + path);
      values_[full] = trim(value.data());
    }
  }
}

int SimulationConfig::steps() const { return static_cast<int>(std::floor(t_max / dt + 1e-9)); }

SimulationConfig to_simulation_config(const ConfigMap& m, Workload workload) {
  SimulationConfig c;
  c.workload = workload;
  c.model.delta_sys = as_double(m, "model.delta_sys");
  c.model.delta_bath = as_double(m, "model.delta_bath");
  c.model.j_prime = as_double(m, "model.j_prime");
  c.model.L_S = narrow(as_int(m, "model.L_S"), "model.L_S");
  c.model.L_B = narrow(as_int(m, "model.L_B"), "model.L_B");
  try {
    c.state.kind = parse_initial_kind(m.get("state.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("state.kind: ") + e.what());
  }
  c.state.seed = as_u64(m, "state.seed");
  c.state.circuit_depth = narrow(as_int(m, "state.circuit_depth"), "state.circuit_depth");
  c.chi_max = narrow(as_int(m, "tebd.chi_max"), "tebd.chi_max");
  c.svd_cutoff = as_double(m, "tebd.svd_cutoff");
  c.dt = as_double(m, "tebd.dt");
  c.t_max = as_double(m, "tebd.t_max");
  c.measure_cadence = narrow(as_int(m, "tebd.measure_cadence"), "tebd.measure_cadence");
  c.variance_cadence = narrow(as_int(m, "tebd.variance_cadence"), "tebd.variance_cadence");
  c.output_dir = m.get("output.dir");
  std::stringstream ss(m.get("output.snapshot_times"));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      c.snapshot_times.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("output.snapshot_times: bad entry '" + item + "'");
    }
  }
  c.bin_size = narrow(as_int(m, "output.bin_size"), "output.bin_size");
  c.boltzmann = as_bool(m, "output.boltzmann");
  c.fit_tol = as_double(m, "output.fit_tol");
  c.checkpoint = as_bool(m, "output.checkpoint");
  c.early_t_lo = as_double(m, "early.t_lo");
  c.early_t_hi = as_double(m, "early.t_hi");
  c.early_seeds = narrow(as_int(m, "early.seeds"), "early.seeds");
  c.early_tolerance = as_double(m, "early.tolerance");
  c.fit_t_lo = as_double(m, "fit.t_lo");
  c.fit_t_hi = as_double(m, "fit.t_hi");
  const std::string& prec = m.get("overlap.precision");
  if (prec == "single")
    c.overlap_precision = ed::Precision::single;
  else if (prec == "double")
    c.overlap_precision = ed::Precision::double_precision;
  else
    throw ConfigError("overlap.precision: expected 'single' or 'double', got '" + prec + "'");
  validate(c);
  return c;
}

void validate(const SimulationConfig& c) {
  try {
    const bool dynamics = c.workload == Workload::dynamics;
    c.model.validate(dynamics && c.boltzmann ? c.effective_bin_size() : 0, dynamics);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.dt > 0.0)) throw ConfigError("tebd.dt must be positive");
  if (c.t_max < c.dt) throw ConfigError("tebd.t_max must be at least tebd.dt");
  if (c.chi_max < 1) throw ConfigError("tebd.chi_max must be positive");
  if (c.svd_cutoff < 0.0) throw ConfigError("tebd.svd_cutoff must be non-negative");
  if (c.measure_cadence < 1) throw ConfigError("tebd.measure_cadence must be >= 1");
  if (c.variance_cadence < 1 || c.variance_cadence % c.measure_cadence != 0)
    throw ConfigError("tebd.variance_cadence must be a positive multiple of tebd.measure_cadence");
  if (c.state.circuit_depth < 0) throw ConfigError("state.circuit_depth must be >= 0 (0 selects L_S)");
  if (c.bin_size < 0) throw ConfigError("output.bin_size must be >= 0");
  if (c.boltzmann && (c.model.L_S > 16 || c.effective_bin_size() > 16))
    throw ConfigError("Boltzmann cells larger than 16 sites are not supported; set output.boltzmann = false");
  if (c.model.uses_ladder() && c.effective_bin_size() % 2 != 0) throw ConfigError("ladder encoding needs an even bin size");
  if (c.fit_tol <= 0.0) throw ConfigError("output.fit_tol must be positive");
  if (!(c.early_t_lo > 0.0 && c.early_t_lo < c.early_t_hi)) throw ConfigError("early window must satisfy 0 < t_lo < t_hi");
  if (c.early_seeds < 1) throw ConfigError("early.seeds must be >= 1");
  if (c.early_tolerance < 0.0) throw ConfigError("early.tolerance must be >= 0");
}

std::string resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_absolute()) return p.string();
  const char* root = std::getenv("PAGECURVE_OUTPUT_ROOT");
  std::filesystem::path base = (root && *root) ? std::filesystem::path(root) : std::filesystem::current_path();
  return (base / p).lexically_normal().string();
}

}  // namespace pagecurve
