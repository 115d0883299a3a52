#pragma once

#include "pagecurve/ed_oracle.hpp"
#include "pagecurve/lattice_model.hpp"
#include "pagecurve/state_prep.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pagecurve {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "section.key" -> value map, pre-filled with every known key and its default.
class ConfigMap {
 public:
  ConfigMap();

  /// Reads an INI file ([section] / key = value); unknown keys are rejected.
  void load_ini(const std::string& path);
  /// "section.key=value" or "key=value" when the key name is unique across sections.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Resolves a possibly unqualified key; throws ConfigError when unknown or ambiguous.
  std::string qualify(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Exact spectra (overlap mode) accept any bath length; time evolution needs L_B >= L_S.
enum class Workload { dynamics, spectrum };

struct SimulationConfig {
  ModelParams model;
  InitialStateSpec state;
  int chi_max = 150;
  double svd_cutoff = 1e-12;
  double dt = 0.05;
  double t_max = 10.0;
  int measure_cadence = 10;
  int variance_cadence = 10;
  std::vector<double> snapshot_times;  // empty: every measurement
  int bin_size = 0;                    // 0: L_S
  bool boltzmann = true;
  double fit_tol = 1e-8;
  std::string output_dir = "run";
  bool checkpoint = false;

  double early_t_lo = 0.05;
  double early_t_hi = 0.5;
  int early_seeds = 8;
  double early_tolerance = 0.0;  // 0: 5% (filled) or 10% (high entropy)

  double fit_t_lo = 0.0;  // 0: default window
  double fit_t_hi = 0.0;

  ed::Precision overlap_precision = ed::Precision::single;
  Workload workload = Workload::dynamics;

  int steps() const;
  int effective_bin_size() const { return bin_size > 0 ? bin_size : model.L_S; }
};

/// Parses and validates; every problem is reported as ConfigError.
SimulationConfig to_simulation_config(const ConfigMap& map, Workload workload = Workload::dynamics);
void validate(const SimulationConfig& c);

/// Output directory: absolute output.dir as is, otherwise below $PAGECURVE_OUTPUT_ROOT (or the
/// working directory when unset).
std::string resolve_output_dir(const std::string& dir);

}  // namespace pagecurve
