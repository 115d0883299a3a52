#pragma once

#include "pagecurve/config.hpp"
#include "pagecurve/early_time.hpp"
#include "pagecurve/observables.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pagecurve {

namespace exit_code {
constexpr int ok = 0;
constexpr int internal = 1;
constexpr int config = 2;
constexpr int numerical = 3;
constexpr int validation = 4;
}  // namespace exit_code

inline const char* timeseries_header() {
  return "t,s_vn,n_bath_mean,n_bath_var,e_sys,m_sys,s_b_sys,s_b_bath,disc_weight,chi_used";
}
std::string timeseries_row(const TimeSeriesRecord& r);

struct RunResult {
  std::vector<TimeSeriesRecord> records;
  double cumulative_discarded = 0.0;
  double max_sz_drift = 0.0;
  double max_var_mismatch = 0.0;  // |var(N_bath) - var(N_sys)|, number-conserving starts only
  bool sz_conserved = true;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct RunOptions {
  bool write_files = true;
  std::ostream* log = nullptr;
  std::string command_line;
};

/// Full simulation: state preparation, evolution, measurements, Boltzmann fits, and (when
/// write_files) timeseries.csv, profiles.csv, fitlog.csv, summary.txt, metadata.json and an
/// optional checkpoint in the output directory. `map` is echoed into the manifest.
RunResult run_simulation(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts = {});

struct OverlapReport {
  double pr_filled = 0.0;
  double pr_random = 0.0;
  double max_overlap_filled = 0.0;
  double max_overlap_random = 0.0;
  double seconds = 0.0;
};
/// Overlap spectra of the filled state and the random-coefficient state (L_S + L_B <= 16).
OverlapReport run_overlap(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts = {});

struct EarlyReport {
  EarlyTimeDeviation deviation;
  double tolerance = 0.0;
  bool check_s_vn = true;
  bool passed = false;
  std::vector<TimeSeriesRecord> averaged;
  double seconds = 0.0;
};
/// Evolves to early.t_hi measuring every step (seed-averaged for the high-entropy start) and
/// compares with the closed forms on [early.t_lo, early.t_hi].
EarlyReport run_validate_early(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts = {});

/// Reads a timeseries.csv (strict header check).
struct TimeSeriesTable {
  std::vector<double> t, s_vn, n_bath_mean, n_bath_var, e_sys, m_sys, s_b_sys, s_b_bath, disc_weight;
  std::vector<int> chi_used;
};
TimeSeriesTable read_timeseries(const std::string& path);

/// Sweep over the cartesian product of `vary` entries ("key=v1,v2,..."), each combination run
/// in its own worker process (at most `jobs` at a time). Returns the worst child exit code.
int run_sweep(const std::string& executable, const std::string& config_path, const std::vector<std::string>& overrides,
              const std::vector<std::string>& vary, int jobs, const std::string& output_dir, std::ostream& log);

}  // namespace pagecurve
