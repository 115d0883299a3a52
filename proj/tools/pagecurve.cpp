#include "pagecurve/analysis.hpp"
#include "pagecurve/config.hpp"
#include "pagecurve/format.hpp"
#include "pagecurve/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace pagecurve;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "INI config file (defaults are used for missing keys)");
  cmd->add_option("-s,--set", c.sets, "Override a config key: section.key=value (repeatable)");
  cmd->add_flag("-q,--quiet", c.quiet, "No progress output");
  cmd->allow_extras();
}

// Remaining "--key=value" arguments are config overrides as well. The "--key value" form is
// not accepted: the value would be taken as the config file.
std::vector<std::string> extra_overrides(const CLI::App* cmd) {
  std::vector<std::string> out;
  for (const auto& a : cmd->remaining()) {
    if (a.rfind("--", 0) != 0 || a.find('=') == std::string::npos)
      throw ConfigError("unexpected argument '" + a + "' (overrides are written --key=value)");
    out.push_back(a.substr(2));
  }
  return out;
}

ConfigMap load(const Common& c, const CLI::App* cmd) {
  ConfigMap map;
  if (!c.config.empty()) map.load_ini(c.config);
  for (const auto& s : c.sets) map.apply_override(s);
  for (const auto& s : extra_overrides(cmd)) map.apply_override(s);
  return map;
}

std::string joined_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

int cmd_fit(const std::vector<std::string>& paths, double t_lo, double t_hi, int system_sites, const std::string& out) {
  std::vector<SeriesSummary> rows;
  for (const auto& path : paths) {
    const TimeSeriesTable tab = read_timeseries(path);
    int L_S = system_sites;
    const auto meta = std::filesystem::path(path).parent_path() / "metadata.json";
    if (L_S <= 0 && std::filesystem::exists(meta)) {
      std::ifstream is(meta);
      const auto j = nlohmann::json::parse(is, nullptr, false);
      if (!j.is_discarded() && j.contains("config") && j["config"].contains("model.L_S"))
        L_S = std::stoi(j["config"]["model.L_S"].get<std::string>());
    }
    SeriesColumns cols{tab.t, tab.s_vn, tab.n_bath_mean, tab.n_bath_var, {}};
    if (L_S > 0)
      for (double m : tab.m_sys) cols.n_sys.push_back(m + 0.5 * L_S);
    std::string label = std::filesystem::path(path).parent_path().filename().string();
    if (label.empty()) label = path;
    rows.push_back(summarize(label, cols, t_lo, t_hi));
  }
  const std::string table = format_summary(rows);
  std::cout << table;
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write " + out);
    os << table;
  }
  return exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Page-curve dynamics of an XXZ system coupled to an XXZ bath (MPS/TEBD)"};
  app.require_subcommand(1);

  Common run_c, ov_c, early_c, sweep_c;
  auto* run = app.add_subcommand("run", "Time evolution with measurements and Boltzmann fits");
  add_common(run, run_c);
  auto* overlap = app.add_subcommand("overlap", "Exact overlap spectra of the filled and random states");
  add_common(overlap, ov_c);
  auto* early = app.add_subcommand("validate-early", "Compare short-time dynamics with the closed forms");
  add_common(early, early_c);

  auto* sweep = app.add_subcommand("sweep", "Run a grid of configurations in worker processes");
  add_common(sweep, sweep_c);
  std::vector<std::string> vary;
  int jobs = 1;
  std::string sweep_out = "sweep";
  sweep->add_option("--vary", vary, "key=v1,v2,... (repeatable; cartesian product)")->required();
  sweep->add_option("-j,--jobs", jobs, "Concurrent worker processes");
  sweep->add_option("-o,--out", sweep_out, "Sweep directory (relative to the output root)");

  auto* fit = app.add_subcommand("fit", "Growth exponents and Page data from timeseries CSV files");
  std::vector<std::string> csvs;
  double t_lo = 0.0, t_hi = 0.0;
  int system_sites = 0;
  std::string fit_out;
  fit->add_option("csv", csvs, "timeseries.csv files")->required();
  fit->add_option("--t-lo", t_lo, "Start of the fit window (default 2)");
  fit->add_option("--t-hi", t_hi, "End of the fit window (default half the Page time)");
  fit->add_option("--system-sites", system_sites, "L_S when no metadata.json sits next to a CSV");
  fit->add_option("-o,--out", fit_out, "Also write the table to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_code::ok : exit_code::config;
  }

  RunOptions opts;
  opts.command_line = joined_args(argc, argv);
  try {
    if (*run) {
      const ConfigMap map = load(run_c, run);
      const SimulationConfig cfg = to_simulation_config(map);
      if (!run_c.quiet) opts.log = &std::cerr;
      const RunResult r = run_simulation(cfg, map, opts);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "rows " << r.records.size() << ", cumulative discarded weight " << fmt_double(r.cumulative_discarded)
                << ", wall " << r.wall_seconds << " s\n";
      return r.sz_conserved ? exit_code::ok : exit_code::validation;
    }
    if (*overlap) {
      const ConfigMap map = load(ov_c, overlap);
      const SimulationConfig cfg = to_simulation_config(map, Workload::spectrum);
      if (!ov_c.quiet) opts.log = &std::cerr;
      const OverlapReport r = run_overlap(cfg, map, opts);
      std::cout << "PR filled " << r.pr_filled << ", PR random " << r.pr_random << ", ratio " << r.pr_random / r.pr_filled
                << "\n";
      return exit_code::ok;
    }
    if (*early) {
      const ConfigMap map = load(early_c, early);
      const SimulationConfig cfg = to_simulation_config(map);
      if (!early_c.quiet) opts.log = &std::cerr;
      const EarlyReport r = run_validate_early(cfg, map, opts);
      std::cout << (r.passed ? "PASS" : "FAIL") << " max relative deviation: s_vn " << r.deviation.s_vn
                << (r.check_s_vn ? "" : " (not gated)") << ", n_bath " << r.deviation.n_bath << ", var "
                << r.deviation.n_bath_var << " (tolerance " << r.tolerance << ")\n";
      return r.passed ? exit_code::ok : exit_code::validation;
    }
    if (*sweep) {
      std::vector<std::string> overrides = sweep_c.sets;
      for (const auto& s : extra_overrides(sweep)) overrides.push_back(s);
      {
        ConfigMap map;  // fail fast on bad keys before spawning workers
        if (!sweep_c.config.empty()) map.load_ini(sweep_c.config);
        for (const auto& s : overrides) map.apply_override(s);
      }
      const std::string exe = std::filesystem::read_symlink("/proc/self/exe").string();
      const std::string config =
          sweep_c.config.empty() ? "" : std::filesystem::absolute(sweep_c.config).string();
      return run_sweep(exe, config, overrides, vary, jobs, sweep_out, std::cerr);
    }
    if (*fit) return cmd_fit(csvs, t_lo, t_hi, system_sites, fit_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::internal;
  }
  return exit_code::ok;
}
