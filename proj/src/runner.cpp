#include "pagecurve/runner.hpp"

#include "pagecurve/analysis.hpp"
#include "pagecurve/boltzmann.hpp"
#include "pagecurve/ed_oracle.hpp"
#include "pagecurve/format.hpp"
#include "pagecurve/tebd.hpp"

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifndef PAGECURVE_VERSION
#define PAGECURVE_VERSION "unknown"
#endif

namespace pagecurve {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double tick_time(int step, double dt) { return std::round(step * dt * 1e12) / 1e12; }

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

json config_echo(const ConfigMap& map) {
  json j = json::object();
  for (const auto& [k, v] : map.values()) j[k] = v;
  return j;
}

// JSON cannot hold NaN/inf; such values are written as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt_double(v);
}

fs::path prepare_dir(const SimulationConfig& cfg) {
  fs::path dir = resolve_output_dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void check_finite(const TimeSeriesRecord& r) {
  const double vals[] = {r.s_vn, r.n_bath_mean, r.e_sys, r.m_sys, r.n_sys_mean};
  for (double v : vals)
    if (!std::isfinite(v)) throw NumericalError("non-finite observable at t = " + fmt_double(r.t));
}

}  // namespace

std::string timeseries_row(const TimeSeriesRecord& r) {
  std::string s;
  const double vals[] = {r.t, r.s_vn, r.n_bath_mean, r.n_bath_var, r.e_sys, r.m_sys, r.s_b_sys, r.s_b_bath,
                         r.discarded_weight_cum};
  for (double v : vals) {
    s += fmt_double(v);
    s += ',';
  }
  s += std::to_string(r.chi_used);
  return s;
}

RunResult run_simulation(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts) {
  const auto wall0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  validate(cfg);
  const ModelParams& p = cfg.model;
  const Geometry g = Geometry::for_model(p);
  const TrotterPlan plan = make_plan(build_bonds(p), cfg.dt);

  RunResult res;
  MpsState s = prepare(cfg.state, p, cfg.chi_max, cfg.svd_cutoff, &res.warnings);

  const int bin = (p.L_B % cfg.effective_bin_size() == 0) ? cfg.effective_bin_size() : p.L_B;
  const CellLayout cells(p, g, bin);
  CellSpectrum sys_spec, bin_spec;
  if (cfg.boltzmann) {
    sys_spec = cell_spectrum(p, CellKind::system);
    bin_spec = cell_spectrum(p, CellKind::bath_bin, bin);
  }

  const int steps = cfg.steps();
  const int last_tick = steps / cfg.measure_cadence * cfg.measure_cadence;
  std::set<int> snapshot_steps;
  for (double tau : cfg.snapshot_times) {
    const long k = std::lround(tau / (cfg.dt * cfg.measure_cadence));
    snapshot_steps.insert(static_cast<int>(std::clamp<long>(k * cfg.measure_cadence, 0, last_tick)));
  }

  fs::path dir;
  std::ofstream ts, prof, fitlog;
  if (opts.write_files) {
    dir = prepare_dir(cfg);
    ts = open_out(dir / "timeseries.csv");
    prof = open_out(dir / "profiles.csv");
    ts << timeseries_header() << "\n";
    prof << "t,site,density\n";
    if (cfg.boltzmann) {
      fitlog = open_out(dir / "fitlog.csv");
      fitlog << fit_log_header() << "\n";
    }
  }

  double sz0 = 0.0;
  int unconverged = 0;
  auto sink = [&](int step, double, const MpsState& st, double cum) {
    const bool with_var = step % cfg.variance_cadence == 0;
    TimeSeriesRecord r = measure(st, p, g, cells, {with_var, true});
    r.t = tick_time(step, cfg.dt);
    r.discarded_weight_cum = cum;
    check_finite(r);
    const double norm = st.schmidt_values(g.cut_bond()).squaredNorm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-8) throw NumericalError("state lost its normalization");

    r.s_b_sys = r.s_b_bath = std::nan("");
    if (with_var && cfg.boltzmann) {
      const GcFit fs_ = fit_gc(sys_spec, r.e_sys, r.m_sys, cfg.fit_tol);
      std::vector<GcFit> fits;
      for (int k = 0; k < cells.bins; ++k) fits.push_back(fit_gc(bin_spec, r.e_bins[k], r.m_bins[k], cfg.fit_tol));
      r.s_b_sys = fs_.entropy;
      r.s_b_bath = bath_entropy(fits);
      unconverged += fs_.converged ? 0 : 1;
      for (const auto& f : fits) unconverged += f.converged ? 0 : 1;
      if (opts.write_files) {
        fitlog << fit_log_line(r.t, "sys", fs_) << "\n";
        for (int k = 0; k < cells.bins; ++k) fitlog << fit_log_line(r.t, "bin" + std::to_string(k), fits[k]) << "\n";
        fitlog.flush();
      }
    }

    const double sz = r.total_sz();
    if (step == 0) sz0 = sz;
    const double drift = std::abs(sz - sz0);
    res.max_sz_drift = std::max(res.max_sz_drift, drift);
    if (drift > std::max(1e-8, 10.0 * cum)) res.sz_conserved = false;
    if (with_var && cfg.state.kind == InitialKind::filled)
      res.max_var_mismatch = std::max(res.max_var_mismatch, std::abs(r.n_bath_var - r.n_sys_var));
    res.cumulative_discarded = cum;

    if (opts.write_files) {
      ts << timeseries_row(r) << "\n";
      ts.flush();
      if (cfg.snapshot_times.empty() || snapshot_steps.count(step)) {
        for (std::size_t i = 0; i < r.density.size(); ++i)
          prof << fmt_double(r.t) << "," << i << "," << fmt_double(r.density[i]) << "\n";
        prof.flush();
      }
    }
    if (opts.log)
      *opts.log << "t=" << fmt_double(r.t) << " s_vn=" << r.s_vn << " n_bath=" << r.n_bath_mean
                << " chi=" << r.chi_used << "\n"
                << std::flush;
    res.records.push_back(std::move(r));
  };
  evolve(s, plan, steps, cfg.measure_cadence, sink);

  if (!res.sz_conserved)
    res.warnings.push_back("total Sz drift exceeded max(1e-8, 10 x cumulative discarded weight)");
  if (unconverged > 0) res.warnings.push_back(std::to_string(unconverged) + " grand-canonical fits did not converge");
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  if (!opts.write_files) return res;

  SeriesColumns cols;
  for (const auto& r : res.records) {
    cols.t.push_back(r.t);
    cols.s_vn.push_back(r.s_vn);
    cols.n_bath_mean.push_back(r.n_bath_mean);
    cols.n_bath_var.push_back(r.n_bath_var);
    cols.n_sys.push_back(r.n_sys_mean);
  }
  const SeriesSummary summary = summarize(dir.filename().string(), cols, cfg.fit_t_lo, cfg.fit_t_hi);
  open_out(dir / "summary.txt") << format_summary({summary});

  std::vector<std::string> outputs = {"timeseries.csv", "profiles.csv", "summary.txt", "metadata.json"};
  if (cfg.boltzmann) outputs.push_back("fitlog.csv");
  json manifest;
  if (cfg.checkpoint) {
    std::ofstream ck(dir / "checkpoint.mps", std::ios::binary);
    if (!ck) throw ConfigError("cannot write checkpoint");
    json meta = {{"config", config_echo(map)}, {"t", tick_time(steps, cfg.dt)}, {"seed", cfg.state.seed}};
    s.save(ck, meta.dump());
    outputs.push_back("checkpoint.mps");
  }
  manifest["program"] = "pagecurve";
  manifest["version"] = PAGECURVE_VERSION;
  manifest["command"] = opts.command_line;
  manifest["config"] = config_echo(map);
  manifest["seed"] = cfg.state.seed;
  manifest["encoding"] = g.encoding() == Encoding::chain ? "chain" : "ladder";
  manifest["steps"] = steps;
  manifest["rows"] = res.records.size();
  manifest["cumulative_discarded_weight"] = num(res.cumulative_discarded);
  manifest["max_sz_drift"] = num(res.max_sz_drift);
  manifest["sz_conserved"] = res.sz_conserved;
  if (cfg.state.kind == InitialKind::filled) manifest["max_var_mismatch"] = num(res.max_var_mismatch);
  manifest["page"] = {{"has_page", summary.page.has_page},
                      {"t_page", num(summary.page.t_page)},
                      {"escaped_fraction", num(summary.page.escaped_fraction)}};
  manifest["started_utc"] = started;
  manifest["finished_utc"] = utc_now();
  manifest["wall_time_s"] = res.wall_seconds;
  manifest["warnings"] = res.warnings;
  manifest["outputs"] = outputs;
  manifest["build"] = {{"compiler", __VERSION__},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)}};
  open_out(dir / "metadata.json") << manifest.dump(2) << "\n";
  return res;
}

OverlapReport run_overlap(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts) {
  const auto wall0 = std::chrono::steady_clock::now();
  const ModelParams& p = cfg.model;
  if (p.total_sites() > 16) throw ConfigError("overlap mode needs L_S + L_B <= 16");
  if (p.L_S % 2 != 0 || p.L_S > 12) throw ConfigError("overlap mode needs an even L_S <= 12");
  std::vector<bool> up(p.total_sites(), false);
  for (int i = 0; i < p.L_S; ++i) up[i] = true;
  const auto filled = ed::overlap_histogram_sectors(p, ed::product_vector(up), cfg.overlap_precision);
  if (opts.log) *opts.log << "filled: PR = " << filled.participation_ratio << "\n" << std::flush;
  const auto random = ed::overlap_histogram_sectors(p, ed::random_coefficient_state(p, cfg.state.seed), cfg.overlap_precision);
  if (opts.log) *opts.log << "random: PR = " << random.participation_ratio << "\n" << std::flush;

  OverlapReport rep;
  rep.pr_filled = filled.participation_ratio;
  rep.pr_random = random.participation_ratio;
  rep.max_overlap_filled = filled.max_overlap;
  rep.max_overlap_random = random.max_overlap;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  if (!opts.write_files) return rep;

  const fs::path dir = prepare_dir(cfg);
  auto csv = open_out(dir / "overlap.csv");
  csv << "state,energy,overlap\n";
  for (const auto& [name, h] : {std::pair{"filled", &filled}, std::pair{"random", &random}})
    for (Eigen::Index k = 0; k < h->energies.size(); ++k)
      csv << name << "," << fmt_double(h->energies(k)) << "," << fmt_double(h->overlaps(k)) << "\n";
  json j;
  j["program"] = "pagecurve";
  j["version"] = PAGECURVE_VERSION;
  j["command"] = opts.command_line;
  j["config"] = config_echo(map);
  j["filled"] = {{"participation_ratio", rep.pr_filled}, {"max_overlap", rep.max_overlap_filled},
                 {"levels", filled.energies.size()}};
  j["random"] = {{"participation_ratio", rep.pr_random}, {"max_overlap", rep.max_overlap_random},
                 {"levels", random.energies.size()}, {"seed", cfg.state.seed}};
  j["pr_ratio"] = rep.pr_random / rep.pr_filled;
  j["precision"] = cfg.overlap_precision == ed::Precision::single ? "single" : "double";
  j["wall_time_s"] = rep.seconds;
  open_out(dir / "metadata.json") << j.dump(2) << "\n";
  return rep;
}

EarlyReport run_validate_early(const SimulationConfig& cfg, const ConfigMap& map, const RunOptions& opts) {
  const auto wall0 = std::chrono::steady_clock::now();
  const ModelParams& p = cfg.model;
  const Geometry g = Geometry::for_model(p);
  const TrotterPlan plan = make_plan(build_bonds(p), cfg.dt);
  const CellLayout cells(p, g, p.L_B % cfg.effective_bin_size() == 0 ? cfg.effective_bin_size() : p.L_B);
  const int steps = static_cast<int>(std::lround(cfg.early_t_hi / cfg.dt));
  const bool filled = cfg.state.kind == InitialKind::filled;
  const int seeds = filled ? 1 : cfg.early_seeds;

  EarlyReport rep;
  std::vector<TimeSeriesRecord> sum;
  for (int k = 0; k < seeds; ++k) {
    InitialStateSpec spec = cfg.state;
    spec.seed = cfg.state.seed + static_cast<std::uint64_t>(k);
    MpsState s = prepare(spec, p, cfg.chi_max, cfg.svd_cutoff);
    std::size_t idx = 0;
    evolve(s, plan, steps, 1, [&](int step, double, const MpsState& st, double cum) {
      TimeSeriesRecord r = measure(st, p, g, cells, {true, false});
      r.t = tick_time(step, cfg.dt);
      r.discarded_weight_cum = cum;
      check_finite(r);
      if (k == 0) {
        sum.push_back(r);
      } else {
        TimeSeriesRecord& a = sum[idx];
        a.s_vn += r.s_vn;
        a.n_bath_mean += r.n_bath_mean;
        a.n_bath_var += r.n_bath_var;
        a.n_sys_mean += r.n_sys_mean;
        a.discarded_weight_cum = std::max(a.discarded_weight_cum, cum);
        a.chi_used = std::max(a.chi_used, r.chi_used);
      }
      ++idx;
    });
    if (opts.log) *opts.log << "seed " << spec.seed << " done\n" << std::flush;
  }
  for (auto& a : sum) {
    a.s_vn /= seeds;
    a.n_bath_mean /= seeds;
    a.n_bath_var /= seeds;
    a.n_sys_mean /= seeds;
  }
  rep.averaged = sum;
  rep.deviation = compare(cfg.state.kind, sum, cfg.early_t_lo, cfg.early_t_hi);
  rep.tolerance = cfg.early_tolerance > 0.0 ? cfg.early_tolerance : (filled ? 0.05 : 0.10);
  rep.check_s_vn = filled;
  rep.passed = rep.deviation.samples > 0 && rep.deviation.n_bath <= rep.tolerance &&
               rep.deviation.n_bath_var <= rep.tolerance && (!filled || rep.deviation.s_vn <= rep.tolerance);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  if (!opts.write_files) return rep;

  const fs::path dir = prepare_dir(cfg);
  auto csv = open_out(dir / "early_validation.csv");
  csv << "t,s_vn,s_vn_pred,n_bath_mean,n_bath_pred,n_bath_var,n_bath_var_pred\n";
  for (const auto& r : sum)
    csv << fmt_double(r.t) << "," << fmt_double(r.s_vn) << "," << fmt_double(early_s_vn(cfg.state.kind, r.t)) << ","
        << fmt_double(r.n_bath_mean) << "," << fmt_double(early_n_bath(cfg.state.kind, r.t)) << ","
        << fmt_double(r.n_bath_var) << "," << fmt_double(early_n_bath_var(cfg.state.kind, r.t)) << "\n";
  json j;
  j["program"] = "pagecurve";
  j["version"] = PAGECURVE_VERSION;
  j["command"] = opts.command_line;
  j["config"] = config_echo(map);
  j["seeds"] = seeds;
  j["window"] = {cfg.early_t_lo, cfg.early_t_hi};
  j["tolerance"] = rep.tolerance;
  j["max_rel_dev"] = {{"s_vn", rep.deviation.s_vn}, {"n_bath_mean", rep.deviation.n_bath},
                      {"n_bath_var", rep.deviation.n_bath_var}};
  j["s_vn_gated"] = rep.check_s_vn;
  j["passed"] = rep.passed;
  j["wall_time_s"] = rep.seconds;
  open_out(dir / "metadata.json") << j.dump(2) << "\n";
  return rep;
}

TimeSeriesTable read_timeseries(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != timeseries_header()) throw ConfigError(path + ": unexpected CSV header");
  TimeSeriesTable t;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 10) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 10 fields");
    auto d = [&](int k) {
      char* end = nullptr;
      const double v = std::strtod(f[k].c_str(), &end);
      if (end == f[k].c_str() || *end != '\0') throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number");
      return v;
    };
    t.t.push_back(d(0));
    t.s_vn.push_back(d(1));
    t.n_bath_mean.push_back(d(2));
    t.n_bath_var.push_back(d(3));
    t.e_sys.push_back(d(4));
    t.m_sys.push_back(d(5));
    t.s_b_sys.push_back(d(6));
    t.s_b_bath.push_back(d(7));
    t.disc_weight.push_back(d(8));
    t.chi_used.push_back(static_cast<int>(d(9)));
  }
  return t;
}

int run_sweep(const std::string& executable, const std::string& config_path, const std::vector<std::string>& overrides,
              const std::vector<std::string>& vary, int jobs, const std::string& output_dir, std::ostream& log) {
  if (jobs < 1) throw ConfigError("sweep: jobs must be >= 1");
  ConfigMap probe;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& v : vary) {
    const auto eq = v.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep: --vary expects key=v1,v2,...");
    const std::string key = probe.qualify(v.substr(0, eq));
    std::vector<std::string> values;
    std::stringstream ss(v.substr(eq + 1));
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) values.push_back(item);
    if (values.empty()) throw ConfigError("sweep: no values for " + key);
    axes.emplace_back(key, values);
  }
  std::vector<std::vector<std::pair<std::string, std::string>>> combos = {{}};
  for (const auto& [key, values] : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& c : combos)
      for (const auto& v : values) {
        auto e = c;
        e.emplace_back(key, v);
        next.push_back(std::move(e));
      }
    combos = std::move(next);
  }

  const fs::path base = resolve_output_dir(output_dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw ConfigError("cannot create " + base.string());

  struct Job {
    std::string name;
    std::vector<std::pair<std::string, std::string>> assignment;
    int exit = -1;
  };
  std::vector<Job> all;
  for (const auto& c : combos) {
    std::string name;
    for (const auto& [k, v] : c) name += (name.empty() ? "" : "_") + k.substr(k.find('.') + 1) + "-" + v;
    all.push_back({name.empty() ? "run" : name, c, -1});
  }

  std::map<pid_t, std::size_t> running;
  std::size_t next = 0;
  auto launch = [&](std::size_t i) {
    std::vector<std::string> args = {executable, "run"};
    if (!config_path.empty()) args.push_back(config_path);
    for (const auto& o : overrides) args.insert(args.end(), {"--set", o});
    for (const auto& [k, v] : all[i].assignment) args.insert(args.end(), {"--set", k + "=" + v});
    args.insert(args.end(), {"--set", "output.dir=" + (base / all[i].name).string(), "--quiet"});
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      std::vector<char*> argv;
      for (auto& a : args) argv.push_back(a.data());
      argv.push_back(nullptr);
      execv(executable.c_str(), argv.data());
      _exit(127);
    }
    running[pid] = i;
    log << "started " << all[i].name << " (pid " << pid << ")\n" << std::flush;
  };
  while (next < all.size() || !running.empty()) {
    while (next < all.size() && static_cast<int>(running.size()) < jobs) launch(next++);
    int status = 0;
    const pid_t pid = waitpid(-1, &status, 0);
    if (pid < 0) break;
    auto it = running.find(pid);
    if (it == running.end()) continue;
    all[it->second].exit = WIFEXITED(status) ? WEXITSTATUS(status) : exit_code::internal;
    log << "finished " << all[it->second].name << " exit " << all[it->second].exit << "\n" << std::flush;
    running.erase(it);
  }

  int worst = exit_code::ok;
  json j;
  j["program"] = "pagecurve";
  j["version"] = PAGECURVE_VERSION;
  j["config_file"] = config_path;
  j["overrides"] = overrides;
  j["runs"] = json::array();
  for (const auto& job : all) {
    json a = json::object();
    for (const auto& [k, v] : job.assignment) a[k] = v;
    j["runs"].push_back({{"name", job.name}, {"assignment", a}, {"exit_code", job.exit}});
    worst = std::max(worst, job.exit);
  }
  std::ofstream(base / "sweep.json") << j.dump(2) << "\n";
  return worst;
}

}  // namespace pagecurve
