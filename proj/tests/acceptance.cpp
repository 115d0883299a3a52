// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero when
// any check fails. PAGECURVE_LONG=1 enables the long reference run.

#include "pagecurve/analysis.hpp"
#include "pagecurve/boltzmann.hpp"
#include "pagecurve/ed_oracle.hpp"
#include "pagecurve/linalg.hpp"
#include "pagecurve/runner.hpp"
#include "pagecurve/tebd.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace pagecurve;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

ConfigMap config(const std::vector<std::string>& overrides) {
  ConfigMap m;
  for (const auto& kv : overrides) m.apply_override(kv);
  return m;
}

struct Conservation {
  double worst_drift_ratio = 0.0;  // drift / allowed
  double worst_var = 0.0;
  int runs = 0;
  bool ok = true;

  void add(const RunResult& r, bool filled) {
    ++runs;
    const double allowed = std::max(1e-8, 10.0 * r.cumulative_discarded);
    worst_drift_ratio = std::max(worst_drift_ratio, r.max_sz_drift / allowed);
    ok = ok && r.sz_conserved;
    if (filled) {
      worst_var = std::max(worst_var, r.max_var_mismatch);
      ok = ok && r.max_var_mismatch <= 1e-8;
    }
  }
};

Conservation conservation;

RunResult run_quiet(const std::vector<std::string>& overrides) {
  const ConfigMap m = config(overrides);
  const SimulationConfig cfg = to_simulation_config(m);
  RunOptions opts;
  opts.write_files = false;
  RunResult r = run_simulation(cfg, m, opts);
  conservation.add(r, cfg.state.kind == InitialKind::filled);
  return r;
}

std::string fmt(double x) { return std::to_string(x); }

void early_filled() {
  bool all = true;
  std::ostringstream detail;
  for (double delta : {0.8, 1.0})
    for (double jp : {0.0, 1.0}) {
      const std::vector<std::string> base = {"L_S=6",           "L_B=20",      "delta_sys=" + fmt(delta),
                                             "delta_bath=" + fmt(delta), "j_prime=" + fmt(jp), "dt=0.01",
                                             "chi_max=64",      "kind=filled", "boltzmann=false"};
      auto ov = base;
      ov.insert(ov.end(), {"early.t_lo=0.1", "early.t_hi=0.5"});
      const ConfigMap m = config(ov);
      RunOptions opts;
      opts.write_files = false;
      const auto t0 = std::chrono::steady_clock::now();
      const EarlyReport rep = run_validate_early(to_simulation_config(m), m, opts);
      const double secs = seconds_since(t0);
      const bool pass = rep.passed && rep.tolerance == 0.05 && secs < 60.0;
      all = all && pass;
      detail << "[D=" << delta << " J'=" << jp << " dev S=" << num(rep.deviation.s_vn)
             << " N=" << num(rep.deviation.n_bath) << " var=" << num(rep.deviation.n_bath_var) << " " << num(secs)
             << "s] ";
      auto run = base;
      run.insert(run.end(), {"t_max=2", "measure_cadence=10", "variance_cadence=10"});
      run_quiet(run);
    }
  report("early-time filled (5%, <1 min per case)", all, detail.str());
}

void early_high_entropy() {
  bool all = true;
  std::ostringstream detail;
  for (double delta : {0.8, 1.0})
    for (double jp : {0.0, 1.0}) {
      const std::vector<std::string> base = {
          "L_S=6",   "L_B=20",     "delta_sys=" + fmt(delta), "delta_bath=" + fmt(delta), "j_prime=" + fmt(jp),
          "dt=0.01", "chi_max=64", "kind=high_entropy",       "boltzmann=false"};
      auto ov = base;
      ov.insert(ov.end(), {"early.t_lo=0.1", "early.t_hi=0.5", "seeds=8"});
      const ConfigMap m = config(ov);
      RunOptions opts;
      opts.write_files = false;
      const auto t0 = std::chrono::steady_clock::now();
      const EarlyReport rep = run_validate_early(to_simulation_config(m), m, opts);
      const double secs = seconds_since(t0);
      const bool pass = rep.passed && rep.tolerance == 0.10 && secs < 300.0;
      all = all && pass;
      detail << "[D=" << delta << " J'=" << jp << " dev N=" << num(rep.deviation.n_bath)
             << " var=" << num(rep.deviation.n_bath_var) << " " << num(secs) << "s] ";
      auto run = base;
      run.insert(run.end(), {"t_max=2", "measure_cadence=10", "variance_cadence=10"});
      run_quiet(run);
    }
  report("early-time high-entropy (8 seeds, 10%, <5 min)", all, detail.str());
}

double max_dev(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Fields of an MPS record against the dense oracle evaluated on the same state.
double record_deviation(const TimeSeriesRecord& r, const ed::DenseRecord& d, const CellSpectrum& sys,
                        const CellSpectrum& bin) {
  double dev = 0.0;
  for (auto [x, y] : std::initializer_list<std::pair<double, double>>{{r.s_vn, d.s_vn}, {r.n_bath_mean, d.n_bath_mean}, {r.n_bath_var, d.n_bath_var},
                      {r.n_sys_mean, d.n_sys_mean}, {r.n_sys_var, d.n_sys_var}, {r.e_sys, d.e_sys},
                      {r.m_sys, d.m_sys}})
    dev = std::max(dev, std::abs(x - y));
  dev = std::max({dev, max_dev(r.density, d.density), max_dev(r.e_bins, d.e_bins), max_dev(r.m_bins, d.m_bins)});
  const GcFit a = fit_gc(sys, r.e_sys, r.m_sys), b = fit_gc(sys, d.e_sys, d.m_sys);
  dev = std::max(dev, std::abs(a.entropy - b.entropy));
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < r.e_bins.size(); ++k) {
    sa += fit_gc(bin, r.e_bins[k], r.m_bins[k]).entropy;
    sb += fit_gc(bin, d.e_bins[k], d.m_bins[k]).entropy;
  }
  return std::max(dev, std::abs(sa - sb));
}

void oracle_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::ostringstream detail;
  for (double jp : {0.0, 1.0})
    for (InitialKind kind : {InitialKind::filled, InitialKind::high_entropy}) {
      ModelParams p;
      p.L_S = 4;
      p.L_B = 4;
      p.delta_sys = p.delta_bath = 0.8;
      p.j_prime = jp;
      const Geometry g = Geometry::for_model(p);
      const CellLayout cells(p, g);
      const CellSpectrum sys = cell_spectrum(p, CellKind::system), bin = cell_spectrum(p, CellKind::bath_bin);
      InitialStateSpec spec;
      spec.kind = kind;
      MpsState s = prepare(spec, p, 16, 0.0);
      const TrotterPlan plan = make_plan(build_bonds(p), 0.05);
      const int L = p.total_sites();
      const int span = g.encoding() == Encoding::chain ? 2 : 4;
      const int stride = g.encoding() == Encoding::chain ? 1 : 2;
      const CVector psi0 = s.to_dense();
      CVector trotter = psi0;
      double field_dev = 0.0, exact_field_dev = 0.0;
      const RMatrix h = ed::dense_hamiltonian(p);
      const ed::DenseEvolver exact(h);
      const double cum = evolve(s, plan, 200, 10, [&](int step, double t, const MpsState& st, double) {
        const TimeSeriesRecord r = measure(st, p, g, cells);
        field_dev = std::max(field_dev, record_deviation(r, ed::dense_measure(trotter, p, 0), sys, bin));
        exact_field_dev =
            std::max(exact_field_dev, record_deviation(r, ed::dense_measure(exact.evolve(psi0, t), p, 0), sys, bin));
        if (step == 200) return;
        // Dense Trotter oracle: the same gates applied to the full vector, ten steps ahead.
        for (int k = 0; k < 10; ++k)
          for (const auto& layer : plan.layers)
            for (const auto& [bond, gate] : layer.gates)
              trotter = ed::apply_gate(trotter, L, stride * bond, span, plan.gate_store[gate]);
      });
      const CVector tebd = s.to_dense();
      const double fidelity = std::norm(tebd.dot(exact.evolve(psi0, 10.0)));
      const double trotter_fid = std::norm(tebd.dot(trotter));
      const bool pass = fidelity >= 1.0 - 1e-6 && field_dev <= 1e-8 && cum <= 1e-14;
      all = all && pass;
      detail << "[J'=" << jp << " " << to_string(kind) << " 1-F=" << num(1.0 - fidelity)
             << " fields=" << num(field_dev) << " (vs exact " << num(exact_field_dev)
             << ", trotter 1-F=" << num(1.0 - trotter_fid) << ")] ";
      run_quiet({"L_S=4", "L_B=4", "delta_sys=0.8", "delta_bath=0.8", "j_prime=" + fmt(jp), "dt=0.05",
                 "chi_max=16", "svd_cutoff=0", "t_max=10", "kind=" + to_string(kind)});
    }
  const double secs = seconds_since(t0);
  report("oracle fidelity (F >= 1-1e-6, fields 1e-8, <1 min)", all && secs < 60.0, detail.str() + num(secs) + "s");
}

double dense_entropy(const ModelParams& p, double beta, double mu) {
  const int n = p.L_S;
  std::vector<std::uint64_t> all(std::size_t{1} << n);
  for (std::size_t x = 0; x < all.size(); ++x) all[x] = x;
  const RMatrix h = ed::couplings_hamiltonian(n, system_cell_couplings(p), all);
  RMatrix sz = RMatrix::Zero(h.rows(), h.cols());
  for (std::size_t x = 0; x < all.size(); ++x)
    for (int i = 0; i < n; ++i) sz(x, x) += ed::is_up(x, n, i) ? 0.5 : -0.5;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(beta * (h - mu * sz));
  RVector w = (-(es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
  w /= w.sum();
  const RMatrix rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> er(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < er.eigenvalues().size(); ++k) {
    const double l = er.eigenvalues()(k);
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

void gc_fitter() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelParams p;
  p.L_S = 6;
  p.L_B = 6;
  p.delta_sys = p.delta_bath = 1.0;
  const CellSpectrum spec = cell_spectrum(p, CellKind::system);
  double round_trip = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const double beta = -3.0 + 0.75 * i, mu = -3.0 + 0.75 * j;
      const GcMoments g = gc_expectations(spec, beta, mu);
      const GcFit f = fit_gc(spec, g.energy, g.magnetization, 1e-12);
      const double err_mu = beta == 0.0 ? std::abs(f.mu) : std::abs(f.mu - mu);
      round_trip = std::max({round_trip, std::abs(f.beta - beta), err_mu});
    }
  double identity = 0.0;
  for (int ls = 2; ls <= 6; ++ls) {
    ModelParams q = p;
    q.L_S = q.L_B = ls;
    q.delta_sys = 1.1;
    const CellSpectrum sq = cell_spectrum(q, CellKind::system);
    for (double beta : {-1.5, 0.4, 2.0})
      for (double mu : {-0.7, 0.0, 1.3})
        identity = std::max(identity, std::abs(gc_entropy(sq, beta, mu) - dense_entropy(q, beta, mu)));
  }
  const double half = 0.5 * p.L_S;
  const GcFit up = fit_gc(spec, spec.sector_energies.back()(0), half);
  const GcFit down = fit_gc(spec, spec.sector_energies.front()(0), -half);
  const GcFit inf = fit_gc(spec, 0.0, 0.0);
  const double s_inf_err = std::abs(inf.entropy - p.L_S * std::log(2.0));
  const double secs = seconds_since(t0);
  const bool pass = round_trip <= 1e-6 && identity <= 1e-10 && up.entropy == 0.0 && down.entropy == 0.0 &&
                    s_inf_err <= 1e-12 && secs < 60.0;
  report("GC fitter", pass,
         "round trip " + num(round_trip) + ", identity " + num(identity) + ", extremal S " + num(up.entropy) + "/" +
             num(down.entropy) + ", beta=0 S-L ln2 " + num(s_inf_err) + ", " + num(secs) + "s");
}

void page_curve() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_quiet({"L_S=6", "L_B=60", "delta_sys=1", "delta_bath=1", "j_prime=0", "kind=filled",
                                 "chi_max=100", "dt=0.05", "t_max=60"});
  const double secs = seconds_since(t0);
  std::vector<double> t, s, n;
  for (const auto& rec : r.records) {
    t.push_back(rec.t);
    s.push_back(rec.s_vn);
    n.push_back(rec.n_sys_mean);
  }
  const PageReport page = detect_page(t, s, n);
  const double s_end = s.empty() ? 0.0 : s.back();
  const bool decays = page.has_page && s_end < 0.9 * page.s_vn_max;
  const bool pass = page.has_page && decays && std::abs(page.escaped_fraction - 0.55) <= 0.15 && secs <= 1800.0;
  report("Page-curve shape (L_S=6, L_B=60)", pass,
         "t_page " + num(page.t_page) + ", S_max " + num(page.s_vn_max) + ", S(t_end) " + num(s_end) +
             ", escaped " + num(page.escaped_fraction) + ", " + num(secs) + "s");
}

std::map<std::string, double> golden() {
  std::ifstream in(std::string(PAGECURVE_GOLDEN_DIR) + "/ed_golden.txt");
  std::map<std::string, double> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    double v;
    if (ls >> key >> v) out[key] = v;
  }
  return out;
}

void freezing() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::ostringstream detail;
  double golden_dev = INFINITY;
  const auto ref = golden();
  for (double delta : {0.8, 1.0, 1.2}) {
    const ConfigMap m = config({"L_S=10", "L_B=6", "j_prime=1", "delta_sys=" + fmt(delta), "delta_bath=" + fmt(delta),
                                "kind=filled", "precision=single"});
    RunOptions opts;
    opts.write_files = false;
    const OverlapReport rep = run_overlap(to_simulation_config(m, Workload::spectrum), m, opts);
    const double ratio = rep.pr_random / rep.pr_filled;
    all = all && ratio >= 10.0;
    detail << "[D=" << delta << " PR " << num(rep.pr_filled) << " vs " << num(rep.pr_random) << " ratio "
           << num(ratio) << "] ";
    if (delta == 1.2 && ref.count("freezing_filled_pr_ls10_lb6_jp1_delta1.2"))
      golden_dev = std::max(std::abs(rep.pr_filled - ref.at("freezing_filled_pr_ls10_lb6_jp1_delta1.2")),
                            std::abs(rep.max_overlap_filled - ref.at("freezing_filled_max_overlap_ls10_lb6_jp1_delta1.2")));
  }
  const double secs = seconds_since(t0);
  detail << "golden dev " << num(golden_dev) << ", " << num(secs) << "s";
  report("freezing signature (PR ratio >= 10, <5 min)", all && golden_dev <= 1e-5 && secs < 300.0, detail.str());
}

void long_reference() {
  const char* env = std::getenv("PAGECURVE_LONG");
  if (!env || std::string(env) != "1") {
    std::cout << "SKIP long reference run (L_S=10, L_B=200, chi=150): set PAGECURVE_LONG=1" << std::endl;
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_quiet({"L_S=10", "L_B=200", "delta_sys=1", "delta_bath=1", "j_prime=0", "kind=filled",
                                 "chi_max=150", "dt=0.05", "t_max=250", "boltzmann=false"});
  SeriesColumns c;
  for (const auto& rec : r.records) {
    c.t.push_back(rec.t);
    c.s_vn.push_back(rec.s_vn);
    c.n_bath_mean.push_back(rec.n_bath_mean);
    c.n_bath_var.push_back(rec.n_bath_var);
    c.n_sys.push_back(rec.n_sys_mean);
  }
  const SeriesSummary sum = summarize("filled", c);
  double alpha = NAN;
  for (const auto& f : sum.growth)
    if (f.quantity == "s_vn") alpha = f.exponent;
  report("long reference growth exponent (0.307 +- 0.05)", std::abs(alpha - 0.307) <= 0.05,
         "alpha " + num(alpha) + " on [" + num(sum.growth.empty() ? 0.0 : sum.growth[0].t_lo) + ", " +
             num(sum.growth.empty() ? 0.0 : sum.growth[0].t_hi) + "], " + num(seconds_since(t0)) + "s");
}

}  // namespace

int main() {
  try {
    gc_fitter();
    oracle_fidelity();
    early_filled();
    early_high_entropy();
    freezing();
    page_curve();
    long_reference();
    report("conservation (every run above)", conservation.ok,
           std::to_string(conservation.runs) + " runs, worst drift/allowed " + num(conservation.worst_drift_ratio) +
               ", worst |var N_B - var N_S| " + num(conservation.worst_var));
  } catch (const std::exception& e) {
    report("acceptance harness", false, e.what());
  }
  return failures == 0 ? 0 : 1;
}
