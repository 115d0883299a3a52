#include "pagecurve/boltzmann.hpp"

#include "pagecurve/ed_oracle.hpp"
#include "pagecurve/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pagecurve {

int CellSpectrum::dimension() const {
  int n = 0;
  for (const auto& e : sector_energies) n += static_cast<int>(e.size());
  return n;
}

double CellSpectrum::min_energy() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& e : sector_energies) v = std::min(v, e.minCoeff());
  return v;
}

double CellSpectrum::max_energy() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& e : sector_energies) v = std::max(v, e.maxCoeff());
  return v;
}

CellSpectrum cell_spectrum(const ModelParams& p, CellKind kind, int bin_size) {
  CellSpectrum spec;
  spec.kind = kind;
  spec.sites = kind == CellKind::system ? p.L_S : (bin_size > 0 ? bin_size : p.L_S);
  if (spec.sites < 1 || spec.sites > 16) throw std::invalid_argument("cell_spectrum: cell size must be in [1, 16]");
  const auto couplings = kind == CellKind::system ? system_cell_couplings(p) : bin_cell_couplings(p, spec.sites);
  for (int n_up = 0; n_up <= spec.sites; ++n_up) {
    const auto basis = ed::make_sector(spec.sites, n_up);
    const RMatrix h = ed::couplings_hamiltonian(spec.sites, couplings, basis.states);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("cell_spectrum: eigensolver failed");
    spec.sector_m.push_back(n_up - 0.5 * spec.sites);
    spec.sector_energies.push_back(es.eigenvalues());
  }
  return spec;
}

GcMoments gc_moments_natural(const CellSpectrum& spec, double beta, double nu) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.sector_m.size(); ++k) {
    const auto& e = spec.sector_energies[k];
    shift = std::max(shift, std::max(-beta * e.minCoeff(), -beta * e.maxCoeff()) + nu * spec.sector_m[k]);
  }
  double z = 0.0, se = 0.0, sm = 0.0, see = 0.0, sem = 0.0, smm = 0.0;
  for (std::size_t k = 0; k < spec.sector_m.size(); ++k) {
    const double m = spec.sector_m[k];
    for (Eigen::Index i = 0; i < spec.sector_energies[k].size(); ++i) {
      const double e = spec.sector_energies[k](i);
      const double w = std::exp(-beta * e + nu * m - shift);
      z += w;
      se += w * e;
      sm += w * m;
      see += w * e * e;
      sem += w * e * m;
      smm += w * m * m;
    }
  }
  GcMoments g;
  g.energy = se / z;
  g.magnetization = sm / z;
  g.log_z = std::log(z) + shift;
  g.var_e = std::max(0.0, see / z - g.energy * g.energy);
  g.cov_em = sem / z - g.energy * g.magnetization;
  g.var_m = std::max(0.0, smm / z - g.magnetization * g.magnetization);
  return g;
}

GcMoments gc_expectations(const CellSpectrum& spec, double beta, double mu) {
  return gc_moments_natural(spec, beta, beta * mu);
}

double gc_entropy(const CellSpectrum& spec, double beta, double mu) {
  const GcMoments g = gc_expectations(spec, beta, mu);
  return g.log_z + beta * g.energy - beta * mu * g.magnetization;
}

std::string to_string(FitMethod m) {
  switch (m) {
    case FitMethod::newton: return "newton";
    case FitMethod::grid: return "grid";
    case FitMethod::extremal: return "extremal";
  }
  return "?";
}

namespace {

struct Trial {
  double beta = 0.0;
  double nu = 0.0;
  GcMoments g;
  double re = 0.0;
  double rm = 0.0;
  double norm() const { return std::hypot(re, rm); }
};

Trial evaluate(const CellSpectrum& spec, double beta, double nu, double e_t, double m_t) {
  Trial t{beta, nu, gc_moments_natural(spec, beta, nu), 0.0, 0.0};
  t.re = t.g.energy - e_t;
  t.rm = t.g.magnetization - m_t;
  return t;
}

// Damped Newton in (beta, nu). Returns the last accepted trial; `iters` counts accepted steps.
Trial newton(const CellSpectrum& spec, Trial cur, double e_t, double m_t, double tol, int& iters, bool& ok) {
  ok = false;
  for (iters = 0; iters < 100; ++iters) {
    if (std::abs(cur.re) <= tol && std::abs(cur.rm) <= tol) {
      ok = true;
      return cur;
    }
    // d(E, M)/d(beta, nu)
    const double a = -cur.g.var_e, b = cur.g.cov_em, c = -cur.g.cov_em, d = cur.g.var_m;
    const double det = a * d - b * c;
    const double scale = std::abs(a * d) + std::abs(b * c);
    if (!(std::abs(det) > 1e-14 * scale) || scale == 0.0) return cur;
    const double db = -(d * cur.re - b * cur.rm) / det;
    const double dn = -(-c * cur.re + a * cur.rm) / det;
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 30; ++h, lambda *= 0.5) {
      Trial next = evaluate(spec, cur.beta + lambda * db, cur.nu + lambda * dn, e_t, m_t);
      if (std::isfinite(next.norm()) && next.norm() < cur.norm()) {
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) return cur;
  }
  ok = std::abs(cur.re) <= tol && std::abs(cur.rm) <= tol;
  return cur;
}

GcFit finish(const Trial& t, bool ok, FitMethod method, int iters) {
  GcFit f;
  f.beta = t.beta;
  f.mu = t.beta != 0.0 ? t.nu / t.beta : 0.0;
  f.entropy = std::max(0.0, t.g.log_z + t.beta * t.g.energy - t.nu * t.g.magnetization);
  f.residual_e = t.re;
  f.residual_m = t.rm;
  f.converged = ok;
  f.method = method;
  f.iterations = iters;
  return f;
}

}  // namespace

GcFit fit_gc(const CellSpectrum& spec, double e_target, double m_target, double tol) {
  const double half = 0.5 * spec.sites;
  if (half - std::abs(m_target) <= tol) {
    GcFit f;
    f.beta = std::numeric_limits<double>::quiet_NaN();
    f.mu = std::numeric_limits<double>::quiet_NaN();
    f.entropy = 0.0;
    // The extremal sector holds a single state.
    const std::size_t k = m_target > 0 ? spec.sector_m.size() - 1 : 0;
    f.residual_e = spec.sector_energies[k](0) - e_target;
    f.residual_m = std::copysign(half, m_target) - m_target;
    f.converged = std::abs(f.residual_e) <= std::max(tol, 1e-6);
    f.method = FitMethod::extremal;
    return f;
  }

  const double x = std::clamp(m_target / half, -1.0 + 1e-12, 1.0 - 1e-12);
  Trial start = evaluate(spec, 0.0, 2.0 * std::atanh(x), e_target, m_target);
  int iters = 0;
  bool ok = false;
  Trial t = newton(spec, start, e_target, m_target, tol, iters, ok);
  if (ok) {
    GcFit f = finish(t, true, FitMethod::newton, iters);
    if (std::abs(e_target) <= tol && std::abs(m_target) <= tol && std::abs(f.beta) <= tol) f.beta = f.mu = 0.0;
    return f;
  }

  // Grid fallback in (beta, mu), refined around the best point.
  Trial best = t;
  int total = iters;
  double lo_b = -20.0, hi_b = 20.0, lo_m = -20.0, hi_m = 20.0;
  const int n = 41;
  for (int level = 0; level < 16; ++level) {
    const double hb = (hi_b - lo_b) / (n - 1);
    const double hm = (hi_m - lo_m) / (n - 1);
    double best_b = best.beta, best_mu = best.beta != 0.0 ? best.nu / best.beta : 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double b = lo_b + i * hb;
        const double m = lo_m + j * hm;
        Trial c = evaluate(spec, b, b * m, e_target, m_target);
        ++total;
        if (std::isfinite(c.norm()) && c.norm() < best.norm()) {
          best = c;
          best_b = b;
          best_mu = m;
        }
      }
    int polish = 0;
    bool pok = false;
    Trial p = newton(spec, best, e_target, m_target, tol, polish, pok);
    total += polish;
    if (p.norm() < best.norm()) best = p;
    if (pok) return finish(best, true, FitMethod::grid, total);
    lo_b = best_b - hb;
    hi_b = best_b + hb;
    lo_m = best_mu - hm;
    hi_m = best_mu + hm;
  }
  return finish(best, std::abs(best.re) <= tol && std::abs(best.rm) <= tol, FitMethod::grid, total);
}

double bath_entropy(const std::vector<GcFit>& bins) {
  double s = 0.0;
  for (const auto& f : bins) s += f.entropy;
  return s;
}

std::string fit_log_header() { return "t,cell,beta,mu,entropy,residual_e,residual_m,method,iterations"; }

std::string fit_log_line(double t, const std::string& cell, const GcFit& f) {
  return fmt_double(t) + "," + cell + "," + fmt_double(f.beta) + "," + fmt_double(f.mu) + "," + fmt_double(f.entropy) +
         "," + fmt_double(f.residual_e) + "," + fmt_double(f.residual_m) + "," + to_string(f.method) + "," +
         std::to_string(f.iterations);
}

}  // namespace pagecurve
