#pragma once

#include "pagecurve/lattice_model.hpp"

#include <string>
#include <vector>

namespace pagecurve {

enum class CellKind { system, bath_bin };

/// Exact spectrum of one cell Hamiltonian, blocked by magnetization.
struct CellSpectrum {
  CellKind kind = CellKind::system;
  int sites = 0;
  std::vector<double> sector_m;        // m = n_up - sites/2, ascending
  std::vector<RVector> sector_energies;

  int dimension() const;
  double min_energy() const;
  double max_energy() const;
};

/// System cell: NN with delta_sys plus NNN J'. Bath bin: `bin_size` sites (0 = L_S), NN with
/// delta_bath, open ends. Cells larger than 16 sites are rejected.
CellSpectrum cell_spectrum(const ModelParams& p, CellKind kind, int bin_size = 0);

/// Grand-canonical averages for weights exp(-beta (e - mu m)).
struct GcMoments {
  double energy = 0.0;
  double magnetization = 0.0;
  double log_z = 0.0;
  double var_e = 0.0;
  double cov_em = 0.0;
  double var_m = 0.0;
};

/// Same averages in the natural parameters (beta, nu = beta mu): weights exp(-beta e + nu m).
GcMoments gc_moments_natural(const CellSpectrum& spec, double beta, double nu);
GcMoments gc_expectations(const CellSpectrum& spec, double beta, double mu);
/// S = ln Z + beta E - beta mu M.
double gc_entropy(const CellSpectrum& spec, double beta, double mu);

enum class FitMethod { newton, grid, extremal };
std::string to_string(FitMethod m);

struct GcFit {
  double beta = 0.0;
  double mu = 0.0;
  double entropy = 0.0;
  double residual_e = 0.0;
  double residual_m = 0.0;
  bool converged = false;
  FitMethod method = FitMethod::newton;
  int iterations = 0;
};

/// Solves E(beta, mu) = e_target, M(beta, mu) = m_target. Newton-Raphson with step halving,
/// grid search on [-20, 20]^2 with successive refinement as fallback. Filled or empty cells
/// (|m_target| within `tol` of sites/2) give S = 0 with method "extremal"; (0, 0) gives
/// beta = mu = 0.
GcFit fit_gc(const CellSpectrum& spec, double e_target, double m_target, double tol = 1e-8);

double bath_entropy(const std::vector<GcFit>& bins);

/// One audit line: t,cell,beta,mu,entropy,residual_e,residual_m,method,iterations.
std::string fit_log_line(double t, const std::string& cell, const GcFit& fit);
std::string fit_log_header();

}  // namespace pagecurve
