#pragma once

#include "pagecurve/lattice_model.hpp"
#include "pagecurve/mps.hpp"

#include <vector>

namespace pagecurve {

struct TimeSeriesRecord {
  double t = 0.0;
  double s_vn = 0.0;
  double n_bath_mean = 0.0;
  double n_bath_var = 0.0;  // NaN when not measured at this tick
  double n_sys_mean = 0.0;
  double n_sys_var = 0.0;
  std::vector<double> density;  // per physical site, <Sz + 1/2>
  double e_sys = 0.0;
  double m_sys = 0.0;
  std::vector<double> e_bins;
  std::vector<double> m_bins;
  double s_b_sys = 0.0;   // filled in by the Boltzmann stage
  double s_b_bath = 0.0;
  double discarded_weight_cum = 0.0;
  int chi_used = 0;

  double total_sz() const;
};

struct MeasureOptions {
  bool variance = true;
  bool cells = true;  // cell energies and magnetizations
};

/// Cell partition of the chain: the system is one cell, the bath is cut into contiguous bins.
/// bin_size = 0 selects L_S. Throws std::invalid_argument when the bath does not divide.
struct CellLayout {
  int bin_size = 0;
  int bins = 0;
  LocalTerms system;
  std::vector<LocalTerms> bath;

  CellLayout(const ModelParams& p, const Geometry& g, int bin_size = 0);
};

/// Mean and variance of sum_i n_i over physical spins [first, last] (whole MPS sites only).
std::pair<double, double> number_moments(const MpsState& s, const Geometry& g, int first, int last);

double local_terms_energy(const MpsState& s, const LocalTerms& terms);

TimeSeriesRecord measure(const MpsState& s, const ModelParams& p, const Geometry& g, const CellLayout& cells,
                         const MeasureOptions& opts = {});

}  // namespace pagecurve
