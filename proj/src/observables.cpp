#include "pagecurve/observables.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pagecurve {

namespace {

std::vector<Coupling> shifted(std::vector<Coupling> cs, int offset) {
  for (auto& c : cs) {
    c.i += offset;
    c.j += offset;
  }
  return cs;
}

}  // namespace

double TimeSeriesRecord::total_sz() const {
  double m = 0.0;
  for (double n : density) m += n - 0.5;
  return m;
}

CellLayout::CellLayout(const ModelParams& p, const Geometry& g, int size) {
  bin_size = size > 0 ? size : p.L_S;
  if (p.L_B % bin_size != 0) throw std::invalid_argument("bath length is not a multiple of the bin size");
  if (g.encoding() == Encoding::ladder && bin_size % 2 != 0)
    throw std::invalid_argument("ladder encoding needs an even bin size");
  bins = p.L_B / bin_size;
  system = localize(g, system_cell_couplings(p));
  const auto bin_terms = bin_cell_couplings(p, bin_size);
  for (int k = 0; k < bins; ++k) bath.push_back(localize(g, shifted(bin_terms, p.L_S + k * bin_size)));
}

std::pair<double, double> number_moments(const MpsState& s, const Geometry& g, int first, int last) {
  const int a = g.mps_site(first);
  const int b = g.mps_site(last);
  if (g.encoding() == Encoding::ladder && (g.slot(first) != 0 || g.slot(last) != 1))
    throw std::invalid_argument("number_moments: range must cover whole MPS sites");
  const int d = s.local_dim();
  const auto& q = s.local_charges();
  const RVector& lam = s.left_lambda(a);
  CMatrix e0 = lam.cwiseAbs2().asDiagonal();
  CMatrix e1 = CMatrix::Zero(e0.rows(), e0.cols());
  CMatrix e2 = e1;
  for (int site = a; site <= b; ++site) {
    const auto& t = s.tensor(site);
    const Eigen::Index chi = t[0].cols();
    CMatrix n0 = CMatrix::Zero(chi, chi), n1 = n0, n2 = n0;
    for (int k = 0; k < d; ++k) {
      const double n = q[k];
      CMatrix t0 = t[k].adjoint() * e0 * t[k];
      CMatrix t1 = t[k].adjoint() * e1 * t[k];
      n2 += t[k].adjoint() * e2 * t[k] + 2.0 * n * t1 + n * n * t0;
      n1 += t1 + n * t0;
      n0 += t0;
    }
    e0 = std::move(n0);
    e1 = std::move(n1);
    e2 = std::move(n2);
  }
  const double mean = e1.trace().real();
  const double second = e2.trace().real();
  return {mean, std::max(0.0, second - mean * mean)};
}

double local_terms_energy(const MpsState& s, const LocalTerms& terms) {
  double e = 0.0;
  for (const auto& [site, op] : terms.one_site) e += expect_local(s, site, op);
  for (const auto& [bond, op] : terms.two_site) e += expect_bond(s, bond, op);
  return e;
}

TimeSeriesRecord measure(const MpsState& s, const ModelParams& p, const Geometry& g, const CellLayout& cells,
                         const MeasureOptions& opts) {
  if (s.size() != g.mps_sites() || s.local_dim() != g.local_dim())
    throw std::invalid_argument("measure: state does not match the geometry");
  TimeSeriesRecord r;
  r.s_vn = entanglement_entropy(s, g.cut_bond());
  r.chi_used = s.max_bond_dim();
  const int L = g.physical_sites();
  r.density.resize(L);
  const CMatrix n = spin::number();
  for (int i = 0; i < L; ++i) r.density[i] = expect_local(s, g.mps_site(i), g.lift(i, n));
  for (int i = 0; i < L; ++i) {
    if (!std::isfinite(r.density[i])) throw NumericalError("measure: non-finite density");
    (i < p.L_S ? r.n_sys_mean : r.n_bath_mean) += r.density[i];
  }
  if (opts.variance) {
    r.n_sys_var = number_moments(s, g, 0, p.L_S - 1).second;
    r.n_bath_var = number_moments(s, g, p.L_S, L - 1).second;
  } else {
    r.n_sys_var = r.n_bath_var = std::numeric_limits<double>::quiet_NaN();
  }
  r.m_sys = r.n_sys_mean - 0.5 * p.L_S;
  if (opts.cells) {
    r.e_sys = local_terms_energy(s, cells.system);
    for (int k = 0; k < cells.bins; ++k) {
      r.e_bins.push_back(local_terms_energy(s, cells.bath[k]));
      double m = 0.0;
      for (int i = p.L_S + k * cells.bin_size; i < p.L_S + (k + 1) * cells.bin_size; ++i) m += r.density[i] - 0.5;
      r.m_bins.push_back(m);
    }
  }
  return r;
}

}  // namespace pagecurve
