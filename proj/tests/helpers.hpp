#pragma once

#include "pagecurve/ed_oracle.hpp"
#include "pagecurve/lattice_model.hpp"
#include "pagecurve/mps.hpp"

#include <vector>

namespace testing_support {

using namespace pagecurve;

inline ModelParams model(int ls, int lb, double delta, double jp = 0.0, double delta_bath = -1.0) {
  ModelParams p;
  p.L_S = ls;
  p.L_B = lb;
  p.delta_sys = delta;
  p.delta_bath = delta_bath < 0.0 ? delta : delta_bath;
  p.j_prime = jp;
  return p;
}

inline CMatrix summed_bonds(const std::vector<BondOperator>& bonds, int spins) {
  const Eigen::Index dim = Eigen::Index(1) << spins;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (const auto& b : bonds) h += embed_bond_dense(b, spins);
  return h;
}

/// Total Sz on a D^2-dimensional two-site space (D = 2 chain, D = 4 ladder).
inline CMatrix two_site_sz(int d) {
  const int spins = d == 2 ? 2 : 4;
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (int k = 0; k < spins; ++k) {
    CMatrix m = CMatrix::Identity(1, 1);
    for (int j = 0; j < spins; ++j) m = kron(m, j == k ? spin::sz() : spin::id2());
    out += m;
  }
  return out;
}

inline std::vector<bool> filled_pattern(const ModelParams& p) {
  std::vector<bool> up(p.total_sites(), false);
  for (int i = 0; i < p.L_S; ++i) up[i] = true;
  return up;
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
