#include "pagecurve/state_prep.hpp"

#include "pagecurve/ed_oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pagecurve {

InitialKind parse_initial_kind(const std::string& name) {
  if (name == "filled") return InitialKind::filled;
  if (name == "high_entropy") return InitialKind::high_entropy;
  throw std::invalid_argument("unknown initial state kind '" + name + "'");
}

std::string to_string(InitialKind kind) { return kind == InitialKind::filled ? "filled" : "high_entropy"; }

CMatrix haar_unitary(std::mt19937_64& rng, int dim) {
  if (dim < 2) throw std::invalid_argument("haar_unitary: dim must be >= 2");
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CMatrix z(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(r, c) = Complex(re, im);
    }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    q.col(k) *= (std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0));
  }
  return q;
}

CVector high_entropy_system_vector(int L_S, int depth, std::uint64_t seed) {
  if (depth < 1) throw std::invalid_argument("high_entropy: circuit depth must be >= 1");
  if (L_S < 2 || L_S > 20) throw std::invalid_argument("high_entropy: L_S out of range for dense preparation");
  std::vector<bool> up(L_S);
  for (int i = 0; i < L_S; ++i) up[i] = (i % 2 == 0);
  CVector psi = ed::product_vector(up);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < depth; ++k)
    for (int b = k % 2; b + 1 < L_S; b += 2) psi = ed::apply_gate(psi, L_S, b, 2, haar_unitary(rng, 4));
  return psi / psi.norm();
}

MpsState prepare(const InitialStateSpec& spec, const ModelParams& p, int chi_max, double svd_cutoff,
                 std::vector<std::string>* warnings) {
  p.validate();
  const Geometry g = Geometry::for_model(p);
  const int d = g.local_dim();
  CVector empty = CVector::Zero(d);
  empty(d - 1) = 1.0;  // all down
  const int bath_mps = g.mps_sites() - g.mps_site(p.L_S);
  std::vector<CVector> bath(bath_mps, empty);

  if (spec.kind == InitialKind::filled) {
    CVector full = CVector::Zero(d);
    full(0) = 1.0;
    std::vector<CVector> kets(g.mps_site(p.L_S - 1) + 1, full);
    kets.insert(kets.end(), bath.begin(), bath.end());
    return MpsState::product(kets, chi_max, svd_cutoff, g.local_charges());
  }

  const int depth = spec.circuit_depth > 0 ? spec.circuit_depth : p.L_S;
  const CVector sys = high_entropy_system_vector(p.L_S, depth, spec.seed);
  const int sys_mps = g.mps_site(p.L_S - 1) + 1;
  MpsState s = MpsState::from_dense(sys, sys_mps, d, chi_max, svd_cutoff, g.local_charges());
  s.append_product(bath);

  if (warnings) {
    double n_sys = 0.0;
    for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(sys.size()); ++x) {
      int ups = 0;
      for (int i = 0; i < p.L_S; ++i) ups += ed::is_up(x, p.L_S, i) ? 1 : 0;
      n_sys += std::norm(sys(static_cast<Eigen::Index>(x))) * ups;
    }
    if (std::abs(n_sys - 0.5 * p.L_S) > 0.15 * p.L_S) {
      std::ostringstream os;
      os << "seed " << spec.seed << ": system filling " << n_sys << " deviates from half filling";
      warnings->push_back(os.str());
    }
  }
  return s;
}

}  // namespace pagecurve
