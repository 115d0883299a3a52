#include "pagecurve/lattice_model.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace pagecurve {

void ModelParams::validate(int bin_size, bool dynamics) const {
  if (L_S < 1 || L_B < 1) throw std::invalid_argument("L_S and L_B must be positive");
  if (dynamics && L_B < L_S) throw std::invalid_argument("L_B must be >= L_S");
  if (j_prime != 0.0 && (L_S % 2 != 0 || L_B % 2 != 0))
    throw std::invalid_argument("j_prime != 0 needs even L_S and L_B (ladder pairing)");
  if (bin_size > 0 && L_B % bin_size != 0)
    throw std::invalid_argument("L_B must be a multiple of the bin size " + std::to_string(bin_size));
}

std::vector<Coupling> full_couplings(const ModelParams& p) {
  std::vector<Coupling> out;
  const int L = p.total_sites();
  for (int i = 0; i + 1 < L; ++i) {
    const bool internal = i + 1 < p.L_S;
    out.push_back({i, i + 1, ModelParams::J, ModelParams::J * (internal ? p.delta_sys : p.delta_bath)});
  }
  if (p.j_prime != 0.0)
    for (int i = 0; i + 2 < p.L_S; ++i) out.push_back({i, i + 2, 0.0, p.j_prime});
  return out;
}

std::vector<Coupling> system_cell_couplings(const ModelParams& p) {
  std::vector<Coupling> out;
  for (int i = 0; i + 1 < p.L_S; ++i) out.push_back({i, i + 1, ModelParams::J, ModelParams::J * p.delta_sys});
  if (p.j_prime != 0.0)
    for (int i = 0; i + 2 < p.L_S; ++i) out.push_back({i, i + 2, 0.0, p.j_prime});
  return out;
}

std::vector<Coupling> bin_cell_couplings(const ModelParams& p, int size) {
  std::vector<Coupling> out;
  for (int i = 0; i + 1 < size; ++i) out.push_back({i, i + 1, ModelParams::J, ModelParams::J * p.delta_bath});
  return out;
}

CMatrix xxz_pair(double jxy, double jz) {
  using namespace spin;
  return jxy * (kron(sx(), sx()) + kron(sy(), sy())) + jz * kron(sz(), sz());
}

Geometry::Geometry(const ModelParams& p, Encoding enc) : enc_(enc), L_S_(p.L_S), L_B_(p.L_B) {
  if (enc == Encoding::ladder && (L_S_ % 2 != 0 || L_B_ % 2 != 0))
    throw std::invalid_argument("ladder encoding needs even L_S and L_B");
}

CMatrix Geometry::lift(int phys, const CMatrix& op) const {
  if (enc_ == Encoding::chain) return op;
  return slot(phys) == 0 ? kron(op, spin::id2()) : kron(spin::id2(), op);
}

CMatrix Geometry::lift_pair_same_site(int phys_a, const CMatrix& op_a, int phys_b, const CMatrix& op_b) const {
  if (enc_ == Encoding::chain || mps_site(phys_a) != mps_site(phys_b))
    throw std::invalid_argument("lift_pair_same_site: spins are not on one MPS site");
  if (phys_a == phys_b) return lift(phys_a, op_a * op_b);
  return slot(phys_a) == 0 ? kron(op_a, op_b) : kron(op_b, op_a);
}

std::vector<int> Geometry::local_charges() const {
  if (enc_ == Encoding::chain) return {1, 0};
  return {2, 1, 1, 0};
}

std::vector<BondOperator> build_chain_bonds(const ModelParams& p) {
  if (p.j_prime != 0.0) throw std::invalid_argument("build_chain_bonds: j_prime must be 0");
  std::vector<BondOperator> bonds;
  for (const auto& c : full_couplings(p)) bonds.push_back({c.i, xxz_pair(c.jxy, c.jz), 2});
  return bonds;
}

namespace {

// Embeds a coupling between spins a, b (positions among `n` spins) into 2^n dims.
CMatrix embed_coupling(int n, int a, int b, double jxy, double jz) {
  using namespace spin;
  auto string_of = [&](const CMatrix& oa, const CMatrix& ob) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) out = kron(out, k == a ? oa : (k == b ? ob : id2()));
    return out;
  };
  return jxy * (string_of(sx(), sx()) + string_of(sy(), sy())) + jz * string_of(sz(), sz());
}

}  // namespace

std::vector<BondOperator> build_ladder_bonds(const ModelParams& p) {
  if (p.L_S % 2 != 0 || p.L_B % 2 != 0)
    throw std::invalid_argument("build_ladder_bonds: L_S and L_B must be even");
  const int rungs = p.total_sites() / 2;
  if (rungs < 2) throw std::invalid_argument("build_ladder_bonds: need at least two rungs");
  std::vector<BondOperator> bonds;
  for (int r = 0; r + 1 < rungs; ++r) bonds.push_back({r, CMatrix::Zero(16, 16), 4});

  for (const auto& c : full_couplings(p)) {
    const int ra = c.i / 2;
    const int rb = c.j / 2;
    int bond = ra;
    if (ra == rb && ra == rungs - 1) bond = ra - 1;
    const int base = 2 * bond;  // first spin of the bond's 4-spin window
    bonds[bond].matrix += embed_coupling(4, c.i - base, c.j - base, c.jxy, c.jz);
  }
  return bonds;
}

std::vector<BondOperator> build_bonds(const ModelParams& p) {
  return p.uses_ladder() ? build_ladder_bonds(p) : build_chain_bonds(p);
}

std::vector<BondOperator> build_bonds(const ModelParams& p, Encoding enc) {
  return enc == Encoding::ladder ? build_ladder_bonds(p) : build_chain_bonds(p);
}

CMatrix embed_bond_dense(const BondOperator& b, int physical_sites) {
  if (physical_sites < 2 || physical_sites > 12)
    throw std::invalid_argument("embed_bond_dense: supports 2..12 spins");
  const int spins_per_site = b.local_dim == 2 ? 1 : 2;
  const int left_spins = b.bond_index * spins_per_site;
  const int right_spins = physical_sites - left_spins - 2 * spins_per_site;
  if (right_spins < 0) throw std::invalid_argument("embed_bond_dense: bond outside the chain");
  const Eigen::Index dl = Eigen::Index(1) << left_spins;
  const Eigen::Index dr = Eigen::Index(1) << right_spins;
  return kron(kron(CMatrix::Identity(dl, dl), b.matrix), CMatrix::Identity(dr, dr));
}

LocalTerms localize(const Geometry& g, const std::vector<Coupling>& couplings) {
  using namespace spin;
  std::map<int, CMatrix> one;
  std::map<int, CMatrix> two;
  const int d = g.local_dim();
  for (const auto& c : couplings) {
    const int sa = g.mps_site(c.i);
    const int sb = g.mps_site(c.j);
    if (sa == sb) {
      CMatrix term = c.jxy * (g.lift_pair_same_site(c.i, sx(), c.j, sx()) + g.lift_pair_same_site(c.i, sy(), c.j, sy())) +
                     c.jz * g.lift_pair_same_site(c.i, sz(), c.j, sz());
      auto [it, fresh] = one.try_emplace(sa, CMatrix::Zero(d, d));
      it->second += term;
    } else if (sb == sa + 1) {
      CMatrix term = c.jxy * (kron(g.lift(c.i, sx()), g.lift(c.j, sx())) + kron(g.lift(c.i, sy()), g.lift(c.j, sy()))) +
                     c.jz * kron(g.lift(c.i, sz()), g.lift(c.j, sz()));
      auto [it, fresh] = two.try_emplace(sa, CMatrix::Zero(d * d, d * d));
      it->second += term;
    } else {
      throw std::invalid_argument("localize: coupling spans more than two MPS sites");
    }
  }
  LocalTerms out;
  for (auto& [k, m] : one) out.one_site.emplace_back(k, std::move(m));
  for (auto& [k, m] : two) out.two_site.emplace_back(k, std::move(m));
  return out;
}

}  // namespace pagecurve
