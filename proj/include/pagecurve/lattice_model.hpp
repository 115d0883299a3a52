#pragma once

#include "pagecurve/linalg.hpp"

#include <vector>

namespace pagecurve {

/// Parameters of the system + bath XXZ chain. J is the unit of energy and is fixed to 1.
struct ModelParams {
  double delta_sys = 1.0;   // z-anisotropy of system-internal bonds
  double delta_bath = 1.0;  // z-anisotropy of bath bonds and of the system-bath bond
  double j_prime = 0.0;     // NNN Sz-Sz coupling inside the system
  int L_S = 10;
  int L_B = 200;

  static constexpr double J = 1.0;

  int total_sites() const { return L_S + L_B; }
  bool uses_ladder() const { return j_prime != 0.0; }

  /// Throws std::invalid_argument on a broken invariant. `bin_size` > 0 also checks the
  /// bath can be cut into bins of that size.
  /// `dynamics` adds the L_B >= L_S requirement of time-evolution runs.
  void validate(int bin_size = 0, bool dynamics = true) const;
};

/// One two-spin coupling jxy (SxSx + SySy) + jz SzSz between physical sites i < j (0-based,
/// system sites 0..L_S-1 from the far edge, bath sites L_S..L_S+L_B-1).
struct Coupling {
  int i = 0;
  int j = 0;
  double jxy = 0.0;
  double jz = 0.0;
};

/// Every term of the full Hamiltonian, system + system-bath + bath.
std::vector<Coupling> full_couplings(const ModelParams& p);
/// Terms of H_sys in cell-local indices 0..L_S-1 (NN with delta_sys plus NNN J').
std::vector<Coupling> system_cell_couplings(const ModelParams& p);
/// Terms of an isolated bath bin of `size` sites (NN only, delta_bath, open ends).
std::vector<Coupling> bin_cell_couplings(const ModelParams& p, int size);

/// 4x4 matrix of jxy (SxSx + SySy) + jz SzSz on two spins.
CMatrix xxz_pair(double jxy, double jz);

struct BondOperator {
  int bond_index = 0;  // bond between MPS sites bond_index and bond_index + 1
  CMatrix matrix;      // D^2 x D^2, Hermitian
  int local_dim = 2;
};

enum class Encoding { chain, ladder };

/// Maps physical spins onto MPS sites. In the ladder encoding physical sites (2r, 2r+1) share
/// MPS site r with local index 2*s_up + s_down, so both encodings use the same dense ordering.
class Geometry {
 public:
  Geometry(const ModelParams& p, Encoding enc);
  static Geometry for_model(const ModelParams& p) {
    return Geometry(p, p.uses_ladder() ? Encoding::ladder : Encoding::chain);
  }

  Encoding encoding() const { return enc_; }
  int local_dim() const { return enc_ == Encoding::chain ? 2 : 4; }
  int physical_sites() const { return L_S_ + L_B_; }
  int mps_sites() const { return enc_ == Encoding::chain ? physical_sites() : physical_sites() / 2; }
  int system_sites() const { return L_S_; }
  int bath_sites() const { return L_B_; }
  /// MPS bond separating system from bath.
  int cut_bond() const { return enc_ == Encoding::chain ? L_S_ - 1 : L_S_ / 2 - 1; }

  int mps_site(int phys) const { return enc_ == Encoding::chain ? phys : phys / 2; }
  int slot(int phys) const { return enc_ == Encoding::chain ? 0 : phys % 2; }
  /// Single-spin operator lifted to the local space of its MPS site.
  CMatrix lift(int phys, const CMatrix& op) const;
  /// Product op_a(phys_a) op_b(phys_b) for two spins on the same MPS site.
  CMatrix lift_pair_same_site(int phys_a, const CMatrix& op_a, int phys_b, const CMatrix& op_b) const;
  /// Particle number of each local basis state.
  std::vector<int> local_charges() const;

 private:
  Encoding enc_;
  int L_S_;
  int L_B_;
};

/// Nearest-neighbour chain decomposition (D = 2). Requires j_prime == 0.
std::vector<BondOperator> build_chain_bonds(const ModelParams& p);
/// Ladder decomposition (D = 4). Intra-rung terms sit on the bond to the right of the rung,
/// the last rung's on the last bond. Requires even L_S and L_B; J' = 0 is accepted.
std::vector<BondOperator> build_ladder_bonds(const ModelParams& p);
/// Picks the chain or the ladder builder from j_prime.
std::vector<BondOperator> build_bonds(const ModelParams& p);
std::vector<BondOperator> build_bonds(const ModelParams& p, Encoding enc);

/// I (x) ... (x) b.matrix (x) ... (x) I over `physical_sites` spins (test support, <= 12 spins).
CMatrix embed_bond_dense(const BondOperator& b, int physical_sites);

/// Operator sum of one cell's couplings expressed as MPS-local pieces: one-site terms keyed
/// by MPS site and two-site terms keyed by bond. Used to measure cell energies.
struct LocalTerms {
  std::vector<std::pair<int, CMatrix>> one_site;
  std::vector<std::pair<int, CMatrix>> two_site;
};
LocalTerms localize(const Geometry& g, const std::vector<Coupling>& couplings);

}  // namespace pagecurve
