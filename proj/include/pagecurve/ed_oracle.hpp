#pragma once

#include "pagecurve/lattice_model.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace pagecurve::ed {

// Dense reference for small chains. Basis index x = sum_i s_i 2^(L-1-i) with s_i = 0 for up,
// the same ordering as MpsState::to_dense().

inline bool is_up(std::uint64_t x, int L, int site) { return ((x >> (L - 1 - site)) & 1u) == 0; }

/// Basis states with a fixed number of up spins, ascending.
struct SectorBasis {
  int L = 0;
  int n_up = 0;
  std::vector<std::uint64_t> states;
  std::unordered_map<std::uint64_t, int> index;
};
SectorBasis make_sector(int L, int n_up);

/// Matrix of sum jxy (SxSx + SySy) + jz SzSz over the given couplings, restricted to `states`
/// (which must be closed under the couplings, e.g. one Sz sector or the full space).
RMatrix couplings_hamiltonian(int L, const std::vector<Coupling>& couplings, const std::vector<std::uint64_t>& states);

/// Full Hamiltonian H_sys + H_sys-bath + H_bath on 2^L states (L <= 14).
RMatrix dense_hamiltonian(const ModelParams& p);
/// The same Hamiltonian restricted to one Sz sector.
RMatrix sector_hamiltonian(const ModelParams& p, const SectorBasis& basis);

/// Exact propagation through a full eigendecomposition of H.
class DenseEvolver {
 public:
  explicit DenseEvolver(const RMatrix& h);
  CVector evolve(const CVector& psi0, double t) const;
  const RVector& energies() const { return energies_; }

 private:
  RVector energies_;
  RMatrix vectors_;
};

CVector exact_evolve(const CVector& psi0, const RMatrix& h, double t);

/// Von Neumann entropy (nats) between the first `left_sites` spins and the rest.
double bipartite_entropy(const CVector& psi, int L, int left_sites);

/// Amplitude vector of a product of spins (true = up).
CVector product_vector(const std::vector<bool>& up);

/// Weights of psi0 on the distinct energy levels (degenerate eigenvectors merged, so the
/// participation ratio does not depend on the eigenbasis chosen inside a level).
struct OverlapHistogram {
  RVector energies;  // ascending, distinct
  RVector overlaps;  // |P_i psi0|^2
  double max_overlap = 0.0;
  double participation_ratio = 0.0;  // 1 / sum overlaps^2
};

OverlapHistogram overlap_histogram(const CVector& psi0, const RMatrix& h);
/// Arithmetic used for the Householder reduction in overlap_histogram_sectors. The QL sweep
/// is always done in double; single precision resolves levels to about 1e-5 and runs roughly
/// twice as fast.
enum class Precision { double_precision, single };

/// Sector-blocked variant for L up to ~16: psi0 is a full 2^L vector; each Sz sector carrying
/// weight is tridiagonalized and the state is rotated into the tridiagonal basis.
OverlapHistogram overlap_histogram_sectors(const ModelParams& p, const CVector& psi0,
                                           Precision precision = Precision::double_precision);

/// System in a random superposition of half-filled product states (complex Gaussian
/// coefficients, each part of variance 1/2), bath all down. Full 2^L vector.
CVector random_coefficient_state(const ModelParams& p, std::uint64_t seed);

/// Applies a gate acting on `span` consecutive spins starting at `first` (test support).
CVector apply_gate(const CVector& psi, int L, int first, int span, const CMatrix& gate);

/// Dense counterparts of every field measured on an MPS (bin_size 0 selects L_S).
struct DenseRecord {
  double s_vn = 0.0;
  double n_bath_mean = 0.0;
  double n_bath_var = 0.0;
  double n_sys_mean = 0.0;
  double n_sys_var = 0.0;
  std::vector<double> density;
  double e_sys = 0.0;
  double m_sys = 0.0;
  std::vector<double> e_bins;
  std::vector<double> m_bins;
  double e_total = 0.0;
};
DenseRecord dense_measure(const CVector& psi, const ModelParams& p, int bin_size);

/// Dense reduced density matrix of spins [first, first + count).
CMatrix reduced_density_matrix(const CVector& psi, int L, int first, int count);

}  // namespace pagecurve::ed
