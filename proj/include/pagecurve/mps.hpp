#pragma once

#include "pagecurve/linalg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pagecurve {

struct TruncationReport {
  int bond_index = 0;
  double discarded_weight = 0.0;  // sum of dropped squared Schmidt values (relative)
  int new_bond_dim = 0;
};

/// Thrown when Schmidt data of a bond was invalidated and must be recomputed first.
class StaleSchmidtError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Finite matrix-product state in right-canonical form
///
///   |psi> = sum B_0^{s0} B_1^{s1} ... B_{L-1}^{s_{L-1}} |s0 s1 ...>
///
/// with the Schmidt vector of every bond stored alongside. Applying a gate on bond (i, i+1)
/// rebuilds B_i, B_{i+1} from Lambda_{i} B_i B_{i+1} without inverting Schmidt values, so
/// gates can be applied to any bond in any order.
///
/// Each bond index carries a U(1) label (the number of particles to its left). While the
/// state is a particle-number eigenstate and all gates conserve Sz, decompositions are
/// done block by block; otherwise all labels collapse to zero and a single dense block is
/// used.
class MpsState {
 public:
  MpsState() = default;

  /// Product state from normalized local kets. `local_charges` gives the particle number of
  /// each local basis state (defaults: {1,0} for D=2, {2,1,1,0} for D=4).
  static MpsState product(const std::vector<CVector>& kets, int chi_max = 150, double svd_cutoff = 1e-12,
                          std::vector<int> local_charges = {});

  /// Exact MPS of a dense state over `sites` sites of local dimension `d` (site 0 most
  /// significant). Singular values below 1e-14 of the largest are dropped.
  static MpsState from_dense(const CVector& psi, int sites, int d, int chi_max = 150, double svd_cutoff = 1e-12,
                             std::vector<int> local_charges = {});

  /// Appends product sites on the right (right boundary of this state must be trivial).
  void append_product(const std::vector<CVector>& kets);

  int size() const { return static_cast<int>(tensors_.size()); }
  int local_dim() const { return d_; }
  int chi_max() const { return chi_max_; }
  double svd_cutoff() const { return svd_cutoff_; }
  void set_chi_max(int chi) { chi_max_ = chi; }
  void set_svd_cutoff(double c) { svd_cutoff_ = c; }
  bool conserves_charge() const { return symmetric_; }
  const std::vector<int>& local_charges() const { return local_charge_; }

  /// D matrices of shape (left bond) x (right bond).
  const std::vector<CMatrix>& tensor(int site) const { return tensors_.at(site); }
  /// Schmidt values across bond b (between sites b and b+1), descending.
  const RVector& schmidt_values(int bond) const;
  bool schmidt_current(int bond) const { return fresh_.at(bond + 1) != 0; }
  /// Schmidt values on the left boundary of `site` (1 for site 0).
  const RVector& left_lambda(int site) const { return lambda_.at(site); }
  const std::vector<int>& bond_labels(int bond) const { return labels_.at(bond + 1); }
  int bond_dim(int bond) const { return static_cast<int>(lambda_.at(bond + 1).size()); }
  int max_bond_dim() const;

  /// Applies a D^2 x D^2 unitary on sites (bond, bond+1) and truncates that bond.
  TruncationReport apply_two_site_gate(int bond, const CMatrix& gate);
  void apply_one_site_gate(int site, const CMatrix& gate);

  /// Replaces a site tensor. Leaves neighbouring Schmidt data stale until canonicalize().
  void set_tensor(int site, std::vector<CMatrix> mats);
  /// Restores exact right-canonical form, unit norm and current Schmidt data everywhere.
  void canonicalize();

  double norm_squared() const;
  /// Dense amplitude vector; only for small states.
  CVector to_dense() const;

  void save(std::ostream& os, const std::string& metadata = {}) const;
  /// Reads a state written by save(); `metadata` receives the stored string.
  static MpsState load(std::istream& is, std::string* metadata = nullptr);

  friend bool operator==(const MpsState& a, const MpsState& b);

 private:
  int d_ = 2;
  int chi_max_ = 150;
  double svd_cutoff_ = 1e-12;
  bool symmetric_ = true;
  std::vector<int> local_charge_;
  std::vector<std::vector<CMatrix>> tensors_;  // [site][s]
  std::vector<RVector> lambda_;               // [bond + 1], lambda_[0] = lambda_[L] = {1}
  std::vector<std::vector<int>> labels_;      // [bond + 1]
  std::vector<char> fresh_;                   // [bond + 1]

  bool gate_conserves(const CMatrix& gate, int sites) const;
  void drop_symmetry();
};

MpsState product_state(const std::vector<CVector>& kets, int chi_max = 150, double svd_cutoff = 1e-12);
TruncationReport apply_two_site_gate(MpsState& s, int bond, const CMatrix& gate);

/// -sum s^2 ln s^2 over the Schmidt values of `cut` (nats). Values below 1e-16 are skipped.
double entanglement_entropy(const MpsState& s, int cut);
double expect_local(const MpsState& s, int site, const CMatrix& op);
double expect_bond(const MpsState& s, int bond, const CMatrix& op);
/// <op_i op_j> for all pairs of the given sites (sorted ascending on input).
RMatrix correlation_matrix(const MpsState& s, const std::vector<int>& sites, const CMatrix& op);
Complex inner_product(const MpsState& a, const MpsState& b);

}  // namespace pagecurve
