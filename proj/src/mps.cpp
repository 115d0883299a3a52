#include "pagecurve/mps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace pagecurve {

namespace {

std::vector<int> default_charges(int d) {
  if (d == 2) return {1, 0};
  if (d == 4) return {2, 1, 1, 0};
  return std::vector<int>(d, 0);
}

// Charge of a ket if it is an eigenstate of the local number operator.
std::optional<int> ket_charge(const CVector& ket, const std::vector<int>& q) {
  std::optional<int> found;
  for (Eigen::Index s = 0; s < ket.size(); ++s) {
    if (std::abs(ket(s)) < 1e-14) continue;
    if (found && *found != q[s]) return std::nullopt;
    found = q[s];
  }
  return found;
}

std::map<int, std::vector<int>> group_by_label(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) out[labels[i]].push_back(i);
  return out;
}

struct Triple {
  double value;
  int block;
  int index;
};

// Descending by value; ties keep block order then index order.
void sort_triples(std::vector<Triple>& t) {
  std::stable_sort(t.begin(), t.end(), [](const Triple& a, const Triple& b) { return a.value > b.value; });
}

// Block-wise SVD of a matrix whose nonzero entries only connect equal row/col labels.
struct LabeledSvd {
  RVector s;
  CMatrix u;  // rows x k
  CMatrix v;  // cols x k
  std::vector<int> labels;
};

LabeledSvd labeled_svd(const CMatrix& m, const std::vector<int>& row_labels, const std::vector<int>& col_labels,
                       double rel_drop) {
  auto rows = group_by_label(row_labels);
  auto cols = group_by_label(col_labels);
  struct Block {
    int label;
    const std::vector<int>* r;
    const std::vector<int>* c;
    RVector s;
    CMatrix u, v;
  };
  std::vector<Block> blocks;
  std::vector<Triple> triples;
  for (auto& [q, ri] : rows) {
    auto it = cols.find(q);
    if (it == cols.end()) continue;
    const auto& ci = it->second;
    CMatrix sub(ri.size(), ci.size());
    for (size_t a = 0; a < ri.size(); ++a)
      for (size_t b = 0; b < ci.size(); ++b) sub(a, b) = m(ri[a], ci[b]);
    Eigen::BDCSVD<CMatrix> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Block blk{q, &ri, &ci, svd.singularValues(), svd.matrixU(), svd.matrixV()};
    for (int k = 0; k < blk.s.size(); ++k) triples.push_back({blk.s(k), static_cast<int>(blocks.size()), k});
    blocks.push_back(std::move(blk));
  }
  sort_triples(triples);
  const double smax = triples.empty() ? 0.0 : triples.front().value;
  std::size_t keep = 0;
  while (keep < triples.size() && triples[keep].value > rel_drop * smax) ++keep;
  if (keep == 0 && !triples.empty()) keep = 1;
  LabeledSvd out;
  out.s.resize(keep);
  out.u = CMatrix::Zero(m.rows(), keep);
  out.v = CMatrix::Zero(m.cols(), keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const auto& t = triples[j];
    const auto& blk = blocks[t.block];
    out.s(j) = t.value;
    for (size_t a = 0; a < blk.r->size(); ++a) out.u((*blk.r)[a], j) = blk.u(a, t.index);
    for (size_t b = 0; b < blk.c->size(); ++b) out.v((*blk.c)[b], j) = blk.v(b, t.index);
    out.labels.push_back(blk.label);
  }
  return out;
}

void check_finite(const CMatrix& m, const char* where) {
  if (!m.allFinite()) throw NumericalError(std::string(where) + ": non-finite tensor entries");
}

}  // namespace

MpsState MpsState::product(const std::vector<CVector>& kets, int chi_max, double svd_cutoff,
                           std::vector<int> local_charges) {
  if (kets.empty()) throw std::invalid_argument("product state needs at least one site");
  MpsState s;
  s.d_ = static_cast<int>(kets.front().size());
  s.chi_max_ = chi_max;
  s.svd_cutoff_ = svd_cutoff;
  s.local_charge_ = local_charges.empty() ? default_charges(s.d_) : std::move(local_charges);
  s.symmetric_ = true;
  s.lambda_.assign(kets.size() + 1, RVector::Ones(1));
  s.labels_.assign(kets.size() + 1, {0});
  s.fresh_.assign(kets.size() + 1, 1);
  int running = 0;
  for (std::size_t i = 0; i < kets.size(); ++i) {
    const auto& ket = kets[i];
    if (ket.size() != s.d_) throw std::invalid_argument("product state: kets of unequal dimension");
    if (std::abs(ket.norm() - 1.0) > 1e-12) throw std::invalid_argument("product state: unnormalized ket");
    std::vector<CMatrix> site(s.d_, CMatrix(1, 1));
    for (int k = 0; k < s.d_; ++k) site[k](0, 0) = ket(k);
    s.tensors_.push_back(std::move(site));
    auto q = ket_charge(ket, s.local_charge_);
    if (!q) s.symmetric_ = false;
    running += q.value_or(0);
    s.labels_[i + 1] = {running};
  }
  if (!s.symmetric_) s.drop_symmetry();
  return s;
}

MpsState MpsState::from_dense(const CVector& psi, int sites, int d, int chi_max, double svd_cutoff,
                              std::vector<int> local_charges) {
  Eigen::Index total = 1;
  for (int i = 0; i < sites; ++i) total *= d;
  if (psi.size() != total) throw std::invalid_argument("from_dense: vector size does not match d^sites");
  const double nrm = psi.norm();
  if (nrm == 0.0) throw std::invalid_argument("from_dense: zero vector");

  MpsState s;
  s.d_ = d;
  s.chi_max_ = chi_max;
  s.svd_cutoff_ = svd_cutoff;
  s.local_charge_ = local_charges.empty() ? default_charges(d) : std::move(local_charges);
  s.symmetric_ = false;
  s.tensors_.resize(sites);
  s.lambda_.assign(sites + 1, RVector::Ones(1));
  s.labels_.assign(sites + 1, {0});
  s.fresh_.assign(sites + 1, 1);

  // cur(prefix, s * chi_r + c)
  Eigen::Index chi_r = 1;
  CMatrix cur(total / d, d);
  for (Eigen::Index idx = 0; idx < total; ++idx) cur(idx / d, idx % d) = psi(idx) / nrm;
  for (int i = sites - 1; i >= 1; --i) {
    std::vector<int> rl(cur.rows(), 0), cl(cur.cols(), 0);
    auto svd = labeled_svd(cur, rl, cl, 1e-14);
    const auto k = svd.s.size();
    if (k > chi_max) throw std::invalid_argument("from_dense: exact bond dimension exceeds chi_max");
    std::vector<CMatrix> site(d, CMatrix(k, chi_r));
    for (int sd = 0; sd < d; ++sd)
      for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index c = 0; c < chi_r; ++c) site[sd](j, c) = std::conj(svd.v(sd * chi_r + c, j));
    s.tensors_[i] = std::move(site);
    s.lambda_[i] = svd.s / svd.s.norm();
    s.labels_[i].assign(k, 0);
    CMatrix us = svd.u * svd.s.asDiagonal();
    CMatrix next(cur.rows() / d, d * k);
    for (Eigen::Index p = 0; p < us.rows(); ++p)
      for (Eigen::Index j = 0; j < k; ++j) next(p / d, (p % d) * k + j) = us(p, j);
    cur = std::move(next);
    chi_r = k;
  }
  std::vector<CMatrix> first(d, CMatrix(1, chi_r));
  for (int sd = 0; sd < d; ++sd)
    for (Eigen::Index c = 0; c < chi_r; ++c) first[sd](0, c) = cur(0, sd * chi_r + c);
  s.tensors_[0] = std::move(first);
  return s;
}

void MpsState::append_product(const std::vector<CVector>& kets) {
  if (tensors_.empty()) throw std::logic_error("append_product on an empty state");
  if (tensors_.back()[0].cols() != 1) throw std::logic_error("append_product: right boundary is not trivial");
  int running = labels_.back().front();
  for (const auto& ket : kets) {
    if (ket.size() != d_) throw std::invalid_argument("append_product: wrong local dimension");
    if (std::abs(ket.norm() - 1.0) > 1e-12) throw std::invalid_argument("append_product: unnormalized ket");
    std::vector<CMatrix> site(d_, CMatrix(1, 1));
    for (int k = 0; k < d_; ++k) site[k](0, 0) = ket(k);
    tensors_.push_back(std::move(site));
    auto q = ket_charge(ket, local_charge_);
    if (!q) symmetric_ = false;
    running += q.value_or(0);
    lambda_.push_back(RVector::Ones(1));
    labels_.push_back({running});
    fresh_.push_back(1);
  }
  if (!symmetric_) drop_symmetry();
}

const RVector& MpsState::schmidt_values(int bond) const {
  if (bond < 0 || bond + 1 >= size()) throw std::out_of_range("schmidt_values: bond out of range");
  if (!fresh_[bond + 1]) throw StaleSchmidtError("Schmidt data of bond " + std::to_string(bond) + " is stale");
  return lambda_[bond + 1];
}

int MpsState::max_bond_dim() const {
  int m = 1;
  for (const auto& l : lambda_) m = std::max(m, static_cast<int>(l.size()));
  return m;
}

bool MpsState::gate_conserves(const CMatrix& gate, int sites) const {
  std::vector<int> q(gate.rows(), 0);
  for (Eigen::Index idx = 0; idx < gate.rows(); ++idx) {
    Eigen::Index rest = idx;
    for (int k = 0; k < sites; ++k) {
      q[idx] += local_charge_[rest % d_];
      rest /= d_;
    }
  }
  for (Eigen::Index i = 0; i < gate.rows(); ++i)
    for (Eigen::Index j = 0; j < gate.cols(); ++j)
      if (q[i] != q[j] && std::abs(gate(i, j)) > 1e-14) return false;
  return true;
}

void MpsState::drop_symmetry() {
  symmetric_ = false;
  for (auto& l : labels_) std::fill(l.begin(), l.end(), 0);
}

TruncationReport MpsState::apply_two_site_gate(int bond, const CMatrix& gate) {
  if (bond < 0 || bond + 1 >= size()) throw std::out_of_range("apply_two_site_gate: bond out of range");
  const int d = d_;
  if (gate.rows() != d * d || gate.cols() != d * d) throw std::invalid_argument("apply_two_site_gate: gate shape");
  if (unitarity_defect(gate) > 1e-12) throw std::invalid_argument("apply_two_site_gate: gate is not unitary");
  if (symmetric_ && !gate_conserves(gate, 2)) drop_symmetry();

  auto& left = tensors_[bond];
  auto& right = tensors_[bond + 1];
  const Eigen::Index chl = left[0].rows();
  const Eigen::Index chr = right[0].cols();

  std::vector<CMatrix> pair(d * d);
  for (int t1 = 0; t1 < d; ++t1)
    for (int t2 = 0; t2 < d; ++t2) pair[t1 * d + t2].noalias() = left[t1] * right[t2];
  std::vector<CMatrix> theta(d * d, CMatrix::Zero(chl, chr));
  for (int s = 0; s < d * d; ++s)
    for (int t = 0; t < d * d; ++t)
      if (gate(s, t) != Complex(0.0)) theta[s] += gate(s, t) * pair[t];

  const auto& lab_l = labels_[bond];
  const auto& lab_r = labels_[bond + 2];
  const RVector& lam_l = lambda_[bond];
  std::vector<int> row_labels(d * chl), col_labels(d * chr);
  for (int s = 0; s < d; ++s) {
    for (Eigen::Index a = 0; a < chl; ++a) row_labels[s * chl + a] = lab_l[a] + local_charge_[s];
    for (Eigen::Index c = 0; c < chr; ++c) col_labels[s * chr + c] = lab_r[c] - local_charge_[s];
  }
  if (!symmetric_) {
    std::fill(row_labels.begin(), row_labels.end(), 0);
    std::fill(col_labels.begin(), col_labels.end(), 0);
  }
  auto rows = group_by_label(row_labels);
  auto cols = group_by_label(col_labels);

  struct Block {
    int label;
    const std::vector<int>* r;
    const std::vector<int>* c;
    CMatrix theta;
    RVector s;
    CMatrix v;
  };
  std::vector<Block> blocks;
  std::vector<Triple> triples;
  for (auto& [q, ri] : rows) {
    auto it = cols.find(q);
    if (it == cols.end()) continue;
    const auto& ci = it->second;
    Block blk{q, &ri, &it->second, CMatrix(ri.size(), ci.size()), {}, {}};
    for (size_t a = 0; a < ri.size(); ++a) {
      const int s1 = static_cast<int>(ri[a] / chl);
      const Eigen::Index al = ri[a] % chl;
      for (size_t b = 0; b < ci.size(); ++b) {
        const int s2 = static_cast<int>(ci[b] / chr);
        blk.theta(a, b) = theta[s1 * d + s2](al, ci[b] % chr);
      }
    }
    CMatrix phi = blk.theta;
    for (size_t a = 0; a < ri.size(); ++a) phi.row(a) *= lam_l(ri[a] % chl);
    Eigen::BDCSVD<CMatrix> svd(phi, Eigen::ComputeThinV);
    blk.s = svd.singularValues();
    blk.v = svd.matrixV();
    for (int k = 0; k < blk.s.size(); ++k) triples.push_back({blk.s(k), static_cast<int>(blocks.size()), k});
    blocks.push_back(std::move(blk));
  }
  sort_triples(triples);

  double total = 0.0;
  for (const auto& t : triples) total += t.value * t.value;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("apply_two_site_gate: vanishing or non-finite norm");

  std::size_t keep = triples.size();
  double tail = 0.0;
  while (keep > 1) {
    const double w = triples[keep - 1].value * triples[keep - 1].value;
    if (tail + w > svd_cutoff_ * total) break;
    tail += w;
    --keep;
  }
  keep = std::min<std::size_t>(keep, static_cast<std::size_t>(chi_max_));
  double kept = 0.0;
  for (std::size_t j = 0; j < keep; ++j) kept += triples[j].value * triples[j].value;
  const double norm_kept = std::sqrt(kept);
  const Eigen::Index k = static_cast<Eigen::Index>(keep);

  std::vector<CMatrix> new_left(d, CMatrix::Zero(chl, k));
  std::vector<CMatrix> new_right(d, CMatrix::Zero(k, chr));
  RVector lam(k);
  std::vector<int> labs(k);
  // Group kept vectors per block so Theta * V is one product per block.
  std::vector<std::vector<int>> kept_by_block(blocks.size());
  for (Eigen::Index j = 0; j < k; ++j) kept_by_block[triples[j].block].push_back(static_cast<int>(j));
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& js = kept_by_block[bi];
    if (js.empty()) continue;
    const auto& blk = blocks[bi];
    CMatrix vk(blk.v.rows(), js.size());
    for (size_t m = 0; m < js.size(); ++m) vk.col(m) = blk.v.col(triples[js[m]].index);
    CMatrix tv = blk.theta * vk / norm_kept;
    for (size_t m = 0; m < js.size(); ++m) {
      const int j = js[m];
      for (size_t a = 0; a < blk.r->size(); ++a) {
        const int row = (*blk.r)[a];
        new_left[row / chl](row % chl, j) = tv(a, m);
      }
      for (size_t b = 0; b < blk.c->size(); ++b) {
        const int col = (*blk.c)[b];
        new_right[col / chr](j, col % chr) = std::conj(vk(b, m));
      }
      lam(j) = triples[j].value / norm_kept;
      labs[j] = blk.label;
    }
  }
  left = std::move(new_left);
  right = std::move(new_right);
  lambda_[bond + 1] = std::move(lam);
  labels_[bond + 1] = std::move(labs);
  fresh_[bond + 1] = 1;
  check_finite(left[0], "apply_two_site_gate");

  return {bond, (total - kept) / total, static_cast<int>(k)};
}

void MpsState::apply_one_site_gate(int site, const CMatrix& gate) {
  if (site < 0 || site >= size()) throw std::out_of_range("apply_one_site_gate: site out of range");
  if (gate.rows() != d_ || gate.cols() != d_) throw std::invalid_argument("apply_one_site_gate: gate shape");
  if (unitarity_defect(gate) > 1e-12) throw std::invalid_argument("apply_one_site_gate: gate is not unitary");
  if (symmetric_ && !gate_conserves(gate, 1)) drop_symmetry();
  auto& t = tensors_[site];
  std::vector<CMatrix> out(d_, CMatrix::Zero(t[0].rows(), t[0].cols()));
  for (int s = 0; s < d_; ++s)
    for (int u = 0; u < d_; ++u)
      if (gate(s, u) != Complex(0.0)) out[s] += gate(s, u) * t[u];
  t = std::move(out);
}

void MpsState::set_tensor(int site, std::vector<CMatrix> mats) {
  if (site < 0 || site >= size()) throw std::out_of_range("set_tensor: site out of range");
  if (static_cast<int>(mats.size()) != d_) throw std::invalid_argument("set_tensor: wrong local dimension");
  for (const auto& m : mats)
    if (m.rows() != tensors_[site][0].rows() || m.cols() != tensors_[site][0].cols())
      throw std::invalid_argument("set_tensor: bond dimensions must not change");
  tensors_[site] = std::move(mats);
  fresh_[site] = 0;
  fresh_[site + 1] = 0;
  if (site > 0) fresh_[site - 1] = 0;
  if (site + 2 < static_cast<int>(fresh_.size())) fresh_[site + 2] = 0;
  // Tensors may no longer respect the labels.
  drop_symmetry();
}

void MpsState::canonicalize() {
  const int L = size();
  const int d = d_;
  // Right-to-left: make every site right-canonical.
  for (int i = L - 1; i >= 1; --i) {
    auto& t = tensors_[i];
    const Eigen::Index chl = t[0].rows();
    const Eigen::Index chr = t[0].cols();
    CMatrix m(chl, d * chr);
    for (int s = 0; s < d; ++s) m.middleCols(s * chr, chr) = t[s];
    std::vector<int> rl = labels_[i];
    std::vector<int> cl(d * chr);
    for (int s = 0; s < d; ++s)
      for (Eigen::Index c = 0; c < chr; ++c) cl[s * chr + c] = labels_[i + 1][c] - local_charge_[s];
    if (!symmetric_) {
      std::fill(rl.begin(), rl.end(), 0);
      std::fill(cl.begin(), cl.end(), 0);
    }
    auto svd = labeled_svd(m, rl, cl, 1e-15);
    const Eigen::Index k = svd.s.size();
    std::vector<CMatrix> nt(d, CMatrix(k, chr));
    CMatrix vh = svd.v.adjoint();
    for (int s = 0; s < d; ++s) nt[s] = vh.middleCols(s * chr, chr);
    t = std::move(nt);
    CMatrix us = svd.u * svd.s.asDiagonal();
    for (auto& prev : tensors_[i - 1]) prev = prev * us;
    labels_[i] = svd.labels;
    if (!symmetric_) std::fill(labels_[i].begin(), labels_[i].end(), 0);
  }
  double n0 = 0.0;
  for (const auto& m : tensors_[0]) n0 += m.squaredNorm();
  if (!(n0 > 0.0)) throw NumericalError("canonicalize: zero norm");
  for (auto& m : tensors_[0]) m /= std::sqrt(n0);

  // Left-to-right: rotate each bond into its Schmidt basis.
  CMatrix env = CMatrix::Ones(1, 1);
  lambda_[0] = RVector::Ones(1);
  for (int i = 0; i + 1 < L; ++i) {
    auto& t = tensors_[i];
    const Eigen::Index chr = t[0].cols();
    CMatrix g = CMatrix::Zero(chr, chr);
    for (int s = 0; s < d; ++s) g.noalias() += t[s].adjoint() * env * t[s];
    auto groups = group_by_label(symmetric_ ? labels_[i + 1] : std::vector<int>(chr, 0));
    std::vector<Triple> triples;
    struct Eig {
      int label;
      const std::vector<int>* idx;
      RVector w;
      CMatrix v;
    };
    std::vector<Eig> eigs;
    for (auto& [q, idx] : groups) {
      CMatrix sub(idx.size(), idx.size());
      for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = 0; b < idx.size(); ++b) sub(a, b) = g(idx[a], idx[b]);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
      Eig e{q, &idx, es.eigenvalues(), es.eigenvectors()};
      for (int k = 0; k < e.w.size(); ++k) triples.push_back({e.w(k), static_cast<int>(eigs.size()), k});
      eigs.push_back(std::move(e));
    }
    sort_triples(triples);
    CMatrix rot = CMatrix::Zero(chr, chr);
    RVector lam(chr);
    std::vector<int> labs(chr);
    for (Eigen::Index j = 0; j < chr; ++j) {
      const auto& tr = triples[j];
      const auto& e = eigs[tr.block];
      for (size_t a = 0; a < e.idx->size(); ++a) rot((*e.idx)[a], j) = e.v(a, tr.index);
      lam(j) = std::sqrt(std::max(tr.value, 0.0));
      labs[j] = e.label;
    }
    for (auto& m : t) m = m * rot;
    for (auto& m : tensors_[i + 1]) m = rot.adjoint() * m;
    lambda_[i + 1] = lam;
    labels_[i + 1] = symmetric_ ? labs : std::vector<int>(chr, 0);
    env = lam.cwiseAbs2().asDiagonal();
  }
  lambda_[L] = RVector::Ones(1);
  std::fill(fresh_.begin(), fresh_.end(), 1);
}

double MpsState::norm_squared() const { return inner_product(*this, *this).real(); }

CVector MpsState::to_dense() const {
  CMatrix v = CMatrix::Ones(1, 1);
  for (const auto& t : tensors_) {
    CMatrix next(v.rows() * d_, t[0].cols());
    for (Eigen::Index p = 0; p < v.rows(); ++p)
      for (int s = 0; s < d_; ++s) next.row(p * d_ + s) = v.row(p) * t[s];
    v = std::move(next);
  }
  return v.col(0);
}

namespace {

constexpr char kMagic[8] = {'P', 'C', 'M', 'P', 'S', '0', '0', '1'};

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

}  // namespace

void MpsState::save(std::ostream& os, const std::string& metadata) const {
  os.write(kMagic, sizeof(kMagic));
  put<std::int64_t>(os, size());
  put<std::int64_t>(os, d_);
  put<std::int64_t>(os, chi_max_);
  put<double>(os, svd_cutoff_);
  put<std::uint8_t>(os, symmetric_ ? 1 : 0);
  for (int q : local_charge_) put<std::int64_t>(os, q);
  put<std::uint64_t>(os, metadata.size());
  os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  for (std::size_t b = 0; b < lambda_.size(); ++b) {
    put<std::int64_t>(os, lambda_[b].size());
    for (Eigen::Index k = 0; k < lambda_[b].size(); ++k) {
      put<double>(os, lambda_[b](k));
      put<std::int64_t>(os, labels_[b][k]);
    }
    put<std::uint8_t>(os, static_cast<std::uint8_t>(fresh_[b]));
  }
  for (const auto& t : tensors_) {
    put<std::int64_t>(os, t[0].rows());
    put<std::int64_t>(os, t[0].cols());
    for (const auto& m : t)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          put<double>(os, m(r, c).real());
          put<double>(os, m(r, c).imag());
        }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

MpsState MpsState::load(std::istream& is, std::string* metadata) {
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("checkpoint: bad magic");
  MpsState s;
  const auto L = get<std::int64_t>(is);
  s.d_ = static_cast<int>(get<std::int64_t>(is));
  s.chi_max_ = static_cast<int>(get<std::int64_t>(is));
  s.svd_cutoff_ = get<double>(is);
  s.symmetric_ = get<std::uint8_t>(is) != 0;
  s.local_charge_.resize(s.d_);
  for (auto& q : s.local_charge_) q = static_cast<int>(get<std::int64_t>(is));
  const auto mlen = get<std::uint64_t>(is);
  std::string meta(mlen, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(mlen));
  if (metadata) *metadata = std::move(meta);
  s.lambda_.resize(L + 1);
  s.labels_.resize(L + 1);
  s.fresh_.resize(L + 1);
  for (std::int64_t b = 0; b <= L; ++b) {
    const auto n = get<std::int64_t>(is);
    s.lambda_[b].resize(n);
    s.labels_[b].resize(n);
    for (std::int64_t k = 0; k < n; ++k) {
      s.lambda_[b](k) = get<double>(is);
      s.labels_[b][k] = static_cast<int>(get<std::int64_t>(is));
    }
    s.fresh_[b] = static_cast<char>(get<std::uint8_t>(is));
  }
  s.tensors_.resize(L);
  for (auto& t : s.tensors_) {
    const auto rows = get<std::int64_t>(is);
    const auto cols = get<std::int64_t>(is);
    t.assign(s.d_, CMatrix(rows, cols));
    for (auto& m : t)
      for (std::int64_t c = 0; c < cols; ++c)
        for (std::int64_t r = 0; r < rows; ++r) {
          const double re = get<double>(is);
          const double im = get<double>(is);
          m(r, c) = Complex(re, im);
        }
  }
  return s;
}

bool operator==(const MpsState& a, const MpsState& b) {
  if (a.d_ != b.d_ || a.chi_max_ != b.chi_max_ || a.svd_cutoff_ != b.svd_cutoff_ || a.symmetric_ != b.symmetric_ ||
      a.local_charge_ != b.local_charge_ || a.labels_ != b.labels_ || a.fresh_ != b.fresh_ ||
      a.tensors_.size() != b.tensors_.size())
    return false;
  for (std::size_t i = 0; i < a.lambda_.size(); ++i)
    if (a.lambda_[i].size() != b.lambda_[i].size() || a.lambda_[i] != b.lambda_[i]) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i)
    for (std::size_t s = 0; s < a.tensors_[i].size(); ++s) {
      const auto& x = a.tensors_[i][s];
      const auto& y = b.tensors_[i][s];
      if (x.rows() != y.rows() || x.cols() != y.cols() || x != y) return false;
    }
  return true;
}

MpsState product_state(const std::vector<CVector>& kets, int chi_max, double svd_cutoff) {
  return MpsState::product(kets, chi_max, svd_cutoff);
}

TruncationReport apply_two_site_gate(MpsState& s, int bond, const CMatrix& gate) {
  return s.apply_two_site_gate(bond, gate);
}

double entanglement_entropy(const MpsState& s, int cut) {
  const RVector& lam = s.schmidt_values(cut);
  double e = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) < 1e-16) continue;
    const double p = lam(k) * lam(k);
    e -= p * std::log(p);
  }
  return std::max(e, 0.0);
}

namespace {

double checked_real(Complex v, const char* where) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError(std::string(where) + ": non-finite");
  if (std::abs(v.imag()) > 1e-10) throw NumericalError(std::string(where) + ": imaginary expectation value");
  return v.real();
}

}  // namespace

double expect_local(const MpsState& s, int site, const CMatrix& op) {
  if (site < 0 || site >= s.size()) throw std::out_of_range("expect_local: site out of range");
  const int d = s.local_dim();
  const auto& t = s.tensor(site);
  const RVector& lam = s.left_lambda(site);
  std::vector<CMatrix> m(d);
  for (int k = 0; k < d; ++k) m[k] = lam.asDiagonal() * t[k];
  Complex v = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (op(a, b) != Complex(0.0)) v += op(a, b) * (m[a].conjugate().cwiseProduct(m[b])).sum();
  return checked_real(v, "expect_local");
}

double expect_bond(const MpsState& s, int bond, const CMatrix& op) {
  if (bond < 0 || bond + 1 >= s.size()) throw std::out_of_range("expect_bond: bond out of range");
  const int d = s.local_dim();
  const auto& l = s.tensor(bond);
  const auto& r = s.tensor(bond + 1);
  const RVector& lam = s.left_lambda(bond);
  std::vector<CMatrix> th(d * d);
  for (int a = 0; a < d; ++a) {
    CMatrix la = lam.asDiagonal() * l[a];
    for (int b = 0; b < d; ++b) th[a * d + b] = la * r[b];
  }
  Complex v = 0.0;
  for (int x = 0; x < d * d; ++x)
    for (int y = 0; y < d * d; ++y)
      if (op(x, y) != Complex(0.0)) v += op(x, y) * (th[x].conjugate().cwiseProduct(th[y])).sum();
  return checked_real(v, "expect_bond");
}

RMatrix correlation_matrix(const MpsState& s, const std::vector<int>& sites, const CMatrix& op) {
  const int n = static_cast<int>(sites.size());
  const int d = s.local_dim();
  if (!std::is_sorted(sites.begin(), sites.end())) throw std::invalid_argument("correlation_matrix: sites unsorted");
  RMatrix out(n, n);
  const CMatrix op2 = op * op;
  for (int a = 0; a < n; ++a) {
    const int i = sites[a];
    out(a, a) = expect_local(s, i, op2);
    if (a + 1 == n) break;
    const auto& ti = s.tensor(i);
    const RVector& lam = s.left_lambda(i);
    std::vector<CMatrix> m(d);
    for (int k = 0; k < d; ++k) m[k] = lam.asDiagonal() * ti[k];
    CMatrix env = CMatrix::Zero(ti[0].cols(), ti[0].cols());
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y)
        if (op(x, y) != Complex(0.0)) env.noalias() += op(x, y) * m[x].adjoint() * m[y];
    int b = a + 1;
    for (int k = i + 1; k <= sites.back() && b < n; ++k) {
      const auto& tk = s.tensor(k);
      if (k == sites[b]) {
        Complex v = 0.0;
        for (int x = 0; x < d; ++x)
          for (int y = 0; y < d; ++y)
            if (op(x, y) != Complex(0.0)) v += op(x, y) * (tk[x].adjoint() * env * tk[y]).trace();
        out(a, b) = out(b, a) = checked_real(v, "correlation_matrix");
        ++b;
      }
      if (b >= n) break;
      CMatrix next = CMatrix::Zero(tk[0].cols(), tk[0].cols());
      for (int x = 0; x < d; ++x) next.noalias() += tk[x].adjoint() * env * tk[x];
      env = std::move(next);
    }
  }
  return out;
}

Complex inner_product(const MpsState& a, const MpsState& b) {
  if (a.size() != b.size() || a.local_dim() != b.local_dim())
    throw std::invalid_argument("inner_product: incompatible states");
  CMatrix env = CMatrix::Ones(1, 1);
  for (int i = 0; i < a.size(); ++i) {
    const auto& ta = a.tensor(i);
    const auto& tb = b.tensor(i);
    CMatrix next = CMatrix::Zero(ta[0].cols(), tb[0].cols());
    for (int s = 0; s < a.local_dim(); ++s) next.noalias() += ta[s].adjoint() * env * tb[s];
    env = std::move(next);
  }
  return env(0, 0);
}

}  // namespace pagecurve
