#include "pagecurve/ed_oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <type_traits>
#include <stdexcept>

namespace pagecurve::ed {

namespace {

// Terms of H_sys + H_sys-bath + H_bath written out site by site, labelled
// i = -(L_S-1) .. 0 (system), 1 .. L_B (bath); converted to 0-based positions at the end.
std::vector<Coupling> hamiltonian_terms(const ModelParams& p) {
  std::vector<Coupling> out;
  const int shift = p.L_S - 1;
  const double J = ModelParams::J;
  for (int i = -(p.L_S - 1); i <= -1; ++i) out.push_back({i + shift, i + 1 + shift, J, J * p.delta_sys});
  for (int i = -(p.L_S - 1); i <= -2; ++i)
    if (p.j_prime != 0.0) out.push_back({i + shift, i + 2 + shift, 0.0, p.j_prime});
  out.push_back({shift, 1 + shift, J, J * p.delta_bath});
  for (int i = 1; i <= p.L_B - 1; ++i) out.push_back({i + shift, i + 1 + shift, J, J * p.delta_bath});
  return out;
}

std::uint64_t mask(int L, int site) { return std::uint64_t{1} << (L - 1 - site); }

CVector apply_couplings(const CVector& psi, int L, const std::vector<Coupling>& cs, int offset = 0) {
  CVector out = CVector::Zero(psi.size());
  for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(psi.size()); ++x) {
    const Complex a = psi(static_cast<Eigen::Index>(x));
    if (a == Complex(0.0)) continue;
    for (const auto& c : cs) {
      const int i = c.i + offset;
      const int j = c.j + offset;
      const bool ui = is_up(x, L, i);
      const bool uj = is_up(x, L, j);
      out(static_cast<Eigen::Index>(x)) += a * c.jz * (ui == uj ? 0.25 : -0.25);
      if (ui != uj && c.jxy != 0.0) out(static_cast<Eigen::Index>(x ^ mask(L, i) ^ mask(L, j))) += a * 0.5 * c.jxy;
    }
  }
  return out;
}

}  // namespace

SectorBasis make_sector(int L, int n_up) {
  if (L < 1 || L > 30) throw std::invalid_argument("make_sector: unsupported length");
  SectorBasis b;
  b.L = L;
  b.n_up = n_up;
  const std::uint64_t full = std::uint64_t{1} << L;
  for (std::uint64_t x = 0; x < full; ++x) {
    int ups = 0;
    for (int i = 0; i < L; ++i) ups += is_up(x, L, i) ? 1 : 0;
    if (ups == n_up) {
      b.index.emplace(x, static_cast<int>(b.states.size()));
      b.states.push_back(x);
    }
  }
  return b;
}

RMatrix couplings_hamiltonian(int L, const std::vector<Coupling>& couplings, const std::vector<std::uint64_t>& states) {
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(states.size() * 2);
  for (std::size_t k = 0; k < states.size(); ++k) index.emplace(states[k], static_cast<int>(k));
  const auto n = static_cast<Eigen::Index>(states.size());
  RMatrix h = RMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto x = states[k];
    for (const auto& c : couplings) {
      const bool ui = is_up(x, L, c.i);
      const bool uj = is_up(x, L, c.j);
      h(k, k) += c.jz * (ui == uj ? 0.25 : -0.25);
      if (ui != uj && c.jxy != 0.0) {
        auto it = index.find(x ^ mask(L, c.i) ^ mask(L, c.j));
        if (it == index.end()) throw std::invalid_argument("couplings_hamiltonian: state set not closed");
        h(it->second, k) += 0.5 * c.jxy;
      }
    }
  }
  return h;
}

RMatrix dense_hamiltonian(const ModelParams& p) {
  const int L = p.total_sites();
  if (L > 14) throw std::invalid_argument("dense_hamiltonian: at most 14 sites");
  std::vector<std::uint64_t> all(std::size_t{1} << L);
  for (std::size_t x = 0; x < all.size(); ++x) all[x] = x;
  return couplings_hamiltonian(L, hamiltonian_terms(p), all);
}

RMatrix sector_hamiltonian(const ModelParams& p, const SectorBasis& basis) {
  return couplings_hamiltonian(basis.L, hamiltonian_terms(p), basis.states);
}

DenseEvolver::DenseEvolver(const RMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("DenseEvolver: eigensolver failed");
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

CVector DenseEvolver::evolve(const CVector& psi0, double t) const {
  CVector c = vectors_.transpose().cast<Complex>() * psi0;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(Complex(0.0, -energies_(k) * t));
  return vectors_.cast<Complex>() * c;
}

CVector exact_evolve(const CVector& psi0, const RMatrix& h, double t) { return DenseEvolver(h).evolve(psi0, t); }

double bipartite_entropy(const CVector& psi, int L, int left_sites) {
  const Eigen::Index dl = Eigen::Index(1) << left_sites;
  const Eigen::Index dr = Eigen::Index(1) << (L - left_sites);
  // psi index = xl * dr + xr; Eigen maps column-major, so this is the transpose.
  Eigen::Map<const CMatrix> m(psi.data(), dr, dl);
  Eigen::BDCSVD<CMatrix> svd(m);
  RVector p = svd.singularValues().cwiseAbs2();
  return shannon_entropy(p / p.sum());
}

CVector product_vector(const std::vector<bool>& up) {
  CVector v = CVector::Ones(1);
  for (bool u : up) v = kron(v, u ? spin::up() : spin::down());
  return v;
}

namespace {

constexpr double kDoubleMerge = 1e-9;
constexpr double kSingleMerge = 1e-5;

// Levels closer than `merge` (relative to max(1, |E|)) are merged: inside a degenerate subspace the
// split of the weight between eigenvectors is arbitrary.
OverlapHistogram finish_histogram(std::vector<std::pair<double, double>> pairs, double merge = kDoubleMerge) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<double, double>> levels;
  for (const auto& [e, w] : pairs) {
    if (!levels.empty() && e - levels.back().first <= merge * std::max(1.0, std::abs(e)))
      levels.back().second += w;
    else
      levels.emplace_back(e, w);
  }
  OverlapHistogram h;
  h.energies.resize(levels.size());
  h.overlaps.resize(levels.size());
  double sum2 = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    h.energies(k) = levels[k].first;
    h.overlaps(k) = levels[k].second;
    h.max_overlap = std::max(h.max_overlap, levels[k].second);
    sum2 += levels[k].second * levels[k].second;
  }
  h.participation_ratio = 1.0 / sum2;
  return h;
}

}  // namespace

OverlapHistogram overlap_histogram(const CVector& psi0, const RMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("overlap_histogram: eigensolver failed");
  CVector c = es.eigenvectors().transpose().cast<Complex>() * psi0;
  const double norm2 = c.squaredNorm();
  std::vector<std::pair<double, double>> pairs;
  for (Eigen::Index k = 0; k < c.size(); ++k) pairs.emplace_back(es.eigenvalues()(k), std::norm(c(k)) / norm2);
  return finish_histogram(std::move(pairs));
}

namespace {

extern "C" {
void dsytrd_2stage_(const char*, const char*, const int*, double*, const int*, double*, double*, double*, double*,
                    const int*, double*, const int*, int*, std::size_t, std::size_t);
void ssytrd_2stage_(const char*, const char*, const int*, float*, const int*, float*, float*, float*, float*,
                    const int*, float*, const int*, int*, std::size_t, std::size_t);
}

void sytrd_2stage(int n, double* a, double* d, double* e, double* tau, double* hous, int lhous, double* work,
                  int lwork, int* info) {
  dsytrd_2stage_("N", "L", &n, a, &n, d, e, tau, hous, &lhous, work, &lwork, info, 1, 1);
}
void sytrd_2stage(int n, float* a, float* d, float* e, float* tau, float* hous, int lhous, float* work, int lwork,
                  int* info) {
  ssytrd_2stage_("N", "L", &n, a, &n, d, e, tau, hous, &lhous, work, &lwork, info, 1, 1);
}
lapack_int sytrd(lapack_int n, double* a, double* d, double* e, double* tau) {
  return LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a, n, d, e, tau);
}
lapack_int sytrd(lapack_int n, float* a, float* d, float* e, float* tau) {
  return LAPACKE_ssytrd(LAPACK_COL_MAJOR, 'L', n, a, n, d, e, tau);
}
lapack_int ormtr(lapack_int n, lapack_int cols, const double* a, const double* tau, double* c) {
  return LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'T', n, cols, a, n, tau, c, n);
}
lapack_int ormtr(lapack_int n, lapack_int cols, const float* a, const float* tau, float* c) {
  return LAPACKE_sormtr(LAPACK_COL_MAJOR, 'L', 'L', 'T', n, cols, a, n, tau, c, n);
}

// Reduces h to tridiagonal (d, e) and returns y rotated into the tridiagonal basis. With
// `unit_first` set, y is a multiple of e_1, which the lower Householder reduction leaves fixed,
// so the faster two-stage reduction can be used without forming any reflector.
template <class T>
void tridiagonalize(RMatrix& h, RMatrix& y, bool unit_first, RVector& d, RVector& e) {
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using V = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(h.rows());
  M a;
  if constexpr (std::is_same_v<T, double>) {
    a.swap(h);
  } else {
    a = h.cast<T>();
    h.resize(0, 0);
  }
  V dd(n), ee(n), tau(n);
  int info = 0;
  if (unit_first) {
    T hq = 0, wq = 0;
    sytrd_2stage(n, a.data(), dd.data(), ee.data(), tau.data(), &hq, -1, &wq, -1, &info);
    if (info != 0) throw NumericalError("two-stage reduction: workspace query failed");
    V hous(static_cast<Eigen::Index>(hq)), work(static_cast<Eigen::Index>(wq));
    sytrd_2stage(n, a.data(), dd.data(), ee.data(), tau.data(), hous.data(), static_cast<int>(hous.size()),
                 work.data(), static_cast<int>(work.size()), &info);
    if (info != 0) throw NumericalError("two-stage reduction failed");
  } else {
    if (sytrd(n, a.data(), dd.data(), ee.data(), tau.data()) != 0) throw NumericalError("sytrd failed");
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> c = y.cast<T>();
    if (ormtr(n, static_cast<lapack_int>(c.cols()), a.data(), tau.data(), c.data()) != 0)
      throw NumericalError("ormtr failed");
    y = c.template cast<double>();
  }
  d = dd.template cast<double>();
  e = ee.template cast<double>();
  e(n - 1) = 0.0;
}

// Implicit QL on the tridiagonal (d, e), e(i) coupling i and i+1. Only the rows of the
// eigenvector matrix given in `rows` (as a rows x n block) are accumulated.
void tridiagonal_ql(RVector& d, RVector& e, RMatrix& rows) {
  const Eigen::Index n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index l = 0; l < n; ++l) {
    for (int iter = 0;; ++iter) {
      Eigen::Index m = l;
      for (; m < n - 1; ++m)
        if (std::abs(e(m)) <= eps * (std::abs(d(m)) + std::abs(d(m + 1)))) break;
      if (m == l) break;
      if (iter == 60) throw NumericalError("tridiagonal QL did not converge");
      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (Eigen::Index i = m - 1; i >= l; --i) {
        const double f = s * e(i), b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(m) = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        for (Eigen::Index k = 0; k < rows.rows(); ++k) {
          const double zi = rows(k, i), zn = rows(k, i + 1);
          rows(k, i + 1) = s * zi + c * zn;
          rows(k, i) = c * zi - s * zn;
        }
      }
      if (underflow) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    }
  }
}

}  // namespace

OverlapHistogram overlap_histogram_sectors(const ModelParams& p, const CVector& psi0, Precision precision) {
  const int L = p.total_sites();
  if (psi0.size() != (Eigen::Index(1) << L)) throw std::invalid_argument("overlap_histogram_sectors: vector size");
  const double norm2 = psi0.squaredNorm();
  std::vector<std::pair<double, double>> pairs;
  for (int n_up = 0; n_up <= L; ++n_up) {
    SectorBasis basis = make_sector(L, n_up);
    const auto n = static_cast<Eigen::Index>(basis.states.size());
    RMatrix y(n, 2);
    double weight = 0.0;
    Eigen::Index support = 0, last = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Complex a = psi0(static_cast<Eigen::Index>(basis.states[k]));
      y(k, 0) = a.real();
      y(k, 1) = a.imag();
      weight += std::norm(a);
      if (a != Complex(0.0)) {
        ++support;
        last = k;
      }
    }
    if (weight / norm2 < 1e-15) continue;
    RMatrix h = sector_hamiltonian(p, basis);
    if (n == 1) {
      pairs.emplace_back(h(0, 0), weight / norm2);
      continue;
    }
    const bool unit_first = support == 1;
    if (unit_first) {
      h.row(0).swap(h.row(last));
      h.col(0).swap(h.col(last));
    }
    RVector d, e;
    if (precision == Precision::single)
      tridiagonalize<float>(h, y, unit_first, d, e);
    else
      tridiagonalize<double>(h, y, unit_first, d, e);
    RMatrix rows;
    if (unit_first) {
      rows = RMatrix::Zero(1, n);
      rows(0, 0) = std::sqrt(weight);
    } else {
      rows = y.transpose();
    }
    tridiagonal_ql(d, e, rows);
    RVector ov = rows.colwise().squaredNorm().transpose();
    ov *= weight / ov.sum();
    for (Eigen::Index k = 0; k < n; ++k) pairs.emplace_back(d(k), ov(k) / norm2);
  }
  return finish_histogram(std::move(pairs), precision == Precision::single ? kSingleMerge : kDoubleMerge);
}

CVector random_coefficient_state(const ModelParams& p, std::uint64_t seed) {
  const int L = p.total_sites();
  if (p.L_S > 12 || L > 24) throw std::invalid_argument("random_coefficient_state: system too large");
  if (p.L_S % 2 != 0) throw std::invalid_argument("random_coefficient_state: L_S must be even");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  SectorBasis sys = make_sector(p.L_S, p.L_S / 2);
  CVector psi = CVector::Zero(Eigen::Index(1) << L);
  // Bath all down: every bath bit set.
  const std::uint64_t bath_bits = (std::uint64_t{1} << p.L_B) - 1;
  for (auto x : sys.states) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    psi(static_cast<Eigen::Index>((x << p.L_B) | bath_bits)) = Complex(re, im);
  }
  return psi / psi.norm();
}

CVector apply_gate(const CVector& psi, int L, int first, int span, const CMatrix& gate) {
  const Eigen::Index dg = Eigen::Index(1) << span;
  const Eigen::Index dr = Eigen::Index(1) << (L - first - span);
  const Eigen::Index dl = Eigen::Index(1) << first;
  CVector out(psi.size());
  for (Eigen::Index l = 0; l < dl; ++l)
    for (Eigen::Index r = 0; r < dr; ++r) {
      CVector in(dg);
      for (Eigen::Index g = 0; g < dg; ++g) in(g) = psi((l * dg + g) * dr + r);
      CVector res = gate * in;
      for (Eigen::Index g = 0; g < dg; ++g) out((l * dg + g) * dr + r) = res(g);
    }
  return out;
}

CMatrix reduced_density_matrix(const CVector& psi, int L, int first, int count) {
  const Eigen::Index dc = Eigen::Index(1) << count;
  const Eigen::Index dr = Eigen::Index(1) << (L - first - count);
  const Eigen::Index dl = Eigen::Index(1) << first;
  CMatrix rho = CMatrix::Zero(dc, dc);
  for (Eigen::Index l = 0; l < dl; ++l)
    for (Eigen::Index r = 0; r < dr; ++r)
      for (Eigen::Index a = 0; a < dc; ++a) {
        const Complex va = psi((l * dc + a) * dr + r);
        if (va == Complex(0.0)) continue;
        for (Eigen::Index b = 0; b < dc; ++b) rho(a, b) += va * std::conj(psi((l * dc + b) * dr + r));
      }
  return rho;
}

DenseRecord dense_measure(const CVector& psi, const ModelParams& p, int bin_size) {
  const int L = p.total_sites();
  if (bin_size <= 0) bin_size = p.L_S;
  DenseRecord r;
  r.density.assign(L, 0.0);
  for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(psi.size()); ++x) {
    const double w = std::norm(psi(static_cast<Eigen::Index>(x)));
    if (w == 0.0) continue;
    int n_bath = 0;
    int n_sys = 0;
    for (int i = 0; i < L; ++i) {
      if (!is_up(x, L, i)) continue;
      r.density[i] += w;
      (i < p.L_S ? n_sys : n_bath) += 1;
    }
    r.n_bath_mean += w * n_bath;
    r.n_bath_var += w * n_bath * n_bath;
    r.n_sys_mean += w * n_sys;
    r.n_sys_var += w * n_sys * n_sys;
  }
  r.n_bath_var -= r.n_bath_mean * r.n_bath_mean;
  r.n_sys_var -= r.n_sys_mean * r.n_sys_mean;
  r.s_vn = bipartite_entropy(psi, L, p.L_S);

  auto energy = [&](const std::vector<Coupling>& cs, int offset) {
    return psi.dot(apply_couplings(psi, L, cs, offset)).real();
  };
  std::vector<Coupling> sys_terms;
  for (int i = 0; i + 1 < p.L_S; ++i) sys_terms.push_back({i, i + 1, 1.0, p.delta_sys});
  for (int i = 0; i + 2 < p.L_S; ++i)
    if (p.j_prime != 0.0) sys_terms.push_back({i, i + 2, 0.0, p.j_prime});
  r.e_sys = energy(sys_terms, 0);
  for (int i = 0; i < p.L_S; ++i) r.m_sys += r.density[i] - 0.5;
  std::vector<Coupling> bin_terms;
  for (int i = 0; i + 1 < bin_size; ++i) bin_terms.push_back({i, i + 1, 1.0, p.delta_bath});
  for (int start = p.L_S; start + bin_size <= L; start += bin_size) {
    r.e_bins.push_back(energy(bin_terms, start));
    double m = 0.0;
    for (int i = start; i < start + bin_size; ++i) m += r.density[i] - 0.5;
    r.m_bins.push_back(m);
  }
  r.e_total = energy(hamiltonian_terms(p), 0);
  return r;
}

}  // namespace pagecurve::ed
