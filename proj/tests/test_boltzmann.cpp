#include "helpers.hpp"
#include "pagecurve/boltzmann.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pagecurve;
using namespace testing_support;

namespace {

struct DenseGc {
  double e, m, s;
};

// exp(-beta (H - mu Sz)) / Z built from a full diagonalization of the cell Hamiltonian.
DenseGc dense_gc(int sites, const std::vector<Coupling>& couplings, double beta, double mu) {
  std::vector<std::uint64_t> all(std::size_t{1} << sites);
  for (std::size_t x = 0; x < all.size(); ++x) all[x] = x;
  const RMatrix h = ed::couplings_hamiltonian(sites, couplings, all);
  RMatrix sz = RMatrix::Zero(h.rows(), h.cols());
  for (std::size_t x = 0; x < all.size(); ++x) {
    double m = 0.0;
    for (int i = 0; i < sites; ++i) m += ed::is_up(x, sites, i) ? 0.5 : -0.5;
    sz(x, x) = m;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(beta * (h - mu * sz));
  const RVector w = (-es.eigenvalues().array() + es.eigenvalues().minCoeff()).exp();
  const RVector p = w / w.sum();
  const RMatrix rho = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().transpose();
  return {(rho * h).trace(), (rho * sz).trace(), shannon_entropy(p, 0.0)};
}

}  // namespace

TEST(Boltzmann, TwoSiteSpectrum) {
  const auto spec = cell_spectrum(model(2, 2, 1.0), CellKind::system);
  ASSERT_EQ(spec.sector_m, (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_NEAR(spec.sector_energies[0](0), 0.25, 1e-15);
  EXPECT_NEAR(spec.sector_energies[2](0), 0.25, 1e-15);
  ASSERT_EQ(spec.sector_energies[1].size(), 2);
  EXPECT_NEAR(spec.sector_energies[1](0), -0.75, 1e-15);
  EXPECT_NEAR(spec.sector_energies[1](1), 0.25, 1e-15);
  EXPECT_EQ(spec.dimension(), 4);
  EXPECT_NEAR(spec.min_energy(), -0.75, 1e-15);
}

TEST(Boltzmann, SpectrumIsTracelessAndComplete) {
  const auto spec = cell_spectrum(model(8, 8, 0.7, 1.0), CellKind::system);
  EXPECT_EQ(spec.dimension(), 256);
  double tr = 0.0;
  for (const auto& e : spec.sector_energies) tr += e.sum();
  EXPECT_NEAR(tr, 0.0, 1e-11);
}

TEST(Boltzmann, FreeFermionBin) {
  // At zero anisotropy each sector spectrum is a sum of single-particle energies cos(pi k / (n+1)).
  const int n = 6;
  const auto spec = cell_spectrum(model(6, 12, 1.0, 0.0, 0.0), CellKind::bath_bin);
  std::vector<double> eps(n);
  for (int k = 1; k <= n; ++k) eps[k - 1] = std::cos(M_PI * k / (n + 1));
  for (std::size_t s = 0; s < spec.sector_m.size(); ++s) {
    const int particles = static_cast<int>(std::lround(spec.sector_m[s] + 0.5 * n));
    std::vector<double> sums;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != particles) continue;
      double e = 0.0;
      for (int k = 0; k < n; ++k)
        if (mask >> k & 1u) e += eps[k];
      sums.push_back(e);
    }
    std::sort(sums.begin(), sums.end());
    ASSERT_EQ(static_cast<std::size_t>(spec.sector_energies[s].size()), sums.size());
    std::vector<double> got(spec.sector_energies[s].data(), spec.sector_energies[s].data() + sums.size());
    std::sort(got.begin(), got.end());
    // The sign of the hopping only flips the single-particle band, which is symmetric.
    for (std::size_t k = 0; k < sums.size(); ++k) EXPECT_NEAR(got[k], sums[k], 1e-12);
  }
}

TEST(Boltzmann, BinSpectrumUsesBathAnisotropy) {
  const auto bin = cell_spectrum(model(4, 8, 0.2, 0.0, 1.0), CellKind::bath_bin, 2);
  EXPECT_NEAR(bin.min_energy(), -0.75, 1e-15);
  EXPECT_THROW(cell_spectrum(model(18, 18, 1.0), CellKind::system), std::invalid_argument);
}

TEST(Boltzmann, ExpectationsMatchDenseTrace) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto p = model(4, 4, 0.9, 0.6);
  const auto spec = cell_spectrum(p, CellKind::system);
  for (int k = 0; k < 10; ++k) {
    const double beta = u(rng), mu = u(rng);
    const auto g = gc_expectations(spec, beta, mu);
    const auto d = dense_gc(4, system_cell_couplings(p), beta, mu);
    EXPECT_NEAR(g.energy, d.e, 1e-12);
    EXPECT_NEAR(g.magnetization, d.m, 1e-12);
    EXPECT_NEAR(gc_entropy(spec, beta, mu), d.s, 1e-12);
  }
}

TEST(Boltzmann, EntropyIdentityUpToSixSites) {
  for (int ls : {2, 3, 4, 5, 6}) {
    const auto p = model(ls, ls, 1.1, ls % 2 == 0 ? 0.5 : 0.0);
    const auto spec = cell_spectrum(p, CellKind::system);
    for (double beta : {-1.5, 0.3, 2.0})
      for (double mu : {-0.8, 0.0, 1.7})
        EXPECT_NEAR(gc_entropy(spec, beta, mu), dense_gc(ls, system_cell_couplings(p), beta, mu).s, 1e-10);
  }
}

TEST(Boltzmann, InfiniteTemperature) {
  const auto spec = cell_spectrum(model(6, 6, 1.0), CellKind::system);
  const auto g = gc_expectations(spec, 0.0, 0.0);
  EXPECT_NEAR(g.energy, 0.0, 1e-14);
  EXPECT_NEAR(g.magnetization, 0.0, 1e-14);
  EXPECT_EQ(gc_entropy(spec, 0.0, 0.0), 6 * std::log(2.0));
  const auto f = fit_gc(spec, 0.0, 0.0);
  EXPECT_EQ(f.beta, 0.0);
  EXPECT_EQ(f.mu, 0.0);
  EXPECT_NEAR(f.entropy, 6 * std::log(2.0), 1e-12);
}

TEST(Boltzmann, LargeFieldApproachesFilledCell) {
  const auto spec = cell_spectrum(model(4, 4, 1.0), CellKind::system);
  const auto g = gc_expectations(spec, 5.0, 20.0);
  EXPECT_NEAR(g.magnetization, 2.0, 1e-10);
  EXPECT_NEAR(g.energy, 0.75, 1e-10);
  EXPECT_NEAR(gc_entropy(spec, 5.0, 20.0), 0.0, 1e-9);
}

TEST(Boltzmann, RoundTripGrid) {
  const auto spec = cell_spectrum(model(6, 6, 1.0), CellKind::system);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const double beta = -3.0 + 0.75 * i, mu = -3.0 + 0.75 * j;
      const auto g = gc_expectations(spec, beta, mu);
      const auto f = fit_gc(spec, g.energy, g.magnetization, 1e-12);
      EXPECT_TRUE(f.converged) << beta << " " << mu;
      EXPECT_NEAR(f.beta, beta, 1e-6) << beta << " " << mu;
      // mu is not identifiable at beta = 0 and is reported as 0
      EXPECT_NEAR(f.mu, beta == 0.0 ? 0.0 : mu, 1e-6) << beta << " " << mu;
    }
}

TEST(Boltzmann, RoundTripTenSites) {
  const auto spec = cell_spectrum(model(10, 10, 1.0), CellKind::system);
  const auto g = gc_expectations(spec, 0.7, 0.3);
  const auto f = fit_gc(spec, g.energy, g.magnetization, 1e-12);
  EXPECT_NEAR(f.beta, 0.7, 1e-6);
  EXPECT_NEAR(f.mu, 0.3, 1e-6);
  EXPECT_NEAR(f.entropy, gc_entropy(spec, 0.7, 0.3), 1e-8);
}

TEST(Boltzmann, ExtremalCells) {
  const auto spec = cell_spectrum(model(4, 4, 1.0), CellKind::system);
  const auto filled = fit_gc(spec, 0.75, 2.0);
  EXPECT_EQ(filled.method, FitMethod::extremal);
  EXPECT_EQ(filled.entropy, 0.0);
  EXPECT_TRUE(filled.converged);
  EXPECT_TRUE(std::isnan(filled.beta));
  const auto empty = fit_gc(spec, 0.75, -2.0);
  EXPECT_EQ(empty.entropy, 0.0);
  EXPECT_EQ(to_string(empty.method), "extremal");
}

TEST(Boltzmann, BathEntropyIsAdditive) {
  const auto spec = cell_spectrum(model(4, 8, 1.0), CellKind::bath_bin);
  const auto empty = fit_gc(spec, 0.75, -2.0);
  const auto g = gc_expectations(spec, 0.4, -0.2);
  const auto warm = fit_gc(spec, g.energy, g.magnetization);
  EXPECT_EQ(bath_entropy({empty, empty}), 0.0);
  EXPECT_NEAR(bath_entropy({empty, warm, empty}), warm.entropy, 1e-15);
}

TEST(Boltzmann, FitLogLine) {
  EXPECT_EQ(fit_log_header(), "t,cell,beta,mu,entropy,residual_e,residual_m,method,iterations");
  GcFit f;
  f.beta = 0.5;
  f.mu = -1.0;
  f.entropy = 2.0;
  f.method = FitMethod::grid;
  f.iterations = 7;
  EXPECT_EQ(fit_log_line(1.5, "bin0", f), "1.5,bin0,0.5,-1,2,0,0,grid,7");
}
