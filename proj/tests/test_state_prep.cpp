#include "helpers.hpp"
#include "pagecurve/state_prep.hpp"

#include <gtest/gtest.h>

using namespace pagecurve;
using namespace testing_support;

TEST(StatePrep, KindNames) {
  EXPECT_EQ(parse_initial_kind("filled"), InitialKind::filled);
  EXPECT_EQ(parse_initial_kind("high_entropy"), InitialKind::high_entropy);
  EXPECT_EQ(to_string(InitialKind::high_entropy), "high_entropy");
  EXPECT_THROW(parse_initial_kind("neel"), std::invalid_argument);
}

TEST(StatePrep, FilledChainAndLadder) {
  for (const auto& p : {model(4, 6, 1.0), model(4, 6, 1.0, 1.0), model(3, 5, 0.8)}) {
    const auto s = prepare({InitialKind::filled}, p);
    EXPECT_EQ(s.local_dim(), Geometry::for_model(p).local_dim());
    EXPECT_TRUE(s.conserves_charge());
    EXPECT_LT((s.to_dense() - ed::product_vector(filled_pattern(p))).norm(), 1e-15);
  }
}

TEST(StatePrep, HaarUnitaryIsUnitaryAndDeterministic) {
  std::mt19937_64 a(99), b(99), c(100);
  const CMatrix u = haar_unitary(a, 4);
  EXPECT_LT(unitarity_defect(u), 1e-13);
  EXPECT_LT((u - haar_unitary(b, 4)).norm(), 1e-15);
  EXPECT_GT((u - haar_unitary(c, 4)).norm(), 1e-3);
}

TEST(StatePrep, HaarMoments) {
  // E|U_ij|^2 = 1/d and E|U_ij|^4 = 2/(d(d+1)) for the Haar measure.
  std::mt19937_64 rng(2024);
  const int d = 4, samples = 20000;
  double m2 = 0.0, m4 = 0.0;
  Complex phase_mean = 0.0;
  for (int k = 0; k < samples; ++k) {
    const CMatrix u = haar_unitary(rng, d);
    const double w = std::norm(u(1, 2));
    m2 += w;
    m4 += w * w;
    phase_mean += u(0, 0) / std::abs(u(0, 0));
  }
  m2 /= samples;
  m4 /= samples;
  EXPECT_NEAR(m2, 0.25, 0.005);
  EXPECT_NEAR(m4, 0.1, 0.004);
  EXPECT_LT(std::abs(phase_mean) / samples, 0.03);
}

TEST(StatePrep, HighEntropyVector) {
  const CVector v = high_entropy_system_vector(6, 6, 5);
  EXPECT_NEAR(v.norm(), 1.0, 1e-13);
  EXPECT_LT((v - high_entropy_system_vector(6, 6, 5)).norm(), 1e-15);
  EXPECT_GT((v - high_entropy_system_vector(6, 6, 6)).norm(), 1e-2);
  EXPECT_GT(ed::bipartite_entropy(v, 6, 3), 1.0);
  // depth 1 acts on bonds (0,1), (2,3), (4,5) only, so the middle cut stays unentangled
  EXPECT_NEAR(ed::bipartite_entropy(high_entropy_system_vector(6, 1, 5), 6, 2), 0.0, 1e-12);
  EXPECT_THROW(high_entropy_system_vector(6, 0, 1), std::invalid_argument);
}

TEST(StatePrep, HighEntropyMpsMatchesDense) {
  for (const auto& p : {model(4, 6, 1.0), model(4, 6, 1.0, 1.0)}) {
    const auto s = prepare({InitialKind::high_entropy, 3, 0}, p, 64, 0.0);
    const CVector sys = high_entropy_system_vector(4, 4, 3);
    const CVector bath = ed::product_vector(std::vector<bool>(6, false));
    EXPECT_LT((s.to_dense() - kron(sys, bath)).norm(), 1e-12);
    EXPECT_NEAR(entanglement_entropy(s, Geometry::for_model(p).cut_bond()), 0.0, 1e-12);
  }
}

TEST(StatePrep, FillingWarnings) {
  const auto p = model(6, 6, 1.0);
  int warned = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::vector<std::string> w;
    prepare({InitialKind::high_entropy, seed, 0}, p, 64, 0.0, &w);
    warned += w.empty() ? 0 : 1;
    if (!w.empty()) EXPECT_NE(w.front().find("seed " + std::to_string(seed)), std::string::npos);
  }
  EXPECT_LT(warned, 40);
}

TEST(StatePrep, ChiTooSmall) {
  EXPECT_THROW(prepare({InitialKind::high_entropy, 1, 0}, model(8, 8, 1.0), 4), std::invalid_argument);
}
