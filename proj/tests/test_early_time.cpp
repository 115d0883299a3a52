#include "helpers.hpp"
#include "pagecurve/early_time.hpp"
#include "pagecurve/tebd.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pagecurve;
using namespace testing_support;

TEST(EarlyTime, ClosedFormValues) {
  EXPECT_NEAR(early_s_vn(InitialKind::filled, 0.2), 0.056052, 5e-7);
  EXPECT_NEAR(early_s_vn(InitialKind::filled, 0.2), -0.02 * std::log(0.1) + 0.01, 1e-15);
  EXPECT_NEAR(early_n_bath(InitialKind::filled, 0.2), 0.01, 1e-15);
  EXPECT_NEAR(early_n_bath_var(InitialKind::filled, 0.2), 0.01, 1e-15);
  EXPECT_NEAR(early_n_bath(InitialKind::high_entropy, 0.2), 0.005, 1e-15);
  EXPECT_NEAR(early_n_bath_var(InitialKind::high_entropy, 0.2), 0.005, 1e-15);
  EXPECT_NEAR(early_s_vn(InitialKind::high_entropy, 0.2), 0.005 - 0.01 * std::log(0.2), 1e-15);
}

TEST(EarlyTime, PredictGrid) {
  const auto p = predict(InitialKind::high_entropy, {0.1, 0.2, 0.3});
  ASSERT_EQ(p.s_vn.size(), 3u);
  EXPECT_TRUE(p.s_vn_empirical);
  EXPECT_FALSE(predict(InitialKind::filled, {0.1}).s_vn_empirical);
  EXPECT_NEAR(p.n_bath[2], 0.09 / 8, 1e-15);
}

TEST(EarlyTime, SelfComparisonIsZero) {
  std::vector<TimeSeriesRecord> recs;
  for (int k = 1; k <= 10; ++k) {
    TimeSeriesRecord r;
    r.t = 0.05 * k;
    r.s_vn = early_s_vn(InitialKind::filled, r.t);
    r.n_bath_mean = early_n_bath(InitialKind::filled, r.t);
    r.n_bath_var = k % 2 ? std::nan("") : early_n_bath_var(InitialKind::filled, r.t);
    recs.push_back(r);
  }
  const auto d = compare(InitialKind::filled, recs, 0.1, 0.5);
  EXPECT_EQ(d.samples, 9);
  EXPECT_EQ(d.s_vn, 0.0);
  EXPECT_EQ(d.n_bath, 0.0);
  EXPECT_EQ(d.n_bath_var, 0.0);
}

TEST(EarlyTime, SmallTebdRunAgrees) {
  for (double delta : {0.8, 1.0}) {
    const auto p = model(4, 8, delta);
    const auto g = Geometry::for_model(p);
    const CellLayout cells(p, g);
    auto s = prepare({InitialKind::filled}, p, 32, 0.0);
    std::vector<TimeSeriesRecord> recs;
    evolve(s, make_plan(build_bonds(p), 0.01), 30, 1, [&](int, double t, const MpsState& st, double) {
      auto r = measure(st, p, g, cells, {true, false});
      r.t = t;
      recs.push_back(r);
    });
    const auto d = compare(InitialKind::filled, recs, 0.1, 0.3);
    EXPECT_EQ(d.samples, 21);
    EXPECT_LT(d.s_vn, 0.05);
    EXPECT_LT(d.n_bath, 0.05);
    EXPECT_LT(d.n_bath_var, 0.05);
  }
}
