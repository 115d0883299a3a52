#include "pagecurve/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pagecurve;

namespace {

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = a + (b - a) * k / (n - 1);
  return t;
}

}  // namespace

TEST(Analysis, ExactPowerLaw) {
  const auto t = grid(1.0, 10.0, 50);
  std::vector<double> y;
  for (double x : t) y.push_back(0.5 * std::pow(x, 0.3));
  const auto f = fit_power_law(t, y, 2.0, 8.0, "s_vn");
  EXPECT_NEAR(f.exponent, 0.3, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(0.5), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_LT(f.stderr_, 1e-10);
  EXPECT_EQ(f.quantity, "s_vn");
  EXPECT_EQ(f.samples, 33);
}

TEST(Analysis, NoisyQuadratic) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto t = grid(1.0, 20.0, 200);
  std::vector<double> y;
  for (double x : t) y.push_back(3.0 * x * x * (1.0 + noise(rng)));
  const auto f = fit_power_law(t, y, 1.0, 20.0);
  EXPECT_NEAR(f.exponent, 2.0, 3 * f.stderr_ + 1e-3);
  EXPECT_GT(f.stderr_, 0.0);
  EXPECT_LT(f.stderr_, 0.01);
}

TEST(Analysis, FitErrors) {
  const std::vector<double> t = {1, 2, 3, 4};
  EXPECT_THROW(fit_power_law(t, {1, 2, 3, 4}, 3.5, 4.0), std::invalid_argument);
  EXPECT_THROW(fit_power_law(t, {1, 2, 3, 4}, 4.0, 1.0), std::invalid_argument);
  EXPECT_THROW(fit_power_law(t, {0, -1, 3, 4}, 1.0, 4.0), std::invalid_argument);
}

TEST(Analysis, MovingAverage) {
  const auto m = moving_average({1, 2, 3, 4, 5}, 1);
  EXPECT_EQ(m, (std::vector<double>{1.5, 2, 3, 4, 4.5}));
  EXPECT_EQ(moving_average({2, 4}, 0), (std::vector<double>{2, 4}));
}

TEST(Analysis, TrianglePage) {
  const auto t = grid(0.0, 40.0, 401);
  std::vector<double> s, n;
  for (double x : t) {
    s.push_back(x < 10.0 ? x : 100.0 / x);
    n.push_back(6.0 - std::min(x, 10.0) * 0.3);
  }
  const auto r = detect_page(t, s, n);
  ASSERT_TRUE(r.has_page);
  EXPECT_NEAR(r.t_page, 10.0, 0.11);
  EXPECT_NEAR(r.escaped_fraction, 0.5, 0.01);
  ASSERT_TRUE(r.decay.has_value());
  EXPECT_NEAR(r.decay->exponent, -1.0, 1e-3);
}

TEST(Analysis, MonotoneGrowthHasNoPage) {
  const auto t = grid(0.0, 10.0, 101);
  std::vector<double> s;
  for (double x : t) s.push_back(std::sqrt(x));
  const auto r = detect_page(t, s);
  EXPECT_FALSE(r.has_page);
  EXPECT_FALSE(r.decay.has_value());
}

TEST(Analysis, SummaryTable) {
  SeriesColumns c;
  c.t = grid(0.0, 20.0, 201);
  for (double x : c.t) {
    c.s_vn.push_back(std::pow(x, 0.3));
    c.n_bath_mean.push_back(0.25 * x * x);
    c.n_bath_var.push_back(std::pow(x, 1.5));
    c.n_sys.push_back(10.0 - 0.25 * x);
  }
  const auto s = summarize("run", c);
  EXPECT_FALSE(s.page.has_page);
  ASSERT_EQ(s.growth.size(), 3u);
  EXPECT_NEAR(s.growth[0].exponent, 0.3, 1e-10);
  EXPECT_NEAR(s.growth[0].t_lo, 2.0, 1e-12);
  EXPECT_NEAR(s.growth[0].t_hi, 20.0, 1e-12);
  const auto narrow = summarize("run", c, 4.0, 8.0);
  EXPECT_NEAR(narrow.growth[1].exponent, 1.5, 1e-10);
  const std::string table = format_summary({s, narrow});
  EXPECT_NE(table.find("s_vn"), std::string::npos);
  EXPECT_NE(table.find("decay_exponent"), std::string::npos);
  EXPECT_NE(table.find("0.3"), std::string::npos);
}
