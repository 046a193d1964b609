#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mixvar/metrics.hpp"
#include "mixvar/random.hpp"

namespace mixvar {
namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& o) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (o[i] == 1 && o[j] == 0) {
        pairs += 1.0;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return num / pairs;
}

double brute_crps(const std::vector<double>& x, double y, bool fair) {
  double a = 0.0, b = 0.0;
  const double m = static_cast<double>(x.size());
  for (double xi : x) {
    a += std::abs(xi - y);
    for (double xj : x) b += std::abs(xi - xj);
  }
  return a / m - 0.5 * b / (fair ? m * (m - 1.0) : m * m);
}

// Closed form for N(mu, sigma^2).
double gaussian_crps(double mu, double sigma, double y) {
  const double z = (y - mu) / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

TEST(RocAuc, Examples) {
  EXPECT_EQ(roc_auc({0.9, 0.4, 0.6, 0.5}, {1, 0, 1, 0}), 1.0);
  EXPECT_EQ(roc_auc({0.9, 0.8, 0.6, 0.5}, {1, 0, 1, 0}), 0.75);
  EXPECT_EQ(roc_auc({0.3, 0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0, 0}), 0.5);
  EXPECT_EQ(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_EQ(roc_auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}), 0.0);
}

TEST(RocAuc, Errors) {
  EXPECT_THROW(roc_auc({0.1, 0.2}, {1, 1}), SingleClass);
  EXPECT_THROW(roc_auc({}, {}), SingleClass);
  EXPECT_THROW(roc_auc({0.1}, {1, 0}), DimensionMismatch);
}

TEST(RocAuc, MatchesPairCountingExactly) {
  Rng rng(11);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 999.0);
    std::vector<double> s(m);
    std::vector<int> o(m);
    // Coarse grid forces many ties.
    const double grid = rep % 2 == 0 ? 20.0 : 1e6;
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = std::floor(rng.uniform() * grid) / grid;
      o[i] = rng.uniform() < 0.3 ? 1 : 0;
    }
    o[0] = 1;
    o[1] = 0;
    EXPECT_EQ(roc_auc(s, o), brute_auc(s, o)) << "m=" << m;
  }
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
  Rng rng(12);
  std::vector<double> s(300), t(300);
  std::vector<int> o(300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::round(rng.normal() * 4.0) / 4.0;
    t[i] = std::exp(3.0 * s[i]) - 7.0;
    o[i] = rng.uniform() < 0.5 + 0.1 * s[i] ? 1 : 0;
  }
  EXPECT_EQ(roc_auc(s, o), roc_auc(t, o));
}

TEST(CrpsSample, Examples) {
  EXPECT_EQ(crps_sample({1.5, 1.5, 1.5}, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(crps_sample({0.0, 2.0}, 1.0, CrpsEstimator::plain), 0.5);
  EXPECT_DOUBLE_EQ(crps_sample({0.0, 2.0}, 1.0, CrpsEstimator::fair), 0.0);
  EXPECT_THROW(crps_sample({1.0}, 0.0), TooFewDraws);
  EXPECT_THROW(crps_sample({}, 0.0), TooFewDraws);
}

TEST(CrpsSample, SortedFormMatchesPairwise) {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(50 + rep);
    for (double& v : x) v = rng.normal() * 2.0 + 1.0;
    const double y = rng.normal();
    EXPECT_NEAR(crps_sample(x, y, CrpsEstimator::fair), brute_crps(x, y, true), 1e-12);
    EXPECT_NEAR(crps_sample(x, y, CrpsEstimator::plain), brute_crps(x, y, false), 1e-12);
  }
}

TEST(CrpsSample, GaussianClosedForm) {
  EXPECT_NEAR(gaussian_crps(0.0, 1.0, 0.0), 0.2337, 1e-4);
  Rng rng(14);
  std::vector<double> x(100000);
  for (double& v : x) v = rng.normal();
  for (double y : {0.0, 0.7, -2.0}) {
    EXPECT_NEAR(crps_sample(x, y), gaussian_crps(0.0, 1.0, y), 1e-2);
    EXPECT_NEAR(crps_sample(x, y, CrpsEstimator::plain), gaussian_crps(0.0, 1.0, y), 1e-2);
  }
}

TEST(CrpsSample, NonNegativeAndMinimizedInsideSupport) {
  Rng rng(15);
  std::vector<double> x(200);
  for (double& v : x) v = rng.normal() + 3.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double best_y = 0.0, best = 1e300;
  for (double y = -5.0; y <= 10.0; y += 0.01) {
    const double c = crps_sample(x, y, CrpsEstimator::plain);
    ASSERT_GE(c, 0.0);
    if (c < best) {
      best = c;
      best_y = y;
    }
  }
  EXPECT_GE(best_y, *lo);
  EXPECT_LE(best_y, *hi);
}

TEST(ScoreTable, Ratios) {
  std::vector<ScoreRecord> s{
      {"VAR", "d", "IP", 1, "all", 2.0}, {"VAR", "d", "IP", 1, "all", 4.0}, {"ProVAR", "d", "IP", 1, "all", 1.5},
      {"ProVAR", "d", "IP", 1, "all", 1.5}, {"ToVAR", "d", "IP", 1, "all", 6.0}, {"VAR", "d", "IP", 12, "all", 5.0},
      {"ProVAR", "d", "IP", 12, "all", 2.5}, {"ToVAR", "d", "IP", 12, "all", 5.0}};
  const auto t = score_table(s, "VAR");
  ASSERT_EQ(t.size(), 6u);
  auto find = [&](const std::string& m, int h) {
    for (const auto& c : t)
      if (c.model == m && c.horizon == h) return c;
    ADD_FAILURE() << m << " " << h;
    return ScoreCell{};
  };
  EXPECT_DOUBLE_EQ(find("VAR", 1).ratio, 1.0);
  EXPECT_DOUBLE_EQ(find("VAR", 1).mean, 3.0);
  EXPECT_EQ(find("VAR", 1).count, 2u);
  EXPECT_DOUBLE_EQ(find("ProVAR", 1).ratio, 0.5);
  EXPECT_DOUBLE_EQ(find("ToVAR", 1).ratio, 2.0);
  EXPECT_DOUBLE_EQ(find("ProVAR", 12).ratio, 0.5);
  EXPECT_DOUBLE_EQ(find("ToVAR", 12).ratio, 1.0);

  s.push_back({"ProVAR", "d", "UR", 1, "all", 1.0});
  EXPECT_THROW(score_table(s, "VAR"), MissingBenchmark);
}

}  // namespace
}  // namespace mixvar
