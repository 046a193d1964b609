#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "mixvar/forecast.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace mixvar {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<VariableSpec> specs_bcu() {
  return {{"B", VariableKind::binary, 0.0, Transform::level},
          {"C", VariableKind::censored, 0.0, Transform::level},
          {"U", VariableKind::unrestricted, 0.0, Transform::level}};
}

TEST(PredictiveMoments, WhiteNoise) {
  auto m = ModelParams::zeros(2, 2, 1, 0);
  m.intercept << 0.3, -1.0;
  m.sigma << 1.0, 0.2, 0.2, 0.5;
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Random(2, 2), 4);
  EXPECT_EQ(pm.mean, m.intercept.replicate(4, 1));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  for (int j = 0; j < 4; ++j) expected.block(2 * j, 2 * j, 2, 2) = m.sigma;
  EXPECT_LT((pm.cov - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PredictiveMoments, ScalarAr1ByHand) {
  auto m = ModelParams::zeros(1, 1, 1, 0);
  m.lags(0, 0) = 0.5;
  const double y = 2.0;
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Constant(1, 1, y), 2);
  EXPECT_DOUBLE_EQ(pm.mean[0], 0.5 * y);
  EXPECT_DOUBLE_EQ(pm.mean[1], 0.25 * y);
  Eigen::Matrix2d V;
  V << 1.0, 0.5, 0.5, 1.25;
  EXPECT_LT((pm.cov - V).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PredictiveMoments, FirstBlockMatchesOneStep) {
  Rng rng(2);
  const ModelParams m = fixture::random_params(3, 2, 1, 0, rng);
  const Eigen::MatrixXd hist = Eigen::MatrixXd::Random(2, 3);
  const auto one = predictive_moments(m, hist, 1);
  const auto five = predictive_moments(m, hist, 5);
  EXPECT_EQ(five.mean.head(3), one.mean);
  EXPECT_LT((five.cov.topLeftCorner(3, 3) - one.cov).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((one.mean - conditional_mean(m, hist)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((five.cov - five.cov.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

// Monte Carlo of the VAR recursion itself with 1e6 paths.
TEST(PredictiveMoments, MatchesSimulation) {
  Rng rng(5);
  const ModelParams m = fixture::random_params(2, 2, 1, 0, rng);
  const Eigen::MatrixXd hist = Eigen::MatrixXd::Random(2, 2);
  const auto pm = predictive_moments(m, hist, 3);
  const Eigen::MatrixXd L = m.sigma.llt().matrixL();
  const int paths = 1000000;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(6);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(6, 6);
  for (int k = 0; k < paths; ++k) {
    Eigen::Vector2d y1 = hist.row(1).transpose(), y0 = hist.row(0).transpose();
    Eigen::VectorXd stack(6);
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector2d next = m.intercept + m.lag(1) * y1 + m.lag(2) * y0 + L * rng.normal_vector(2);
      stack.segment(2 * j, 2) = next;
      y0 = y1;
      y1 = next;
    }
    s1 += stack;
    s2 += (stack - pm.mean) * (stack - pm.mean).transpose();
  }
  s1 /= paths;
  s2 /= paths;
  for (int i = 0; i < 6; ++i) {
    EXPECT_LT(std::abs(s1[i] - pm.mean[i]), 3.0 * std::sqrt(pm.cov(i, i) / paths)) << i;
    for (int j = 0; j < 6; ++j) {
      const double se = std::sqrt((pm.cov(i, i) * pm.cov(j, j) + pm.cov(i, j) * pm.cov(i, j)) / paths);
      EXPECT_LT(std::abs(s2(i, j) - pm.cov(i, j)), 3.5 * se) << i << "," << j;
    }
  }
}

TEST(PredictiveMoments, OutlierScalesInflateSteps) {
  auto m = ModelParams::zeros(1, 1, 1, 0);
  m.lags(0, 0) = 0.5;
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Zero(1, 1), 2, Eigen::Vector2d(4.0, 1.0));
  EXPECT_DOUBLE_EQ(pm.cov(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(pm.cov(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(pm.cov(1, 1), 2.0);
}

TEST(DrawPaths, ZeroCovarianceReturnsMean) {
  PredictiveMoments pm{2, 1, Eigen::Vector2d(1.0, -2.0), Eigen::MatrixXd::Zero(2, 2)};
  Rng rng(1);
  const Eigen::MatrixXd p = draw_paths(pm, 5, rng);
  for (Eigen::Index c = 0; c < 5; ++c) EXPECT_EQ(p.col(c), pm.mean);
}

TEST(DrawPaths, SampleMomentsAndDeterminism) {
  Rng rng(3);
  const ModelParams m = fixture::random_params(2, 1, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Ones(1, 2), 3);
  Rng a(11), b(11);
  const Eigen::MatrixXd p = draw_paths(pm, 200000, a);
  EXPECT_EQ(p.leftCols(10), draw_paths(pm, 10, b));
  const Eigen::VectorXd mean = p.rowwise().mean();
  for (Eigen::Index i = 0; i < 6; ++i)
    EXPECT_LT(std::abs(mean[i] - pm.mean[i]), 3.5 * std::sqrt(pm.cov(i, i) / 200000.0));
}

TEST(RecessionProbability, PhiFormula) {
  const auto specs = specs_bcu();
  PredictiveMoments pm{3, 1, Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Matrix3d::Identity() * 4.0};
  EXPECT_DOUBLE_EQ(recession_probability(pm, specs, 0, 1), 0.5);
  pm.mean[0] = 1.96 * 2.0;
  EXPECT_NEAR(recession_probability(pm, specs, 0, 1), 0.975, 1e-4);
  EXPECT_THROW(recession_probability(pm, specs, 1, 1), NonBinaryVariable);
  EXPECT_THROW(recession_probability(pm, specs, 2, 1), NonBinaryVariable);
}

TEST(RecessionProbability, MatchesPositiveFractionOfPaths) {
  Rng rng(7);
  const ModelParams m = fixture::random_params(3, 2, 1, 1, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Random(2, 3), 6);
  const Eigen::MatrixXd p = draw_paths(pm, 100000, rng);
  for (Eigen::Index j = 1; j <= 6; ++j) {
    const double prob = recession_probability(pm, specs_bcu(), 0, j);
    const double frac = (p.row(pm.index(0, j)).array() > 0.0).cast<double>().mean();
    EXPECT_LT(std::abs(frac - prob), 3.0 * std::sqrt(prob * (1 - prob) / 100000.0)) << j;
  }
}

TEST(CensorPaths, AppliesLinks) {
  Eigen::MatrixXd paths(6, 1);
  paths << -1.2, -0.3, 5.0, 0.4, 0.7, -5.0;
  const Eigen::MatrixXd out = censor_paths(paths, specs_bcu());
  Eigen::VectorXd expected(6);
  expected << 0.0, 0.0, 5.0, 1.0, 0.7, -5.0;
  EXPECT_EQ(out.col(0), expected);
}

TEST(HardConditioning, NoRowsEqualsUnconditional) {
  Rng rng(1);
  const ModelParams m = fixture::random_params(2, 1, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Ones(1, 2), 3);
  Rng a(5), b(5);
  EXPECT_EQ(conditional_forecast_hard(pm, Eigen::MatrixXd(0, 6), Eigen::VectorXd(0), 20, a), draw_paths(pm, 20, b));
}

TEST(HardConditioning, AllCoordinatesGivesThePoint) {
  Rng rng(2);
  const ModelParams m = fixture::random_params(2, 1, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Ones(1, 2), 2);
  const Eigen::VectorXd r = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  const Eigen::MatrixXd p = conditional_forecast_hard(pm, Eigen::MatrixXd::Identity(4, 4), r, 50, rng);
  for (Eigen::Index c = 0; c < 50; ++c) EXPECT_LT((p.col(c) - r).cwiseAbs().maxCoeff(), 1e-10);
  const auto cm = condition_moments(pm, Eigen::MatrixXd::Identity(4, 4), r);
  EXPECT_LT(cm.cov.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HardConditioning, BivariateClosedForm) {
  PredictiveMoments pm;
  pm.n = 2;
  pm.horizon = 1;
  pm.mean = Eigen::Vector2d(1.0, -0.5);
  pm.cov.resize(2, 2);
  pm.cov << 2.0, 0.6, 0.6, 1.5;
  Eigen::MatrixXd R(1, 2);
  R << 1.0, 0.0;
  const Eigen::VectorXd r = Eigen::VectorXd::Constant(1, 2.5);
  const auto cm = condition_moments(pm, R, r);
  EXPECT_NEAR(cm.mean[1], -0.5 + 0.6 / 2.0 * (2.5 - 1.0), 1e-10);
  EXPECT_NEAR(cm.cov(1, 1), 1.5 - 0.36 / 2.0, 1e-10);
  EXPECT_NEAR(cm.mean[0], 2.5, 1e-10);
  Rng rng(4);
  const Eigen::MatrixXd p = conditional_forecast_hard(pm, R, r, 100000, rng);
  EXPECT_LT((p.row(0).array() - 2.5).abs().maxCoeff(), 1e-10);
  const double mean = p.row(1).mean();
  EXPECT_LT(std::abs(mean - cm.mean[1]), 3.0 * std::sqrt(cm.cov(1, 1) / 100000.0));
}

TEST(HardConditioning, LinearCombinationRows) {
  Rng rng(8);
  const ModelParams m = fixture::random_params(3, 2, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Random(2, 3), 4);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 12);
  R(0, pm.index(2, 1)) = 1.0;
  R(0, pm.index(1, 1)) = -1.0;  // spread
  R(1, pm.index(0, 4)) = 1.0;
  const Eigen::VectorXd r = Eigen::Vector2d(0.5, -1.0);
  const Eigen::MatrixXd p = conditional_forecast_hard(pm, R, r, 1000, rng);
  for (Eigen::Index c = 0; c < p.cols(); ++c) ASSERT_LT((R * p.col(c) - r).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HardConditioning, Errors) {
  PredictiveMoments pm{2, 1, Eigen::Vector2d(0.0, 1.0), Eigen::Matrix2d::Identity()};
  pm.cov(1, 1) = 0.0;
  Rng rng(1);
  Eigen::MatrixXd dup(2, 2);
  dup << 1.0, 0.0, 2.0, 0.0;
  EXPECT_THROW(conditional_forecast_hard(pm, dup, Eigen::Vector2d(1.0, 2.0), 1, rng), RankDeficientRestriction);
  Eigen::MatrixXd sel(1, 2);
  sel << 0.0, 1.0;
  EXPECT_THROW(conditional_forecast_hard(pm, sel, Eigen::VectorXd::Constant(1, 3.0), 1, rng), InfeasibleRestriction);
  EXPECT_NO_THROW(conditional_forecast_hard(pm, sel, Eigen::VectorXd::Constant(1, 1.0), 1, rng));
}

// Tower property: averaging the hard-conditional probability over r drawn
// from the marginal of R y recovers the unconditional probability.
TEST(HardConditioning, TowerProperty) {
  Rng rng(12);
  const ModelParams m = fixture::random_params(3, 1, 1, 1, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Random(1, 3), 3);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(1, 9);
  R(0, pm.index(2, 1)) = 1.0;
  const double uncond = recession_probability(pm, specs_bcu(), 0, 3);
  const int draws = 100000;
  std::vector<double> probs;
  const double sd = std::sqrt(pm.cov(pm.index(2, 1), pm.index(2, 1)));
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd r = Eigen::VectorXd::Constant(1, pm.mean[pm.index(2, 1)] + sd * rng.normal());
    probs.push_back(recession_probability(condition_moments(pm, R, r), specs_bcu(), 0, 3));
  }
  EXPECT_LT(std::abs(oracle::mean_of(probs) - uncond), 3.0 * oracle::batch_means_se(probs));
}

TEST(SoftConditioning, UnboundedMatchesUnconditional) {
  Rng rng(3);
  const ModelParams m = fixture::random_params(2, 1, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Ones(1, 2), 2);
  ForecastRestrictions res = ForecastRestrictions::none(4);
  res.soft = Eigen::MatrixXd::Identity(4, 4).topRows(2);
  res.lower = Eigen::VectorXd::Constant(2, -inf);
  res.upper = Eigen::VectorXd::Constant(2, inf);
  const Eigen::MatrixXd p = conditional_forecast_soft(pm, res, 50000, rng);
  for (Eigen::Index i = 0; i < 4; ++i) {
    std::vector<double> xs;
    for (Eigen::Index c = 0; c < p.cols(); ++c) xs.push_back(p(i, c));
    EXPECT_LT(std::abs(oracle::mean_of(xs) - pm.mean[i]), 3.0 * oracle::batch_means_se(xs)) << i;
  }
}

TEST(SoftConditioning, HalfNormal) {
  PredictiveMoments pm{1, 1, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  ForecastRestrictions res = ForecastRestrictions::none(1);
  res.soft = Eigen::MatrixXd::Identity(1, 1);
  res.lower = Eigen::VectorXd::Zero(1);
  res.upper = Eigen::VectorXd::Constant(1, inf);
  Rng rng(6);
  const Eigen::MatrixXd p = conditional_forecast_soft(pm, res, 60000, rng);
  std::vector<double> x(p.data(), p.data() + p.size());
  EXPECT_GT(*std::min_element(x.begin(), x.end()), 0.0);
  EXPECT_LT(std::abs(oracle::mean_of(x) - std::sqrt(2.0 / std::numbers::pi)), 3.0 * oracle::batch_means_se(x));
}

TEST(SoftConditioning, NarrowBoxMatchesTruncatedNormal) {
  PredictiveMoments pm{1, 1, Eigen::VectorXd::Constant(1, 0.3), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  ForecastRestrictions res = ForecastRestrictions::none(1);
  res.soft = Eigen::MatrixXd::Identity(1, 1);
  res.lower = Eigen::VectorXd::Constant(1, 0.2);
  res.upper = Eigen::VectorXd::Constant(1, 0.5);
  Rng rng(9);
  const Eigen::MatrixXd p = conditional_forecast_soft(pm, res, 60000, rng);
  std::vector<double> x(p.data(), p.data() + p.size()), sq;
  for (double v : x) ASSERT_TRUE(v >= 0.2 && v <= 0.5);
  const double sd = std::sqrt(2.0);
  const double a = (0.2 - 0.3) / sd, b = (0.5 - 0.3) / sd;
  const double z = oracle::phi_cdf(b) - oracle::phi_cdf(a);
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  const double mean = 0.3 + sd * (phi(a) - phi(b)) / z;
  const double var = 2.0 * (1.0 + (a * phi(a) - b * phi(b)) / z - std::pow((phi(a) - phi(b)) / z, 2));
  for (double v : x) sq.push_back((v - mean) * (v - mean));
  EXPECT_LT(std::abs(oracle::mean_of(x) - mean), 3.0 * oracle::batch_means_se(x));
  EXPECT_LT(std::abs(oracle::mean_of(sq) - var), 3.0 * oracle::batch_means_se(sq));
}

TEST(SoftConditioning, MixedHardAndSoftRespectBoth) {
  Rng rng(10);
  const ModelParams m = fixture::random_params(3, 2, 1, 0, rng);
  const auto pm = predictive_moments(m, Eigen::MatrixXd::Random(2, 3), 4);
  ForecastRestrictions res = ForecastRestrictions::none(12);
  res.hard = Eigen::MatrixXd::Zero(1, 12);
  res.hard(0, pm.index(2, 1)) = 1.0;
  res.values = Eigen::VectorXd::Constant(1, 0.7);
  res.soft = Eigen::MatrixXd::Zero(3, 12);
  for (Eigen::Index j = 2; j <= 4; ++j) res.soft(j - 2, pm.index(1, j)) = 1.0;
  res.lower = Eigen::Vector3d(-inf, 0.0, -0.5);
  res.upper = Eigen::Vector3d(0.0, inf, 0.5);
  const Eigen::MatrixXd p = conditional_forecast_soft(pm, res, 2000, rng);
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    ASSERT_LT(std::abs(p(pm.index(2, 1), c) - 0.7), 1e-10);
    const Eigen::VectorXd z = res.soft * p.col(c);
    for (Eigen::Index k = 0; k < 3; ++k) ASSERT_TRUE(z[k] >= res.lower[k] - 1e-10 && z[k] <= res.upper[k] + 1e-10);
  }
}

TEST(SoftConditioning, EmptyBoxThrows) {
  PredictiveMoments pm{1, 1, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  ForecastRestrictions res = ForecastRestrictions::none(1);
  res.soft = Eigen::MatrixXd::Identity(1, 1);
  res.lower = Eigen::VectorXd::Constant(1, 1.0);
  res.upper = Eigen::VectorXd::Constant(1, 0.5);
  Rng rng(1);
  EXPECT_THROW(conditional_forecast_soft(pm, res, 10, rng), EmptyFeasibleSet);
}

TEST(Restrictions, StandardizeMapsOriginalUnits) {
  StandardizationState st{Eigen::Vector2d(1.0, 10.0), Eigen::Vector2d(2.0, 5.0)};
  ForecastRestrictions res = ForecastRestrictions::none(4);
  res.hard = Eigen::MatrixXd::Zero(1, 4);
  res.hard(0, 3) = 1.0;  // variable 1 at horizon 2
  res.values = Eigen::VectorXd::Constant(1, 20.0);
  res.soft = Eigen::MatrixXd::Zero(1, 4);
  res.soft(0, 0) = 1.0;
  res.lower = Eigen::VectorXd::Constant(1, 3.0);
  res.upper = Eigen::VectorXd::Constant(1, inf);
  const auto s = standardize_restrictions(res, st, 2);
  // y_std = 2 maps to 20 in original units.
  EXPECT_DOUBLE_EQ(s.values[0] / s.hard(0, 3), 2.0);
  EXPECT_DOUBLE_EQ(s.lower[0] / s.soft(0, 0), 1.0);
  EXPECT_TRUE(std::isinf(s.upper[0]));
}

}  // namespace
}  // namespace mixvar
