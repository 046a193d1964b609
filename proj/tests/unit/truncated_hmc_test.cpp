#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "mixvar/truncated_hmc.hpp"
#include "support/oracles.hpp"

namespace mixvar {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

TruncatedGaussian make_target(const Eigen::MatrixXd& precision, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const Eigen::Index bw = precision.rows() - 1;
  return TruncatedGaussian::from_precision(BandedSpd::from_dense(precision, bw), precision * mean, lower, upper);
}

std::vector<Eigen::VectorXd> run(const TruncatedGaussian& g, Eigen::VectorXd start, HmcSampler s, int draws,
                                 std::uint64_t seed) {
  HmcConfig cfg;
  cfg.sampler = s;
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) {
    start = truncated_gaussian_draw(g, start, cfg, rng).state;
    out.push_back(start);
  }
  return out;
}

std::vector<double> coordinate(const std::vector<Eigen::VectorXd>& xs, Eigen::Index i) {
  std::vector<double> c;
  c.reserve(xs.size());
  for (const auto& x : xs) c.push_back(x[i]);
  return c;
}

class BothSamplers : public ::testing::TestWithParam<HmcSampler> {};

TEST_P(BothSamplers, HalfNormalMean) {
  const auto g = make_target(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1),
                             Eigen::VectorXd::Constant(1, inf));
  const auto draws = run(g, Eigen::VectorXd::Constant(1, 1.0), GetParam(), 40000, 17);
  const auto x = coordinate(draws, 0);
  const double se = oracle::batch_means_se(x);
  EXPECT_LT(std::abs(oracle::mean_of(x) - std::sqrt(2.0 / std::numbers::pi)), 3.0 * se)
      << "mean " << oracle::mean_of(x) << " se " << se;
}

TEST_P(BothSamplers, TwoSidedBoxStaysInsideAndMatchesMean) {
  // N(0.4, 1) on [-0.5, 1]: mean = mu + (phi(a) - phi(b)) / (Phi(b) - Phi(a)).
  const double mu = 0.4, lo = -0.5, hi = 1.0;
  const auto g = make_target(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, mu),
                             Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
  const auto draws = run(g, Eigen::VectorXd::Zero(1), GetParam(), 40000, 3);
  const auto x = coordinate(draws, 0);
  for (double v : x) ASSERT_TRUE(v > lo && v < hi);
  const double a = lo - mu, b = hi - mu;
  auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  const double expected = mu + (pdf(a) - pdf(b)) / (oracle::phi_cdf(b) - oracle::phi_cdf(a));
  EXPECT_LT(std::abs(oracle::mean_of(x) - expected), 3.0 * oracle::batch_means_se(x));
}

TEST_P(BothSamplers, UnrestrictedMoments) {
  Eigen::MatrixXd K(3, 3);
  K << 2.0, -0.7, 0.2, -0.7, 1.5, 0.5, 0.2, 0.5, 1.2;
  const Eigen::VectorXd mu = Eigen::Vector3d(0.5, -1.0, 2.0);
  const auto g = make_target(K, mu, Eigen::VectorXd::Constant(3, -inf), Eigen::VectorXd::Constant(3, inf));
  const auto draws = run(g, Eigen::VectorXd::Zero(3), GetParam(), 30000, 5);
  const Eigen::MatrixXd cov = K.inverse();
  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto x = coordinate(draws, i);
    EXPECT_LT(std::abs(oracle::mean_of(x) - mu[i]), 3.0 * oracle::batch_means_se(x)) << "coord " << i;
    std::vector<double> sq;
    for (double v : x) sq.push_back((v - mu[i]) * (v - mu[i]));
    EXPECT_LT(std::abs(oracle::mean_of(sq) - cov(i, i)), 4.0 * oracle::batch_means_se(sq)) << "var " << i;
  }
}

TEST_P(BothSamplers, OrthantMatchesRejectionSampling) {
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 0.6, -0.3, 0.6, 1.5, 0.2, -0.3, 0.2, 0.8;
  const Eigen::VectorXd mu = Eigen::Vector3d(-0.2, 0.3, 0.1);
  const Eigen::VectorXi sign = Eigen::Vector3i(1, -1, 0);
  Eigen::VectorXd lower(3), upper(3);
  lower << 0.0, -inf, -inf;
  upper << inf, 0.0, inf;
  const auto g = make_target(cov.inverse(), mu, lower, upper);
  const auto draws = run(g, Eigen::Vector3d(0.5, -0.5, 0.0), GetParam(), 40000, 11);
  Rng rng(99);
  const auto ref = oracle::rejection_sample(mu, cov, sign, 40000, rng);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto x = coordinate(draws, i);
    const auto r = coordinate(ref, i);
    const double se = std::hypot(oracle::batch_means_se(x), oracle::batch_means_se(r));
    EXPECT_LT(std::abs(oracle::mean_of(x) - oracle::mean_of(r)), 4.0 * se) << "coord " << i;
  }
  for (const auto& x : draws) ASSERT_TRUE(x[0] > 0.0 && x[1] < 0.0);
}

TEST_P(BothSamplers, SameSeedSameDraws) {
  Eigen::MatrixXd K(2, 2);
  K << 1.0, 0.3, 0.3, 1.0;
  const auto g = make_target(K, Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.0, 0.0),
                             Eigen::VectorXd::Constant(2, inf));
  const auto a = run(g, Eigen::Vector2d(1.0, 1.0), GetParam(), 50, 7);
  const auto b = run(g, Eigen::Vector2d(1.0, 1.0), GetParam(), 50, 7);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST_P(BothSamplers, MeanFarOutsideBoxStaysFeasible) {
  // Mean deep in the excluded region: many wall hits, draws must stay
  // strictly inside.
  Rng rng(2);
  const Eigen::Index d = 30;
  const Eigen::MatrixXd a = oracle::random_banded_spd(d, 3, rng);
  BandedSpd K = BandedSpd::from_dense(a, 3);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(d, -3.0);
  const auto g = TruncatedGaussian::from_precision(K, a * mu, Eigen::VectorXd::Zero(d),
                                                   Eigen::VectorXd::Constant(d, inf));
  HmcConfig cfg;
  cfg.sampler = GetParam();
  Eigen::VectorXd y = Eigen::VectorXd::Constant(d, 0.5);
  for (int i = 0; i < 200; ++i) {
    const HmcDraw draw = truncated_gaussian_draw(g, y, cfg, rng);
    ASSERT_FALSE(draw.rejected);
    y = draw.state;
    ASSERT_GT(y.minCoeff(), 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Hmc, BothSamplers, ::testing::Values(HmcSampler::zigzag, HmcSampler::harmonic),
                         [](const auto& info) {
                           return std::string(info.param == HmcSampler::zigzag ? "Zigzag" : "Harmonic");
                         });

TEST(TruncatedHmc, SamplersAgreeOnBandedTarget) {
  Rng rng(31);
  const Eigen::Index d = 6;
  const Eigen::MatrixXd a = oracle::random_banded_spd(d, 2, rng);
  const Eigen::VectorXd mu = rng.normal_vector(d) * 0.5;
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(d, -inf), upper = Eigen::VectorXd::Constant(d, inf);
  lower[0] = 0.0;
  upper[2] = 0.0;
  lower[4] = -0.2;
  const auto g = TruncatedGaussian::from_precision(BandedSpd::from_dense(a, 2), a * mu, lower, upper);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(d);
  start[0] = 0.5;
  start[2] = -0.5;
  const auto z = run(g, start, HmcSampler::zigzag, 30000, 1);
  const auto h = run(g, start, HmcSampler::harmonic, 30000, 2);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto x = coordinate(z, i), y = coordinate(h, i);
    const double se = std::hypot(oracle::batch_means_se(x), oracle::batch_means_se(y));
    EXPECT_LT(std::abs(oracle::mean_of(x) - oracle::mean_of(y)) / se, 4.0) << "coord " << i;
  }
}

TEST(TruncatedHmc, InfeasibleStartThrows) {
  const auto g = make_target(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1),
                             Eigen::VectorXd::Constant(1, inf));
  Rng rng(1);
  EXPECT_THROW(zigzag_hmc_draw(g, Eigen::VectorXd::Constant(1, -1.0), HmcConfig{}, rng), NumericalError);
  EXPECT_THROW(harmonic_hmc_draw(g, Eigen::VectorXd::Zero(1), HmcConfig{}, rng), NumericalError);
}

TEST(TruncatedHmc, MaxBouncesRejectsAndKeepsState) {
  const auto g = make_target(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, -5.0),
                             Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.01));
  HmcConfig cfg;
  cfg.max_bounces = 1;
  cfg.travel_time = 50.0;
  Rng rng(4);
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(1, 0.005);
  const HmcDraw draw = zigzag_hmc_draw(g, start, cfg, rng);
  EXPECT_TRUE(draw.rejected);
  EXPECT_EQ(draw.state, start);
}

TEST(TruncatedHmc, DefaultZigzagTravelTime) {
  BandedSpd K(3, 0);
  K.add(0, 0, 1.0);
  K.add(1, 1, 4.0);
  K.add(2, 2, 100.0);
  EXPECT_NEAR(default_zigzag_travel_time(K), std::numbers::pi / 2.0 * 0.5, 1e-15);
}

TEST(TruncatedHmc, SmallestPositiveRoot) {
  EXPECT_NEAR(detail::smallest_positive_root(1.0, -3.0, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(detail::smallest_positive_root(0.0, 2.0, -4.0), 2.0, 1e-15);
  EXPECT_TRUE(std::isinf(detail::smallest_positive_root(1.0, 0.0, 1.0)));
  EXPECT_NEAR(detail::smallest_positive_root(1.0, 1.0, -2.0), 1.0, 1e-15);
}

}  // namespace
}  // namespace mixvar
