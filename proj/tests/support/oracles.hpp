#pragma once

// Test-only reference computations. Everything here works on dense
// matrices or brute force and shares no code path with the library
// routines it is used to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/random.hpp"

namespace oracle {

inline Eigen::MatrixXd dense_cholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
    L(j, j) = std::sqrt(s);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double t = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
      L(i, j) = t / L(j, j);
    }
  }
  return L;
}

// Random SPD matrix with the given bandwidth (diagonally dominant).
inline Eigen::MatrixXd random_banded_spd(Eigen::Index n, Eigen::Index bw, mixvar::Rng& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw); j < i; ++j) {
      const double v = rng.uniform() * 2.0 - 1.0;
      a(i, j) = v;
      a(j, i) = v;
    }
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + 0.5 + rng.uniform();
  return a;
}

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditional moments of x_a given x_b = value for x ~ N(mean, cov), by the
// covariance-form (Schur complement) conditioning formula.
inline GaussianMoments condition(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                 const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b,
                                 const Eigen::VectorXd& value) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd saa(na, na), sab(na, nb), sbb(nb, nb);
  Eigen::VectorXd ma(na), mb(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    ma[i] = mean[a[i]];
    for (Eigen::Index j = 0; j < na; ++j) saa(i, j) = cov(a[i], a[j]);
    for (Eigen::Index j = 0; j < nb; ++j) sab(i, j) = cov(a[i], b[j]);
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    mb[i] = mean[b[i]];
    for (Eigen::Index j = 0; j < nb; ++j) sbb(i, j) = cov(b[i], b[j]);
  }
  if (nb == 0) return {ma, saa};
  const Eigen::MatrixXd gain = sab * sbb.inverse();
  return {ma + gain * (value - mb), saa - gain * sab.transpose()};
}

// Rejection sampler for N(mean, cov) restricted to sign[i] * x[i] > 0
// (sign 0 = unrestricted).
inline std::vector<Eigen::VectorXd> rejection_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                                     const Eigen::VectorXi& sign, std::size_t count,
                                                     mixvar::Rng& rng) {
  const Eigen::MatrixXd L = cov.llt().matrixL();
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  while (out.size() < count) {
    const Eigen::VectorXd x = mean + L * rng.normal_vector(mean.size());
    bool ok = true;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (sign[i] != 0 && sign[i] * x[i] <= 0.0) ok = false;
    if (ok) out.push_back(x);
  }
  return out;
}

// Monte Carlo standard error by batch means, robust to autocorrelation.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t m = x.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += x[b * m + i];
    means[b] = s / static_cast<double>(m);
  }
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double v = 0.0;
  for (double b : means) v += (b - mu) * (b - mu);
  v /= static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

inline double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
