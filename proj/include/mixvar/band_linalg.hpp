#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mixvar/errors.hpp"

namespace mixvar {

namespace detail {

// Lower-band storage shared by BandedSpd and BandedLower. Entry (i, j) with
// 0 <= i - j <= bandwidth lives at bands(i - j, j): row k of `bands` is the
// k-th sub-diagonal, so each column of `bands` holds one column of the band.
class LowerBandStorage {
 public:
  LowerBandStorage() = default;
  LowerBandStorage(Eigen::Index dim, Eigen::Index bandwidth)
      : bands_(Eigen::MatrixXd::Zero(bandwidth + 1, dim)) {}

  Eigen::Index dim() const { return bands_.cols(); }
  Eigen::Index bandwidth() const { return bands_.rows() - 1; }

  // Element of the lower triangle; zero outside the band.
  double lower(Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index k = i - j;
    if (k < 0 || k > bandwidth()) return 0.0;
    return bands_(k, j);
  }

  // Mutable reference to (i, j); requires 0 <= i - j <= bandwidth.
  double& lower_ref(Eigen::Index i, Eigen::Index j) { return bands_(i - j, j); }

  const Eigen::MatrixXd& bands() const { return bands_; }
  Eigen::MatrixXd& bands() { return bands_; }

 protected:
  Eigen::MatrixXd bands_;
};

}  // namespace detail

/// Symmetric positive-definite matrix stored as its lower band.
class BandedSpd : public detail::LowerBandStorage {
 public:
  BandedSpd() = default;
  BandedSpd(Eigen::Index dim, Eigen::Index bandwidth)
      : LowerBandStorage(dim, bandwidth) {}

  double operator()(Eigen::Index i, Eigen::Index j) const {
    return i >= j ? lower(i, j) : lower(j, i);
  }

  // Adds v at (i, j) and, implicitly, at (j, i).
  void add(Eigen::Index i, Eigen::Index j, double v) {
    if (i < j) std::swap(i, j);
    lower_ref(i, j) += v;
  }

  double max_diagonal() const {
    return dim() == 0 ? 0.0 : bands_.row(0).cwiseAbs().maxCoeff();
  }

  Eigen::VectorXd diagonal() const { return bands_.row(0).transpose(); }

  Eigen::MatrixXd to_dense() const {
    const Eigen::Index n = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k <= bandwidth() && j + k < n; ++k) {
        out(j + k, j) = bands_(k, j);
        out(j, j + k) = bands_(k, j);
      }
    }
    return out;
  }

  // Takes the lower band of a dense symmetric matrix; entries outside the
  // band are dropped.
  static BandedSpd from_dense(const Eigen::MatrixXd& m, Eigen::Index bandwidth) {
    const Eigen::Index n = m.rows();
    BandedSpd out(n, std::min<Eigen::Index>(bandwidth, std::max<Eigen::Index>(n - 1, 0)));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k <= out.bandwidth() && j + k < n; ++k)
        out.bands_(k, j) = m(j + k, j);
    return out;
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw DimensionMismatch("banded multiply");
    const Eigen::Index n = dim();
    const Eigen::Index bw = bandwidth();
    Eigen::VectorXd y = bands_.row(0).transpose().cwiseProduct(x);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index kmax = std::min(bw, n - 1 - j);
      for (Eigen::Index k = 1; k <= kmax; ++k) {
        const double v = bands_(k, j);
        y[j + k] += v * x[j];
        y[j] += v * x[j + k];
      }
    }
    return y;
  }
};

/// Lower-triangular band factor with a strictly positive diagonal.
class BandedLower : public detail::LowerBandStorage {
 public:
  BandedLower() = default;
  BandedLower(Eigen::Index dim, Eigen::Index bandwidth)
      : LowerBandStorage(dim, bandwidth) {}

  double operator()(Eigen::Index i, Eigen::Index j) const { return lower(i, j); }

  Eigen::MatrixXd to_dense() const {
    const Eigen::Index n = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k <= bandwidth() && j + k < n; ++k)
        out(j + k, j) = bands_(k, j);
    return out;
  }

  // sum of log diagonal entries, i.e. half the log determinant of L L'.
  double log_diag_sum() const { return bands_.row(0).array().log().sum(); }
};

enum class SolveMode { forward, backward, full };

// Relative pivot threshold below which factorization reports failure.
inline constexpr double kPivotTolerance = 1e-12;

/// Banded Cholesky factorization K = L L'. Cost O(dim * bandwidth^2).
inline BandedLower band_cholesky(const BandedSpd& K) {
  const Eigen::Index n = K.dim();
  const Eigen::Index bw = K.bandwidth();
  BandedLower L(n, bw);
  if (n == 0) return L;
  Eigen::MatrixXd& w = L.bands();
  w = K.bands();
  const double threshold = kPivotTolerance * K.max_diagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = w(0, j);
    if (!(pivot > threshold)) {
      throw NotPositiveDefinite("pivot " + std::to_string(pivot) + " at index " +
                                std::to_string(j));
    }
    const double l = std::sqrt(pivot);
    w(0, j) = l;
    const Eigen::Index kmax = std::min(bw, n - 1 - j);
    for (Eigen::Index k = 1; k <= kmax; ++k) w(k, j) /= l;
    // Rank-one update of the trailing band.
    for (Eigen::Index a = 1; a <= kmax; ++a) {
      const double la = w(a, j);
      if (la == 0.0) continue;
      for (Eigen::Index b = a; b <= kmax; ++b) w(b - a, j + a) -= w(b, j) * la;
    }
  }
  return L;
}

inline Eigen::VectorXd band_solve(const BandedLower& L, const Eigen::VectorXd& b,
                                  SolveMode mode) {
  const Eigen::Index n = L.dim();
  if (b.size() != n) throw DimensionMismatch("band_solve: rhs has size " +
                                             std::to_string(b.size()) + ", factor has " +
                                             std::to_string(n));
  const Eigen::Index bw = L.bandwidth();
  const Eigen::MatrixXd& w = L.bands();
  Eigen::VectorXd x = b;
  if (mode == SolveMode::forward || mode == SolveMode::full) {
    for (Eigen::Index j = 0; j < n; ++j) {
      x[j] /= w(0, j);
      const double xj = x[j];
      const Eigen::Index kmax = std::min(bw, n - 1 - j);
      for (Eigen::Index k = 1; k <= kmax; ++k) x[j + k] -= w(k, j) * xj;
    }
  }
  if (mode == SolveMode::backward || mode == SolveMode::full) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      double s = x[j];
      const Eigen::Index kmax = std::min(bw, n - 1 - j);
      for (Eigen::Index k = 1; k <= kmax; ++k) s -= w(k, j) * x[j + k];
      x[j] = s / w(0, j);
    }
  }
  return x;
}

/// Draw from N(mu, K^{-1}) where K mu = linear_term, given standard-normal
/// noise: returns mu + L'^{-1} noise.
inline Eigen::VectorXd band_gaussian_draw(const BandedLower& L,
                                          const Eigen::VectorXd& linear_term,
                                          const Eigen::VectorXd& noise) {
  if (noise.size() != L.dim()) throw DimensionMismatch("band_gaussian_draw noise");
  Eigen::VectorXd mu = band_solve(L, linear_term, SolveMode::full);
  return mu + band_solve(L, noise, SolveMode::backward);
}

inline Eigen::VectorXd band_gaussian_draw(const BandedSpd& K,
                                          const Eigen::VectorXd& linear_term,
                                          const Eigen::VectorXd& noise) {
  return band_gaussian_draw(band_cholesky(K), linear_term, noise);
}

}  // namespace mixvar
