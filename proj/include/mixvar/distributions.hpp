#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "mixvar/errors.hpp"
#include "mixvar/random.hpp"

namespace mixvar {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// E[max(Y, bound)] for Y ~ N(mean, sd^2).
inline double censored_normal_mean(double mean, double sd, double bound) {
  if (sd <= 0.0) return std::max(mean, bound);
  const double alpha = (bound - mean) / sd;
  return bound * normal_cdf(alpha) + mean * normal_cdf(-alpha) + sd * normal_pdf(alpha);
}

// log of the multivariate gamma function Gamma_p(a).
inline double log_multigamma(double a, int p) {
  double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= p; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

/// Log density of the inverse Wishart IW(dof, scale) at x.
inline double inv_wishart_logpdf(const Eigen::MatrixXd& x, double dof, const Eigen::MatrixXd& scale) {
  const int p = static_cast<int>(x.rows());
  Eigen::LLT<Eigen::MatrixXd> lx(x);
  Eigen::LLT<Eigen::MatrixXd> ls(scale);
  if (lx.info() != Eigen::Success) throw NotPositiveDefinite("inverse Wishart argument");
  if (ls.info() != Eigen::Success) throw NotPositiveDefinite("inverse Wishart scale");
  const double logdet_x = 2.0 * Eigen::MatrixXd(lx.matrixL()).diagonal().array().log().sum();
  const double logdet_s = 2.0 * Eigen::MatrixXd(ls.matrixL()).diagonal().array().log().sum();
  const double trace = lx.solve(scale).trace();
  return 0.5 * dof * logdet_s - 0.5 * dof * p * std::numbers::ln2 - log_multigamma(0.5 * dof, p) -
         0.5 * (dof + p + 1) * logdet_x - 0.5 * trace;
}

/// Draw from IW(dof, scale) via the Bartlett decomposition of the Wishart
/// W(dof, scale^{-1}) and inversion.
inline Eigen::MatrixXd inv_wishart_draw(double dof, const Eigen::MatrixXd& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  Eigen::LLT<Eigen::MatrixXd> ls(scale);
  if (ls.info() != Eigen::Success) throw NotPositiveDefinite("inverse Wishart scale");
  // scale^{-1} = U U' with U = L^{-T}.
  const Eigen::MatrixXd L = ls.matrixL();
  const Eigen::MatrixXd U =
      L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    A(i, i) = std::sqrt(rng.chi_square(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  // W = U A A' U'; X = W^{-1} = (U A)^{-T} (U A)^{-1}.
  const Eigen::MatrixXd UA = U * A;
  const Eigen::MatrixXd inv_UA = UA.inverse();
  Eigen::MatrixXd x = inv_UA.transpose() * inv_UA;
  return 0.5 * (x + x.transpose());
}

}  // namespace mixvar
