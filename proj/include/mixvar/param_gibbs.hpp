#pragma once

#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mixvar/distributions.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/model.hpp"
#include "mixvar/random.hpp"

namespace mixvar {

struct PriorConfig {
  double intercept_variance = 100.0;
  // Beta prior of the outlier probability.
  double outlier_a = 2.0;
  double outlier_b = 38.0;
  int outlier_max_scale = 10;
};

// Regressor matrix for the likelihood rows of a complete (T + P) x n data
// matrix: row t is (y_{t-1}', ..., y_{t-P}', 1).
inline Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& y, Eigen::Index P) {
  const Eigen::Index n = y.cols();
  const Eigen::Index T = y.rows() - P;
  Eigen::MatrixXd X(T, n * P + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index p = 1; p <= P; ++p) X.block(t, (p - 1) * n, 1, n) = y.row(t + P - p);
    X(t, n * P) = 1.0;
  }
  return X;
}

/// Equation-by-equation draw of (A_1..A_P, a). Each equation's row of
/// coefficients is drawn from its exact Gaussian conditional given the
/// other rows, which enter through the off-diagonal elements of
/// Sigma^{-1}; together the sweep leaves the joint conditional invariant.
inline void sample_coefficients(const Eigen::MatrixXd& y, ModelParams& m, const PriorConfig& prior,
                                Rng& rng) {
  const Eigen::Index n = m.n();
  const Eigen::Index P = m.lag_order();
  const Eigen::Index T = y.rows() - P;
  const Eigen::Index k = n * P + 1;
  const Eigen::MatrixXd X = lagged_design(y, P);
  const Eigen::MatrixXd Y = y.bottomRows(T);
  const Eigen::VectorXd w = m.outlier.cwiseInverse();
  const Eigen::MatrixXd WX = w.asDiagonal() * X;
  const Eigen::MatrixXd XtWX = X.transpose() * WX;

  Eigen::LLT<Eigen::MatrixXd> sl(m.sigma);
  if (sl.info() != Eigen::Success) throw NotPositiveDefinite("Sigma in coefficient step");
  const Eigen::MatrixXd omega = sl.solve(Eigen::MatrixXd::Identity(n, n));

  // Coefficient matrix B (n x k): row i = (A_1(i,:), ..., A_P(i,:), a_i).
  Eigen::MatrixXd B(n, k);
  B << m.lags, m.intercept;
  Eigen::MatrixXd E = Y - X * B.transpose();

  const double tau2 = m.global_scale * m.global_scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd prec = omega(i, i) * XtWX;
    for (Eigen::Index c = 0; c < n * P; ++c) {
      const double lam = m.local_scale(i, c);
      const double var = std::max(tau2 * lam * lam, 1e-100);
      prec(c, c) += 1.0 / var;
    }
    prec(k - 1, k - 1) += 1.0 / prior.intercept_variance;
    Eigen::VectorXd target = omega(i, i) * Y.col(i);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) target.noalias() += omega(i, j) * E.col(j);
    const Eigen::VectorXd rhs = WX.transpose() * target;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("coefficient precision, equation " + std::to_string(i));
    Eigen::VectorXd beta = llt.solve(rhs);
    beta += llt.matrixU().solve(rng.normal_vector(k));
    B.row(i) = beta.transpose();
    E.col(i) = Y.col(i) - X * beta;
  }
  m.lags = B.leftCols(n * P);
  m.intercept = B.col(k - 1);
}

/// Local scales lambda_j and their auxiliaries nu_j given tau, using the
/// inverse-gamma mixture representation of the half-Cauchy:
///   lambda_j^2 | . ~ IG(1, 1/nu_j + beta_j^2 / (2 tau^2)),
///   nu_j | .       ~ IG(1, 1 + 1/lambda_j^2).
inline void sample_local_scales(const Eigen::MatrixXd& beta, double tau, Eigen::MatrixXd& lambda,
                                Eigen::MatrixXd& nu, Rng& rng) {
  const double tau2 = tau * tau;
  for (Eigen::Index c = 0; c < beta.cols(); ++c) {
    for (Eigen::Index r = 0; r < beta.rows(); ++r) {
      const double b = beta(r, c);
      const double lam2 = rng.inv_gamma(1.0, 1.0 / nu(r, c) + b * b / (2.0 * tau2));
      lambda(r, c) = std::sqrt(lam2);
      nu(r, c) = rng.inv_gamma(1.0, 1.0 + 1.0 / lam2);
    }
  }
}

/// Global scale tau and its auxiliary xi:
///   tau^2 | . ~ IG((p + 1) / 2, 1/xi + sum_j beta_j^2 / (2 lambda_j^2)),
///   xi | .    ~ IG(1, 1 + 1/tau^2).
inline void sample_global_scale(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& lambda, double& tau,
                                double& xi, Rng& rng) {
  const double p = static_cast<double>(beta.size());
  const double ss = (beta.array().square() / lambda.array().square()).sum();
  const double tau2 = rng.inv_gamma(0.5 * (p + 1.0), 1.0 / xi + 0.5 * ss);
  tau = std::sqrt(tau2);
  xi = rng.inv_gamma(1.0, 1.0 + 1.0 / tau2);
}

inline void sample_horseshoe(ModelParams& m, Rng& rng) {
  sample_local_scales(m.lags, m.global_scale, m.local_scale, m.local_aux, rng);
  sample_global_scale(m.lags, m.local_scale, m.global_scale, m.global_aux, rng);
}

namespace detail {

inline double gaussian_loglik(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& S, double T) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * T * logdet - 0.5 * llt.solve(S).trace();
}

// Splits an expanded covariance into (Sigma, d) with unit binary diagonal.
inline void normalize_expanded(const Eigen::MatrixXd& expanded, Eigen::Index n_binary,
                               Eigen::MatrixXd& sigma, Eigen::VectorXd& d) {
  const Eigen::Index n = expanded.rows();
  d = expanded.diagonal().head(n_binary);
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n_binary; ++i) inv_sqrt[i] = 1.0 / std::sqrt(d[i]);
  sigma = inv_sqrt.asDiagonal() * expanded * inv_sqrt.asDiagonal();
  sigma = 0.5 * (sigma + sigma.transpose());
  for (Eigen::Index i = 0; i < n_binary; ++i) sigma(i, i) = 1.0;
}

inline Eigen::VectorXd expansion_root(const Eigen::VectorXd& d, Eigen::Index n) {
  Eigen::VectorXd r = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < d.size(); ++i) r[i] = std::sqrt(d[i]);
  return r;
}

}  // namespace detail

/// Parameter-expanded Metropolis-Hastings update of (Sigma, d).
///
/// Target: p(Sigma, d | .) proportional to det(D)^{(n-1)/2}
/// IW(D^{1/2} Sigma D^{1/2}; n + 2, I) times the Gaussian likelihood. In the
/// expanded coordinates X = D^{1/2} Sigma D^{1/2} the Jacobian cancels and
/// the target becomes IW(X; n + 2, I) L(normalize(X)).
///   1. d_i | Sigma ~ IG((n + 2) / 2, (Sigma^{-1})_ii / 2) exactly.
///   2. Propose X' ~ IW(n + 2 + T, I + D^{1/2} S D^{1/2}) where S is the
///      outlier-scaled residual cross-product.
///   3. Accept with the MH ratio in X space; map back by normalizing.
/// With no binary variables step 2 is the exact conjugate draw.
///
/// `scaled_residuals` rows are eps_t / sqrt(o_t). Returns true if accepted.
inline bool sample_covariance_pxmh(const Eigen::MatrixXd& scaled_residuals, ModelParams& m, Rng& rng) {
  const Eigen::Index n = m.n();
  const Eigen::Index nb = m.expansion.size();
  const double T = static_cast<double>(scaled_residuals.rows());
  const double dof0 = static_cast<double>(n) + 2.0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd S = scaled_residuals.transpose() * scaled_residuals;

  if (nb == 0) {
    m.sigma = inv_wishart_draw(dof0 + T, I + S, rng);
    return true;
  }

  Eigen::LLT<Eigen::MatrixXd> sl(m.sigma);
  if (sl.info() != Eigen::Success) throw NotPositiveDefinite("Sigma in covariance step");
  const Eigen::MatrixXd sigma_inv = sl.solve(I);
  for (Eigen::Index i = 0; i < nb; ++i) m.expansion[i] = rng.inv_gamma(0.5 * dof0, 0.5 * sigma_inv(i, i));

  const Eigen::VectorXd root = detail::expansion_root(m.expansion, n);
  const Eigen::MatrixXd x_cur = root.asDiagonal() * m.sigma * root.asDiagonal();
  const Eigen::MatrixXd psi_cur = I + root.asDiagonal() * S * root.asDiagonal();

  Eigen::MatrixXd x_prop;
  try {
    x_prop = inv_wishart_draw(dof0 + T, psi_cur, rng);
  } catch (const NotPositiveDefinite&) {
    return false;
  }
  Eigen::MatrixXd sigma_prop;
  Eigen::VectorXd d_prop;
  detail::normalize_expanded(x_prop, nb, sigma_prop, d_prop);
  const Eigen::VectorXd root_prop = detail::expansion_root(d_prop, n);
  const Eigen::MatrixXd psi_prop = I + root_prop.asDiagonal() * S * root_prop.asDiagonal();

  double log_ratio = 0.0;
  try {
    log_ratio = inv_wishart_logpdf(x_prop, dof0, I) + detail::gaussian_loglik(sigma_prop, S, T) +
                inv_wishart_logpdf(x_cur, dof0 + T, psi_prop) -
                inv_wishart_logpdf(x_cur, dof0, I) - detail::gaussian_loglik(m.sigma, S, T) -
                inv_wishart_logpdf(x_prop, dof0 + T, psi_cur);
  } catch (const NotPositiveDefinite&) {
    return false;
  }
  if (!std::isfinite(log_ratio)) return false;
  if (std::log(rng.uniform_open()) < log_ratio) {
    m.sigma = sigma_prop;
    m.expansion = d_prop;
    return true;
  }
  return false;
}

/// Prior mass of o_t = j for j = 1..max_scale.
inline double outlier_prior(int j, double prob, int max_scale) {
  return j == 1 ? 1.0 - prob : prob / static_cast<double>(max_scale - 1);
}

/// Full conditional of one outlier state: p(o_t = j) proportional to
/// prior(j) j^{-n/2} exp(-q_t / (2 j)), j = 1..max_scale.
inline Eigen::VectorXd outlier_conditional(double q, Eigen::Index n, double prob, int max_scale = 10) {
  Eigen::VectorXd logp(max_scale);
  for (int j = 1; j <= max_scale; ++j) {
    const double prior = outlier_prior(j, prob, max_scale);
    logp[j - 1] = prior > 0.0 ? std::log(prior) - 0.5 * static_cast<double>(n) * std::log(static_cast<double>(j)) -
                                    q / (2.0 * j)
                              : -std::numeric_limits<double>::infinity();
  }
  const double mx = logp.maxCoeff();
  const Eigen::VectorXd p = logp.unaryExpr([mx](double v) { return std::exp(v - mx); });
  return p / p.sum();
}

/// Draws every o_t from its discrete conditional, then the outlier
/// probability from Beta(a + #{o_t > 1}, b + #{o_t = 1}). `residuals` are
/// the unscaled eps_t.
inline void sample_outliers(const Eigen::MatrixXd& residuals, ModelParams& m, const PriorConfig& prior,
                            Rng& rng) {
  const Eigen::Index n = m.n();
  Eigen::LLT<Eigen::MatrixXd> sl(m.sigma);
  if (sl.info() != Eigen::Success) throw NotPositiveDefinite("Sigma in outlier step");
  const Eigen::MatrixXd Linv = Eigen::MatrixXd(sl.matrixL()).triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  int n_out = 0;
  for (Eigen::Index t = 0; t < residuals.rows(); ++t) {
    const double q = (Linv * residuals.row(t).transpose()).squaredNorm();
    const Eigen::VectorXd p = outlier_conditional(q, n, m.outlier_prob, prior.outlier_max_scale);
    double u = rng.uniform();
    int j = 0;
    while (j < p.size() - 1 && u >= p[j]) {
      u -= p[j];
      ++j;
    }
    m.outlier[t] = static_cast<double>(j + 1);
    n_out += j > 0;
  }
  const double n_in = static_cast<double>(residuals.rows() - n_out);
  m.outlier_prob = rng.beta(prior.outlier_a + n_out, prior.outlier_b + n_in);
}

}  // namespace mixvar
