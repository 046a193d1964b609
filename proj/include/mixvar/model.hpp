#pragma once

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/errors.hpp"

namespace mixvar {

/// One posterior state of the mixed-variable VAR.
///
/// `lags` is n x (nP) holding [A_1 ... A_P]; `local_scale` has the same
/// layout and holds the horseshoe scale of each lag coefficient.
/// `outlier` covers the T likelihood rows (presample rows excluded).
struct ModelParams {
  Eigen::VectorXd intercept;
  Eigen::MatrixXd lags;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd expansion;  // working scales d of the binary block
  double global_scale = 0.1;  // tau
  Eigen::MatrixXd local_scale;
  Eigen::MatrixXd local_aux;  // auxiliary inverse scales nu
  double global_aux = 1.0;    // auxiliary inverse scale of tau
  Eigen::VectorXd outlier;
  double outlier_prob = 0.05;

  Eigen::Index n() const { return intercept.size(); }
  Eigen::Index lag_order() const { return n() == 0 ? 0 : lags.cols() / n(); }

  // A_p for p = 1..P.
  auto lag(Eigen::Index p) const { return lags.middleCols((p - 1) * n(), n()); }
  auto lag(Eigen::Index p) { return lags.middleCols((p - 1) * n(), n()); }

  static ModelParams zeros(Eigen::Index n, Eigen::Index P, Eigen::Index T, int n_binary) {
    ModelParams m;
    m.intercept = Eigen::VectorXd::Zero(n);
    m.lags = Eigen::MatrixXd::Zero(n, n * P);
    m.sigma = Eigen::MatrixXd::Identity(n, n);
    m.expansion = Eigen::VectorXd::Ones(n_binary);
    m.local_scale = Eigen::MatrixXd::Ones(n, n * P);
    m.local_aux = Eigen::MatrixXd::Ones(n, n * P);
    m.outlier = Eigen::VectorXd::Ones(T);
    return m;
  }

  void check_dims(Eigen::Index n_vars, Eigen::Index P) const {
    if (intercept.size() != n_vars || lags.rows() != n_vars || lags.cols() != n_vars * P ||
        sigma.rows() != n_vars || sigma.cols() != n_vars) {
      throw DimensionMismatch("model parameters do not match n=" + std::to_string(n_vars) +
                              ", P=" + std::to_string(P));
    }
  }
};

// One step of the VAR mean: a + sum_p A_p y_{t-p} where `history` holds
// rows t-P..t-1 (oldest first).
inline Eigen::VectorXd conditional_mean(const ModelParams& m, const Eigen::MatrixXd& history) {
  const Eigen::Index P = m.lag_order();
  Eigen::VectorXd mu = m.intercept;
  for (Eigen::Index p = 1; p <= P; ++p)
    mu.noalias() += m.lag(p) * history.row(history.rows() - p).transpose();
  return mu;
}

// Residuals eps_t for every likelihood row of a complete data matrix Y
// ((T + P) x n): row t of the result is y_{t+P} - a - sum_p A_p y_{t+P-p}.
inline Eigen::MatrixXd var_residuals(const ModelParams& m, const Eigen::MatrixXd& y) {
  const Eigen::Index P = m.lag_order();
  const Eigen::Index T = y.rows() - P;
  Eigen::MatrixXd eps(T, m.n());
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd r = y.row(t + P).transpose() - m.intercept;
    for (Eigen::Index p = 1; p <= P; ++p) r.noalias() -= m.lag(p) * y.row(t + P - p).transpose();
    eps.row(t) = r.transpose();
  }
  return eps;
}

// Maps parameters estimated on standardized data back to original units.
// Hyperparameters and outlier states are unit-free and copied unchanged.
inline ModelParams destandardize_params(const ModelParams& m, const StandardizationState& s) {
  const Eigen::Index n = m.n();
  const Eigen::Index P = m.lag_order();
  ModelParams out = m;
  for (Eigen::Index p = 1; p <= P; ++p)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        out.lag(p)(i, j) = m.lag(p)(i, j) * s.scale[i] / s.scale[j];
  for (Eigen::Index i = 0; i < n; ++i) {
    double a = s.scale[i] * m.intercept[i] + s.center[i];
    for (Eigen::Index p = 1; p <= P; ++p)
      for (Eigen::Index j = 0; j < n; ++j) a -= out.lag(p)(i, j) * s.center[j];
    out.intercept[i] = a;
  }
  out.sigma = s.scale.asDiagonal() * m.sigma * s.scale.asDiagonal();
  return out;
}

}  // namespace mixvar
