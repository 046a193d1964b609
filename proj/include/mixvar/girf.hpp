#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/distributions.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/forecast.hpp"
#include "mixvar/model.hpp"

namespace mixvar {

/// Contemporaneous impact of one orthogonalized shock.
struct ShockImpact {
  Eigen::VectorXd delta;
  Eigen::Index index = 0;  // shocked variable (panel order)
  double size = 1.0;       // in SDs of the orthogonalized shock
};

/// Recursive identification: delta = size * L(:, k) where L is the lower
/// Cholesky factor of Sigma with variables permuted into `ordering` and k
/// the position of `index` in that ordering. Variables ordered before the
/// shocked one do not move on impact. An empty ordering means panel order.
inline ShockImpact cholesky_shock(const Eigen::MatrixXd& sigma, std::vector<Eigen::Index> ordering,
                                  Eigen::Index index, double size = 1.0) {
  const Eigen::Index n = sigma.rows();
  if (ordering.empty()) {
    ordering.resize(static_cast<std::size_t>(n));
    std::iota(ordering.begin(), ordering.end(), Eigen::Index{0});
  }
  if (static_cast<Eigen::Index>(ordering.size()) != n) throw DimensionMismatch("shock ordering");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  Eigen::Index pos = -1;
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    const Eigen::Index v = ordering[k];
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) throw ConfigError("shock ordering is not a permutation");
    seen[static_cast<std::size_t>(v)] = true;
    if (v == index) pos = static_cast<Eigen::Index>(k);
  }
  if (pos < 0) throw ConfigError("shock index out of range");
  Eigen::MatrixXd permuted(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) permuted(a, b) = sigma(ordering[a], ordering[b]);
  Eigen::LLT<Eigen::MatrixXd> llt(permuted);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma in cholesky_shock");
  const Eigen::MatrixXd L = llt.matrixL();
  ShockImpact s;
  s.index = index;
  s.size = size;
  s.delta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = pos; a < n; ++a) s.delta[ordering[a]] = size * L(a, pos);
  return s;
}

/// Psi_j delta for j = 0..h (n x (h + 1)). Columns of variables flagged in
/// `cumulate` are summed over horizons.
inline Eigen::MatrixXd linear_irf(const ModelParams& m, const Eigen::VectorXd& delta, Eigen::Index h,
                                  const std::vector<bool>& cumulate = {}) {
  const Eigen::Index n = m.n();
  const Eigen::Index P = m.lag_order();
  Eigen::MatrixXd out(n, h + 1);
  out.col(0) = delta;
  for (Eigen::Index j = 1; j <= h; ++j) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (Eigen::Index p = 1; p <= std::min(j, P); ++p) r.noalias() += m.lag(p) * out.col(j - p);
    out.col(j) = r;
  }
  for (std::size_t i = 0; i < cumulate.size(); ++i)
    if (cumulate[i])
      for (Eigen::Index j = 1; j <= h; ++j) out(static_cast<Eigen::Index>(i), j) += out(static_cast<Eigen::Index>(i), j - 1);
  return out;
}

// Flags variables entered in log differences, whose responses are reported
// cumulated.
inline std::vector<bool> cumulate_mask(const std::vector<VariableSpec>& specs) {
  std::vector<bool> mask;
  for (const auto& s : specs) mask.push_back(s.transform == Transform::log_diff);
  return mask;
}

/// Shock-minus-baseline responses from one initial state. Rows follow panel
/// order; probability rows are NaN for non-binary variables and censored
/// rows NaN for non-censored ones.
struct GirfResult {
  Eigen::MatrixXd latent;       // n x (h + 1)
  Eigen::MatrixXd probability;  // n x (h + 1)
  Eigen::MatrixXd censored;     // n x (h + 1)
  Eigen::VectorXd delta;

  Eigen::Index horizon() const { return latent.cols() - 1; }
};

/// GIRF at origin tau. `history` holds rows tau-P+1..tau (latent state of
/// one posterior draw); the shocked scenario adds delta to row tau. At
/// horizon 0 the observable responses are read off the state itself; at
/// later horizons from the Gaussian predictive margins.
inline GirfResult girf_at(const ModelParams& m, const Eigen::MatrixXd& history, const Eigen::VectorXd& delta,
                          Eigen::Index h, const std::vector<VariableSpec>& specs) {
  const Eigen::Index n = m.n();
  if (delta.size() != n || static_cast<Eigen::Index>(specs.size()) != n) throw DimensionMismatch("girf_at");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  GirfResult g;
  g.delta = delta;
  g.latent = linear_irf(m, delta, h);
  g.probability = Eigen::MatrixXd::Constant(n, h + 1, nan);
  g.censored = Eigen::MatrixXd::Constant(n, h + 1, nan);
  const Eigen::VectorXd y_tau = history.bottomRows(1).transpose();
  PredictiveMoments pm;
  if (h > 0) pm = predictive_moments(m, history, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VariableSpec& s = specs[static_cast<std::size_t>(i)];
    if (s.kind == VariableKind::unrestricted) continue;
    Eigen::MatrixXd& target = s.kind == VariableKind::binary ? g.probability : g.censored;
    const double shocked0 = y_tau[i] + delta[i];
    if (s.kind == VariableKind::binary)
      target(i, 0) = static_cast<double>(shocked0 > 0.0) - static_cast<double>(y_tau[i] > 0.0);
    else
      target(i, 0) = std::max(shocked0, s.threshold) - std::max(y_tau[i], s.threshold);
    for (Eigen::Index j = 1; j <= h; ++j) {
      const Eigen::Index k = pm.index(i, j);
      const double mu = pm.mean[k];
      const double sd = std::sqrt(pm.cov(k, k));
      const double mu_s = mu + g.latent(i, j);
      if (s.kind == VariableKind::binary)
        target(i, j) = normal_cdf(mu_s / sd) - normal_cdf(mu / sd);
      else
        target(i, j) = censored_normal_mean(mu_s, sd, s.threshold) - censored_normal_mean(mu, sd, s.threshold);
    }
  }
  return g;
}

/// Time average of GIRFs over a set of origins (one posterior draw).
inline GirfResult average_partial_effect(const std::vector<GirfResult>& girfs) {
  if (girfs.empty()) throw EmptySet("average_partial_effect needs at least one origin");
  GirfResult out = girfs.front();
  for (std::size_t k = 1; k < girfs.size(); ++k) {
    out.latent += girfs[k].latent;
    out.probability += girfs[k].probability;
    out.censored += girfs[k].censored;
    out.delta += girfs[k].delta;
  }
  const double w = 1.0 / static_cast<double>(girfs.size());
  out.latent *= w;
  out.probability *= w;
  out.censored *= w;
  out.delta *= w;
  return out;
}

/// Average of several histories, for the partial-effect-at-the-average
/// variant that shocks a single synthetic initial configuration.
inline Eigen::MatrixXd average_history(const std::vector<Eigen::MatrixXd>& histories) {
  if (histories.empty()) throw EmptySet("average_history needs at least one origin");
  Eigen::MatrixXd out = histories.front();
  for (std::size_t k = 1; k < histories.size(); ++k) out += histories[k];
  return out / static_cast<double>(histories.size());
}

/// (horizon, value) of the largest absolute response at or after
/// `min_horizon`; ties go to the earliest horizon, an all-zero sequence to
/// (min_horizon, 0).
inline std::pair<Eigen::Index, double> peak_response(const Eigen::VectorXd& response, Eigen::Index min_horizon = 0) {
  Eigen::Index best = min_horizon;
  double value = min_horizon < response.size() ? response[min_horizon] : 0.0;
  for (Eigen::Index j = min_horizon + 1; j < response.size(); ++j)
    if (std::abs(response[j]) > std::abs(value)) {
      best = j;
      value = response[j];
    }
  return {best, value};
}

// Peak probability response of binary variable i.
inline std::pair<Eigen::Index, double> peak_girf(const GirfResult& g, Eigen::Index i, Eigen::Index min_horizon = 0) {
  return peak_response(g.probability.row(i).transpose(), min_horizon);
}

}  // namespace mixvar
