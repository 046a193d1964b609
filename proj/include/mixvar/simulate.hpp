#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/distributions.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/model.hpp"
#include "mixvar/param_gibbs.hpp"
#include "mixvar/random.hpp"
#include "mixvar/sampler.hpp"

namespace mixvar {

/// Synthetic VAR design. A share zero_prob_base + zero_prob_step (p - 1) of
/// the entries of A_p is zero, the rest are N(0, (coef_scale / p)^2).
/// Sigma is a correlation matrix from a normalized Wishart(wishart_extra_dof
/// + n, I) draw.
struct DgpSpec {
  int n_binary = 2;
  int n_censored = 2;
  int n_unrestricted = 2;
  Eigen::Index lags = 5;
  Eigen::Index t_keep = 350;
  Eigen::Index t_burn = 200;
  double zero_prob_base = 0.2;
  double zero_prob_step = 0.15;
  double coef_scale = 0.4;
  double target_radius = 0.95;
  double wishart_extra_dof = 4.0;
  double censor_threshold = 0.0;
  std::uint64_t seed = 1;

  Eigen::Index n() const { return n_binary + n_censored + n_unrestricted; }
};

struct SyntheticData {
  MixedPanel panel;       // lags + t_keep rows
  ModelParams truth;
  Eigen::MatrixXd latent;  // same rows as panel
};

/// Largest eigenvalue modulus of the VAR companion matrix.
inline double companion_radius(const ModelParams& m) {
  const Eigen::Index n = m.n(), P = m.lag_order();
  if (n == 0 || P == 0) return 0.0;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n * P, n * P);
  F.topRows(n) = m.lags;
  if (P > 1) F.bottomLeftCorner(n * (P - 1), n * (P - 1)).setIdentity();
  return Eigen::EigenSolver<Eigen::MatrixXd>(F, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Correlation matrix from a normalized Wishart draw.
inline Eigen::MatrixXd random_correlation(Eigen::Index n, double dof, Rng& rng) {
  const Eigen::MatrixXd W = inv_wishart_draw(dof, Eigen::MatrixXd::Identity(n, n), rng).inverse();
  const Eigen::VectorXd s = W.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd C = s.asDiagonal() * W * s.asDiagonal();
  C = 0.5 * (C + C.transpose());
  C.diagonal().setOnes();
  return C;
}

inline std::vector<VariableSpec> dgp_specs(const DgpSpec& spec) {
  std::vector<VariableSpec> specs;
  for (int i = 0; i < spec.n_binary; ++i)
    specs.push_back({"B" + std::to_string(i + 1), VariableKind::binary, 0.0, Transform::level});
  for (int i = 0; i < spec.n_censored; ++i)
    specs.push_back({"C" + std::to_string(i + 1), VariableKind::censored, spec.censor_threshold, Transform::level});
  for (int i = 0; i < spec.n_unrestricted; ++i)
    specs.push_back({"U" + std::to_string(i + 1), VariableKind::unrestricted, 0.0, Transform::level});
  return specs;
}

/// Applies the observation equations to a complete latent matrix.
inline MixedPanel observe(const Eigen::MatrixXd& latent, const std::vector<VariableSpec>& specs) {
  MixedPanel p;
  p.specs = specs;
  p.values = latent;
  p.observed = BoolMatrix::Constant(latent.rows(), latent.cols(), true);
  for (Eigen::Index i = 0; i < latent.cols(); ++i) {
    const VariableSpec& s = specs[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < latent.rows(); ++t) {
      if (s.kind == VariableKind::binary) p.values(t, i) = latent(t, i) > 0.0 ? 1.0 : 0.0;
      if (s.kind == VariableKind::censored) p.values(t, i) = std::max(latent(t, i), s.threshold);
    }
  }
  return p;
}

/// Simulates rows P..end of `y` from the VAR given rows 0..P-1, using the
/// outlier scales in m.outlier.
inline void simulate_var_rows(const ModelParams& m, Eigen::MatrixXd& y, Rng& rng) {
  const Eigen::Index P = m.lag_order();
  Eigen::LLT<Eigen::MatrixXd> llt(m.sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma in simulation");
  const Eigen::MatrixXd L = llt.matrixL();
  for (Eigen::Index t = P; t < y.rows(); ++t) {
    const double o = m.outlier.size() == y.rows() - P ? m.outlier[t - P] : 1.0;
    y.row(t) = (conditional_mean(m, y.middleRows(t - P, P)) + std::sqrt(o) * L * rng.normal_vector(m.n())).transpose();
  }
}

/// Draws a stationary sparse VAR, simulates t_burn + lags + t_keep periods
/// from zero and keeps the last lags + t_keep.
inline SyntheticData generate_dgp(const DgpSpec& spec) {
  const Eigen::Index n = spec.n(), P = spec.lags;
  if (n < 1 || P < 1 || spec.t_keep < 1 || spec.t_burn < 0) throw ConfigError("invalid DGP dimensions");
  if (!(spec.target_radius > 0.0 && spec.target_radius < 1.0)) throw ConfigError("target radius must be in (0, 1)");
  Rng rng(spec.seed);
  SyntheticData out;
  ModelParams& m = out.truth;
  m = ModelParams::zeros(n, P, spec.t_keep, spec.n_binary);
  const Eigen::Index cells = n * n;
  for (Eigen::Index p = 1; p <= P; ++p) {
    const double zero = std::min(1.0, spec.zero_prob_base + spec.zero_prob_step * static_cast<double>(p - 1));
    // Exactly round(zero * n^2) zeros at uniformly chosen positions.
    const auto zeros = static_cast<Eigen::Index>(std::lround(zero * static_cast<double>(cells)));
    std::vector<Eigen::Index> cell(static_cast<std::size_t>(cells));
    std::iota(cell.begin(), cell.end(), Eigen::Index{0});
    for (Eigen::Index k = cells - 1; k > 0; --k) std::swap(cell[k], cell[rng.uniform_int(0, static_cast<int>(k))]);
    auto A = m.lag(p);
    for (Eigen::Index k = 0; k < cells; ++k) {
      const Eigen::Index c = cell[static_cast<std::size_t>(k)];
      A(c % n, c / n) = k < zeros ? 0.0 : spec.coef_scale / static_cast<double>(p) * rng.normal();
    }
  }
  const double radius = companion_radius(m);
  if (radius > spec.target_radius) {
    // Scaling A_p by c^p scales every companion eigenvalue by c.
    const double c = spec.target_radius / radius;
    for (Eigen::Index p = 1; p <= P; ++p) m.lag(p) *= std::pow(c, static_cast<double>(p));
    if (!(companion_radius(m) < 1.0)) throw NonStationaryAfterRescale("companion radius still >= 1");
  }
  m.sigma = random_correlation(n, static_cast<double>(n) + spec.wishart_extra_dof, rng);

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(spec.t_burn + P + spec.t_keep, n);
  ModelParams sim = m;
  sim.outlier.resize(0);
  simulate_var_rows(sim, y, rng);
  out.latent = y.bottomRows(P + spec.t_keep);
  out.panel = observe(out.latent, dgp_specs(spec));
  return out;
}

// --- prior simulation --------------------------------------------------------

/// Half-Cauchy(0, 1) through its inverse-gamma mixture, matching the
/// auxiliary representation used by the sampler.
inline void draw_half_cauchy_pair(double& scale, double& aux, Rng& rng) {
  aux = rng.inv_gamma(0.5, 1.0);
  scale = std::sqrt(rng.inv_gamma(0.5, 1.0 / aux));
}

/// One draw of every parameter from the prior of the model as configured
/// in `cfg` (horseshoe and outlier blocks only when enabled). The
/// covariance prior is the marginal of the expanded IW(n + 2, I).
inline ModelParams draw_prior(Eigen::Index n, int n_binary, Eigen::Index T, const ChainConfig& cfg, Rng& rng) {
  const Eigen::Index P = cfg.lags;
  ModelParams m = ModelParams::zeros(n, P, T, n_binary);
  m.global_scale = cfg.initial_global_scale;
  if (cfg.sample_horseshoe) {
    draw_half_cauchy_pair(m.global_scale, m.global_aux, rng);
    for (Eigen::Index k = 0; k < m.lags.size(); ++k)
      draw_half_cauchy_pair(m.local_scale.data()[k], m.local_aux.data()[k], rng);
  }
  for (Eigen::Index k = 0; k < m.lags.size(); ++k)
    m.lags.data()[k] = m.global_scale * m.local_scale.data()[k] * rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) m.intercept[i] = std::sqrt(cfg.prior.intercept_variance) * rng.normal();
  const Eigen::MatrixXd X = inv_wishart_draw(static_cast<double>(n) + 2.0, Eigen::MatrixXd::Identity(n, n), rng);
  detail::normalize_expanded(X, n_binary, m.sigma, m.expansion);
  m.outlier_prob = cfg.prior.outlier_a / (cfg.prior.outlier_a + cfg.prior.outlier_b);
  if (cfg.heteroskedastic) {
    m.outlier_prob = rng.beta(cfg.prior.outlier_a, cfg.prior.outlier_b);
    for (Eigen::Index t = 0; t < T; ++t) {
      if (rng.uniform() < m.outlier_prob)
        m.outlier[t] = static_cast<double>(rng.uniform_int(2, cfg.prior.outlier_max_scale));
    }
  }
  return m;
}

/// Complete latent data given parameters: presample rows from
/// N(0, 1 / presample_precision), the rest from the VAR.
inline Eigen::MatrixXd draw_latent_data(const ModelParams& m, Eigen::Index T, double presample_precision, Rng& rng) {
  const Eigen::Index P = m.lag_order();
  Eigen::MatrixXd y(T + P, m.n());
  const double sd = 1.0 / std::sqrt(presample_precision);
  for (Eigen::Index t = 0; t < P; ++t) y.row(t) = (sd * rng.normal_vector(m.n())).transpose();
  simulate_var_rows(m, y, rng);
  return y;
}

// --- recovery experiment ----------------------------------------------------------

/// Linear-interpolated empirical quantile (type 7).
inline double empirical_quantile(std::vector<double> x, double q) {
  if (x.empty()) throw EmptySet("quantile of no draws");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

struct RecoveryReport {
  std::size_t draws = 0;
  double coefficient_coverage = 0.0;  // share of lag coefficients inside the 90% interval
  std::size_t coefficients = 0;
  double censored_band_coverage = 0.0;  // at-bound censored points inside the 90% band
  std::size_t at_bound_points = 0;
  std::vector<double> latent_correlation;  // per binary / censored variable
  double acceptance = 0.0;
};

/// Standardizes the panel, runs one chain, maps draws back to original
/// units and scores them against the truth.
inline RecoveryReport run_recovery(const SyntheticData& data, const ChainConfig& cfg, double level = 0.9) {
  const StandardizedPanel sp = standardize(data.panel);
  ChainConfig c = cfg;
  c.lags = data.truth.lag_order();
  const PosteriorDraws d = run_chain(sp.panel, c);
  if (d.size() == 0) throw ConfigError("recovery needs retained draws");
  const double lo = 0.5 * (1.0 - level), hi = 1.0 - lo;
  RecoveryReport r;
  r.draws = d.size();
  r.acceptance = d.covariance_acceptance();

  std::vector<ModelParams> params;
  std::vector<Eigen::MatrixXd> latent;
  for (std::size_t s = 0; s < d.size(); ++s) {
    params.push_back(destandardize_params(d.params[s], sp.state));
    latent.push_back(destandardize(d.latent[s], sp.state));
  }
  std::vector<double> v(d.size());
  std::size_t covered = 0;
  const Eigen::MatrixXd& truth = data.truth.lags;
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    for (std::size_t s = 0; s < d.size(); ++s) v[s] = params[s].lags.data()[k];
    const double t = truth.data()[k];
    covered += empirical_quantile(v, lo) <= t && t <= empirical_quantile(v, hi);
  }
  r.coefficients = static_cast<std::size_t>(truth.size());
  r.coefficient_coverage = static_cast<double>(covered) / static_cast<double>(truth.size());

  std::size_t band = 0;
  for (Eigen::Index i = 0; i < data.panel.n(); ++i) {
    const VariableKind kind = data.panel.specs[static_cast<std::size_t>(i)].kind;
    if (kind == VariableKind::unrestricted) continue;
    Eigen::VectorXd median(data.panel.rows());
    for (Eigen::Index t = 0; t < data.panel.rows(); ++t) {
      for (std::size_t s = 0; s < d.size(); ++s) v[s] = latent[s](t, i);
      median[t] = empirical_quantile(v, 0.5);
      if (kind == VariableKind::censored && data.panel.at_bound(t, i)) {
        ++r.at_bound_points;
        const double x = data.latent(t, i);
        band += empirical_quantile(v, lo) <= x && x <= empirical_quantile(v, hi);
      }
    }
    const Eigen::VectorXd a = median.array() - median.mean();
    const Eigen::VectorXd b = data.latent.col(i).array() - data.latent.col(i).mean();
    r.latent_correlation.push_back(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()));
  }
  r.censored_band_coverage = r.at_bound_points ? static_cast<double>(band) / static_cast<double>(r.at_bound_points) : 1.0;
  return r;
}

}  // namespace mixvar
