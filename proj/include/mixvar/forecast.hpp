#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/band_linalg.hpp"
#include "mixvar/data_model.hpp"
#include "mixvar/distributions.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/model.hpp"
#include "mixvar/param_gibbs.hpp"
#include "mixvar/random.hpp"
#include "mixvar/truncated_hmc.hpp"

namespace mixvar {

/// Joint Gaussian law of y_{tau+1..tau+h} given parameters and the last P
/// states. Stacked horizon-major: entry j * n + i is variable i at horizon
/// j + 1.
struct PredictiveMoments {
  Eigen::Index n = 0;
  Eigen::Index horizon = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index index(Eigen::Index var, Eigen::Index h) const { return (h - 1) * n + var; }
};

// MA coefficients Psi_0..Psi_h of the VAR.
inline std::vector<Eigen::MatrixXd> ma_coefficients(const ModelParams& m, Eigen::Index h) {
  const Eigen::Index n = m.n();
  const Eigen::Index P = m.lag_order();
  std::vector<Eigen::MatrixXd> psi{Eigen::MatrixXd::Identity(n, n)};
  for (Eigen::Index j = 1; j <= h; ++j) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index p = 1; p <= std::min(j, P); ++p) next.noalias() += m.lag(p) * psi[j - p];
    psi.push_back(std::move(next));
  }
  return psi;
}

/// Exact moments of Eq. (10). `history` holds rows tau-P+1..tau, oldest
/// first. `outlier_scales` (length h) multiplies Sigma at each future step;
/// empty means o = 1 throughout.
inline PredictiveMoments predictive_moments(const ModelParams& m, const Eigen::MatrixXd& history, Eigen::Index h,
                                            const Eigen::VectorXd& outlier_scales = {}) {
  const Eigen::Index n = m.n();
  const Eigen::Index P = m.lag_order();
  if (h < 1) throw ConfigError("forecast horizon must be at least 1");
  if (history.rows() < P || history.cols() != n) throw DimensionMismatch("predictive_moments history");
  if (outlier_scales.size() != 0 && outlier_scales.size() != h)
    throw DimensionMismatch("predictive_moments outlier scales");

  PredictiveMoments pm;
  pm.n = n;
  pm.horizon = h;
  pm.mean.resize(n * h);
  Eigen::MatrixXd window = history.bottomRows(P);
  for (Eigen::Index j = 1; j <= h; ++j) {
    const Eigen::VectorXd mu = conditional_mean(m, window);
    pm.mean.segment((j - 1) * n, n) = mu;
    if (P > 1) window.topRows(P - 1) = window.bottomRows(P - 1).eval();
    window.row(P - 1) = mu.transpose();
  }

  const auto psi = ma_coefficients(m, h);
  pm.cov = Eigen::MatrixXd::Zero(n * h, n * h);
  for (Eigen::Index k = 1; k <= h; ++k) {
    const double o = outlier_scales.size() ? outlier_scales[k - 1] : 1.0;
    const Eigen::MatrixXd s = o * m.sigma;
    // Shock at step k reaches horizon j >= k through Psi_{j-k}.
    for (Eigen::Index j = k; j <= h; ++j) {
      const Eigen::MatrixXd left = psi[j - k] * s;
      for (Eigen::Index l = k; l <= j; ++l)
        pm.cov.block((j - 1) * n, (l - 1) * n, n, n).noalias() += left * psi[l - k].transpose();
    }
  }
  pm.cov = pm.cov.selfadjointView<Eigen::Lower>();
  return pm;
}

/// Future outlier scales drawn from the outlier prior at probability
/// `prob`; the alternative to fixing them at 1.
inline Eigen::VectorXd sample_future_outliers(double prob, Eigen::Index h, Rng& rng, int max_scale = 10) {
  Eigen::VectorXd o(h);
  for (Eigen::Index j = 0; j < h; ++j)
    o[j] = rng.uniform() < prob ? static_cast<double>(rng.uniform_int(2, max_scale)) : 1.0;
  return o;
}

namespace detail {

// Root R with R R' = cov; falls back to an eigen root for PSD matrices.
inline Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace detail

/// `count` exact draws from pm, one path per column.
inline Eigen::MatrixXd draw_paths(const PredictiveMoments& pm, Eigen::Index count, Rng& rng) {
  const Eigen::Index d = pm.mean.size();
  const Eigen::MatrixXd root = detail::covariance_root(pm.cov);
  Eigen::MatrixXd out(d, count);
  for (Eigen::Index c = 0; c < count; ++c) out.col(c) = pm.mean + root * rng.normal_vector(d);
  return out;
}

/// Pr(binary variable i positive at horizon j) = Phi(mu / sqrt(v)).
inline double recession_probability(const PredictiveMoments& pm, const std::vector<VariableSpec>& specs,
                                    Eigen::Index i, Eigen::Index j) {
  if (specs[static_cast<std::size_t>(i)].kind != VariableKind::binary)
    throw NonBinaryVariable(specs[static_cast<std::size_t>(i)].code);
  const Eigen::Index k = pm.index(i, j);
  const double mu = pm.mean[k];
  const double v = pm.cov(k, k);
  if (v <= 0.0) return mu > 0.0 ? 1.0 : (mu < 0.0 ? 0.0 : 0.5);
  return normal_cdf(mu / std::sqrt(v));
}

/// Maps latent paths (stacked horizon-major, one per column) to observables:
/// binary -> indicator of a positive latent, censored -> max(y, threshold).
inline Eigen::MatrixXd censor_paths(const Eigen::MatrixXd& paths, const std::vector<VariableSpec>& specs) {
  const auto n = static_cast<Eigen::Index>(specs.size());
  Eigen::MatrixXd out = paths;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const VariableSpec& s = specs[static_cast<std::size_t>(r % n)];
    if (s.kind == VariableKind::binary)
      out.row(r) = (paths.row(r).array() > 0.0).cast<double>();
    else if (s.kind == VariableKind::censored)
      out.row(r) = paths.row(r).array().max(s.threshold);
  }
  return out;
}

/// Linear restrictions on the stacked forecast vector: hard R y = r and
/// soft lower <= S y <= upper.
struct ForecastRestrictions {
  Eigen::MatrixXd hard;
  Eigen::VectorXd values;
  Eigen::MatrixXd soft;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static ForecastRestrictions none(Eigen::Index dim) {
    ForecastRestrictions r;
    r.hard.resize(0, dim);
    r.soft.resize(0, dim);
    return r;
  }
  bool empty() const { return hard.rows() == 0 && soft.rows() == 0; }
};

namespace detail {

inline void check_full_row_rank(const Eigen::MatrixXd& R, const char* what) {
  if (R.rows() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(R.transpose());
  qr.setThreshold(1e-10);
  if (qr.rank() < R.rows()) throw RankDeficientRestriction(what);
}

// Gain G = V R' (R V R')^+ and a feasibility check of r against the
// directions of R y that have no variance.
struct HardConditioning {
  Eigen::MatrixXd gain;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline HardConditioning condition_hard(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                       const Eigen::MatrixXd& R, const Eigen::VectorXd& r) {
  check_full_row_rank(R, "hard restriction rows are linearly dependent");
  const Eigen::MatrixXd VRt = cov * R.transpose();
  const Eigen::MatrixXd RVR = R * VRt;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(RVR);
  cod.setThreshold(1e-12);
  HardConditioning h;
  h.gain = VRt * cod.pseudoInverse();
  h.mean = mean + h.gain * (r - R * mean);
  const double scale = 1.0 + r.cwiseAbs().maxCoeff();
  if ((R * h.mean - r).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw InfeasibleRestriction("hard restriction values outside the support of the forecast");
  h.cov = cov - h.gain * VRt.transpose();
  h.cov = 0.5 * (h.cov + h.cov.transpose());
  return h;
}

}  // namespace detail

/// Moments of pm conditioned on R y = r.
inline PredictiveMoments condition_moments(const PredictiveMoments& pm, const Eigen::MatrixXd& R,
                                           const Eigen::VectorXd& r) {
  if (R.cols() != pm.mean.size() || R.rows() != r.size()) throw DimensionMismatch("hard restriction shape");
  if (R.rows() == 0) return pm;
  const auto h = detail::condition_hard(pm.mean, pm.cov, R, r);
  PredictiveMoments out = pm;
  out.mean = h.mean;
  out.cov = h.cov;
  return out;
}

/// Draws from pm conditioned on R y = r: each unconditional draw is moved
/// by y + G (r - R y), then refined once so the equalities hold to
/// rounding.
inline Eigen::MatrixXd conditional_forecast_hard(const PredictiveMoments& pm, const Eigen::MatrixXd& R,
                                                 const Eigen::VectorXd& r, Eigen::Index count, Rng& rng) {
  if (R.cols() != pm.mean.size() || R.rows() != r.size()) throw DimensionMismatch("hard restriction shape");
  Eigen::MatrixXd paths = draw_paths(pm, count, rng);
  if (R.rows() == 0) return paths;
  const auto h = detail::condition_hard(pm.mean, pm.cov, R, r);
  for (Eigen::Index c = 0; c < count; ++c) {
    Eigen::VectorXd y = paths.col(c);
    y += h.gain * (r - R * y);
    y += h.gain * (r - R * y);
    paths.col(c) = y;
  }
  return paths;
}

struct SoftForecastConfig {
  std::size_t burn_in = 200;
  HmcConfig hmc;
};

/// Draws from pm conditioned on any hard restrictions and truncated to the
/// soft box: z = S y is sampled from its truncated Gaussian marginal by
/// HMC, then y | z by exact conditioning.
inline Eigen::MatrixXd conditional_forecast_soft(const PredictiveMoments& pm, const ForecastRestrictions& res,
                                                 Eigen::Index count, Rng& rng,
                                                 const SoftForecastConfig& cfg = {}) {
  const Eigen::Index d = pm.mean.size();
  Eigen::VectorXd mean = pm.mean;
  Eigen::MatrixXd cov = pm.cov;
  if (res.hard.rows() > 0) {
    const auto h = detail::condition_hard(mean, cov, res.hard, res.values);
    mean = h.mean;
    cov = h.cov;
  }
  const Eigen::MatrixXd& S = res.soft;
  const Eigen::Index s = S.rows();
  if (s == 0) {
    if (res.hard.rows() == 0) return draw_paths(pm, count, rng);
    return conditional_forecast_hard(pm, res.hard, res.values, count, rng);
  }
  if (S.cols() != d || res.lower.size() != s || res.upper.size() != s) throw DimensionMismatch("soft restriction shape");
  for (Eigen::Index k = 0; k < s; ++k)
    if (!(res.lower[k] < res.upper[k])) throw EmptyFeasibleSet("soft restriction row " + std::to_string(k));
  detail::check_full_row_rank(S, "soft restriction rows are linearly dependent");

  const Eigen::VectorXd zmean = S * mean;
  const Eigen::MatrixXd zcov = S * cov * S.transpose();
  Eigen::LLT<Eigen::MatrixXd> zl(zcov);
  if (zl.info() != Eigen::Success)
    throw EmptyFeasibleSet("soft restrictions act on directions without forecast uncertainty");
  const Eigen::MatrixXd zprec = zl.solve(Eigen::MatrixXd::Identity(s, s));
  const TruncatedGaussian target = TruncatedGaussian::from_precision(
      BandedSpd::from_dense(0.5 * (zprec + zprec.transpose()), s - 1), zprec * zmean, res.lower, res.upper);

  // Feasible start: the mean clamped into the box.
  Eigen::VectorXd z(s);
  for (Eigen::Index k = 0; k < s; ++k) {
    const double lo = res.lower[k], hi = res.upper[k];
    const double sd = std::sqrt(zcov(k, k));
    double gap = sd;
    if (std::isfinite(lo) && std::isfinite(hi)) gap = std::min(sd, 0.25 * (hi - lo));
    z[k] = std::clamp(zmean[k], std::isfinite(lo) ? lo + gap : zmean[k], std::isfinite(hi) ? hi - gap : zmean[k]);
    if (!(z[k] > lo && z[k] < hi)) throw EmptyFeasibleSet("no feasible starting point");
  }

  // y | (R y = r, S y = z) from the unconditional law by a joint update.
  const Eigen::Index nh = res.hard.rows();
  Eigen::MatrixXd all(nh + s, d);
  all << res.hard, S;
  Eigen::VectorXd target_values(nh + s);
  if (nh > 0) target_values.head(nh) = res.values;
  const auto cond = detail::condition_hard(pm.mean, pm.cov, all, Eigen::VectorXd(all * pm.mean));
  const Eigen::MatrixXd root = detail::covariance_root(pm.cov);
  for (std::size_t b = 0; b < cfg.burn_in; ++b) z = truncated_gaussian_draw(target, z, cfg.hmc, rng).state;
  Eigen::MatrixXd paths(d, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    z = truncated_gaussian_draw(target, z, cfg.hmc, rng).state;
    target_values.tail(s) = z;
    Eigen::VectorXd y = pm.mean + root * rng.normal_vector(d);
    y += cond.gain * (target_values - all * y);
    y += cond.gain * (target_values - all * y);
    paths.col(c) = y;
  }
  return paths;
}

/// Maps restrictions stated in original units to standardized units:
/// R (c + D y) = r  becomes  (R D) y = r - R c.
inline ForecastRestrictions standardize_restrictions(const ForecastRestrictions& res, const StandardizationState& st,
                                                     Eigen::Index horizon) {
  const Eigen::VectorXd scale = st.scale.replicate(horizon, 1);
  const Eigen::VectorXd center = st.center.replicate(horizon, 1);
  ForecastRestrictions out;
  out.hard = res.hard * scale.asDiagonal();
  out.values = res.values - res.hard * center;
  out.soft = res.soft * scale.asDiagonal();
  out.lower = res.lower - res.soft * center;
  out.upper = res.upper - res.soft * center;
  return out;
}

}  // namespace mixvar
