#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mixvar/band_linalg.hpp"
#include "mixvar/data_model.hpp"
#include "mixvar/model.hpp"
#include "mixvar/truncated_hmc.hpp"

namespace mixvar {

/// Index maps between the stacked vector y (time-major, (T + P) n entries)
/// and its latent / observed subvectors. These play the role of the
/// selection matrices S_l and S_o without materializing them.
struct LatentLayout {
  Eigen::Index n = 0;
  Eigen::Index rows = 0;  // T + P
  std::vector<Eigen::Index> full_to_latent;  // -1 for observed entries
  std::vector<Eigen::Index> latent_to_full;
  std::vector<Eigen::Index> observed_to_full;
  // Box of each latent coordinate implied by the restriction signs.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXi sign;

  Eigen::Index n_latent() const { return static_cast<Eigen::Index>(latent_to_full.size()); }
  Eigen::Index time_of(Eigen::Index full) const { return full / n; }
  Eigen::Index var_of(Eigen::Index full) const { return full % n; }
};

inline LatentLayout build_layout(const MixedPanel& panel, const std::vector<PartitionRow>& partition) {
  LatentLayout lay;
  lay.n = panel.n();
  lay.rows = panel.rows();
  const Eigen::Index total = lay.n * lay.rows;
  lay.full_to_latent.assign(static_cast<std::size_t>(total), -1);
  std::vector<double> lo, hi;
  std::vector<int> sg;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < lay.rows; ++t) {
    const PartitionRow& row = partition[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < lay.n; ++i) {
      const Eigen::Index f = t * lay.n + i;
      const bool is_observed = std::find(row.observed.begin(), row.observed.end(), i) != row.observed.end();
      if (is_observed) {
        lay.observed_to_full.push_back(f);
        continue;
      }
      lay.full_to_latent[static_cast<std::size_t>(f)] = lay.n_latent();
      lay.latent_to_full.push_back(f);
      const int s = row.sign[static_cast<std::size_t>(i)];
      const auto& spec = panel.specs[static_cast<std::size_t>(i)];
      const double bound = spec.kind == VariableKind::binary ? 0.0 : spec.threshold;
      lo.push_back(s > 0 ? bound : -inf);
      hi.push_back(s < 0 ? bound : inf);
      sg.push_back(s);
    }
  }
  lay.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  lay.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  lay.sign = Eigen::Map<Eigen::VectorXi>(sg.data(), static_cast<Eigen::Index>(sg.size()));
  return lay;
}

/// Stacked system M y = m + eps of the VAR over the likelihood rows.
/// M is kept in block form: coefficient block C_0 = I_n and C_p = -A_p.
struct SystemMatrices {
  Eigen::Index n = 0;
  Eigen::Index P = 0;
  Eigen::Index T = 0;
  std::vector<Eigen::MatrixXd> blocks;  // C_0..C_P
  Eigen::VectorXd intercept;
  Eigen::MatrixXd sigma_inv;
  Eigen::VectorXd outlier;
  // Prior precision of presample coordinates (rows 0..P-1), which the VAR
  // likelihood does not pin down on its own.
  double presample_precision = 0.0;
  LatentLayout layout;

  Eigen::Index stacked_size() const { return (T + P) * n; }

  // Dense T n x (T + P) n matrix M; intended for tests and small systems.
  Eigen::MatrixXd dense_M() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(T * n, stacked_size());
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index p = 0; p <= P; ++p) M.block(t * n, (t + P - p) * n, n, n) = blocks[p];
    return M;
  }

  Eigen::VectorXd stacked_intercept() const { return intercept.replicate(T, 1); }

  // M y - m for a stacked vector y.
  Eigen::VectorXd residuals(const Eigen::VectorXd& y) const {
    if (y.size() != stacked_size()) throw DimensionMismatch("residuals: stacked vector");
    Eigen::VectorXd e(T * n);
    for (Eigen::Index t = 0; t < T; ++t) {
      Eigen::VectorXd r = -intercept;
      for (Eigen::Index p = 0; p <= P; ++p) r.noalias() += blocks[p] * y.segment((t + P - p) * n, n);
      e.segment(t * n, n) = r;
    }
    return e;
  }
};

inline SystemMatrices assemble_system(const ModelParams& params, const MixedPanel& panel,
                                      const std::vector<PartitionRow>& partition,
                                      double presample_precision = 0.1) {
  SystemMatrices sys;
  sys.n = panel.n();
  sys.P = params.lag_order();
  params.check_dims(sys.n, sys.P);
  if (panel.rows() <= sys.P) throw DimensionMismatch("panel needs more rows than lags");
  sys.T = panel.rows() - sys.P;
  if (params.outlier.size() != sys.T) throw DimensionMismatch("outlier vector length");
  if (static_cast<Eigen::Index>(partition.size()) != panel.rows())
    throw DimensionMismatch("partition rows");
  sys.blocks.push_back(Eigen::MatrixXd::Identity(sys.n, sys.n));
  for (Eigen::Index p = 1; p <= sys.P; ++p) sys.blocks.push_back(-params.lag(p));
  sys.intercept = params.intercept;
  Eigen::LLT<Eigen::MatrixXd> llt(params.sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma");
  sys.sigma_inv = llt.solve(Eigen::MatrixXd::Identity(sys.n, sys.n));
  sys.outlier = params.outlier;
  sys.presample_precision = presample_precision;
  sys.layout = build_layout(panel, partition);
  return sys;
}

// Stacked vector of observed entries (time-major) from a panel.
inline Eigen::VectorXd observed_vector(const MixedPanel& panel, const LatentLayout& lay) {
  Eigen::VectorXd yo(static_cast<Eigen::Index>(lay.observed_to_full.size()));
  for (std::size_t k = 0; k < lay.observed_to_full.size(); ++k) {
    const Eigen::Index f = lay.observed_to_full[k];
    yo[static_cast<Eigen::Index>(k)] = panel.values(lay.time_of(f), lay.var_of(f));
  }
  return yo;
}

/// Conditional law of the latent entries given observed data and
/// parameters: a Gaussian with banded precision, truncated to the box
/// implied by the restriction signs.
struct LatentConditional : TruncatedGaussian {
  Eigen::VectorXi sign;
};

// Bandwidth of the latent precision: the largest number of latent entries
// that follow a latent entry within (P + 1) n - 1 stacked positions.
inline Eigen::Index latent_bandwidth(const LatentLayout& lay, Eigen::Index P) {
  const Eigen::Index reach = (P + 1) * lay.n - 1;
  Eigen::Index bw = 0;
  const auto& l2f = lay.latent_to_full;
  std::size_t hi = 0;
  for (std::size_t k = 0; k < l2f.size(); ++k) {
    if (hi < k) hi = k;
    while (hi + 1 < l2f.size() && l2f[hi + 1] - l2f[k] <= reach) ++hi;
    bw = std::max<Eigen::Index>(bw, static_cast<Eigen::Index>(hi - k));
  }
  return bw;
}

/// Precision K = H_l' Omega^{-1} H_l (+ presample prior) and linear term
/// b = H_l' Omega^{-1} (m - H_o y_o), assembled block by block in banded
/// storage; the mean solves K mu = b by banded Cholesky.
inline LatentConditional latent_conditional(const SystemMatrices& sys, const Eigen::VectorXd& y_obs) {
  const LatentLayout& lay = sys.layout;
  const Eigen::Index n = sys.n;
  const Eigen::Index P = sys.P;
  const Eigen::Index dim = lay.n_latent();
  if (y_obs.size() != static_cast<Eigen::Index>(lay.observed_to_full.size()))
    throw DimensionMismatch("latent_conditional: observed vector");
  LatentConditional out;
  out.sign = lay.sign;
  if (dim == 0) {
    out.precision = BandedSpd(0, 0);
    out.factor = BandedLower(0, 0);
    out.linear = out.mean = out.lower = out.upper = Eigen::VectorXd(0);
    return out;
  }
  const Eigen::Index bw = latent_bandwidth(lay, P);
  BandedSpd K(dim, bw);

  // G_pq = C_p' Sigma^{-1} C_q, shared by all time rows up to 1 / o_t.
  std::vector<Eigen::MatrixXd> G(static_cast<std::size_t>((P + 1) * (P + 1)));
  for (Eigen::Index p = 0; p <= P; ++p)
    for (Eigen::Index q = 0; q <= P; ++q)
      G[static_cast<std::size_t>(p * (P + 1) + q)] = sys.blocks[p].transpose() * sys.sigma_inv * sys.blocks[q];

  const auto& f2l = lay.full_to_latent;
  for (Eigen::Index t = 0; t < sys.T; ++t) {
    const double w = 1.0 / sys.outlier[t];
    const Eigen::Index r = t + P;
    for (Eigen::Index p = 0; p <= P; ++p) {
      for (Eigen::Index q = 0; q <= p; ++q) {
        const Eigen::MatrixXd& g = G[static_cast<std::size_t>(p * (P + 1) + q)];
        // Rows at time r - q (later), columns at time r - p (earlier or same).
        for (Eigen::Index i = 0; i < n; ++i) {
          const Eigen::Index li = f2l[static_cast<std::size_t>((r - q) * n + i)];
          if (li < 0) continue;
          for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index lj = f2l[static_cast<std::size_t>((r - p) * n + j)];
            if (lj < 0) continue;
            if (p == q && lj > li) continue;  // diagonal block: lower half only
            // Entry (row time r-q var i, col time r-p var j) = C_q' W C_p (i, j).
            K.lower_ref(li, lj) += w * g(j, i);
          }
        }
      }
    }
  }
  for (Eigen::Index k = 0; k < dim; ++k)
    if (lay.time_of(lay.latent_to_full[static_cast<std::size_t>(k)]) < P)
      K.lower_ref(k, k) += sys.presample_precision;

  // Linear term: residuals of the VAR with latent entries set to zero.
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(sys.stacked_size());
  for (std::size_t k = 0; k < lay.observed_to_full.size(); ++k)
    y0[lay.observed_to_full[k]] = y_obs[static_cast<Eigen::Index>(k)];
  const Eigen::VectorXd e = -sys.residuals(y0);  // m - M y0
  Eigen::VectorXd g_full = Eigen::VectorXd::Zero(sys.stacked_size());
  for (Eigen::Index t = 0; t < sys.T; ++t) {
    const Eigen::VectorXd wt = sys.sigma_inv * e.segment(t * n, n) / sys.outlier[t];
    for (Eigen::Index p = 0; p <= P; ++p)
      g_full.segment((t + P - p) * n, n).noalias() += sys.blocks[p].transpose() * wt;
  }
  Eigen::VectorXd b(dim);
  for (Eigen::Index k = 0; k < dim; ++k) b[k] = g_full[lay.latent_to_full[static_cast<std::size_t>(k)]];

  static_cast<TruncatedGaussian&>(out) =
      TruncatedGaussian::from_precision(std::move(K), std::move(b), lay.lower, lay.upper);
  return out;
}

/// Feasible starting values in standardized units: binary entries at +-0.5
/// by observed sign, at-bound censored entries half a unit below their
/// threshold, missing entries at 0. Observed entries are copied.
inline Eigen::MatrixXd initialize_latents(const MixedPanel& panel) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(panel.rows(), panel.n());
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    for (Eigen::Index i = 0; i < panel.n(); ++i) {
      if (!panel.observed(t, i)) continue;
      const auto& spec = panel.specs[static_cast<std::size_t>(i)];
      if (spec.kind == VariableKind::binary)
        y(t, i) = panel.values(t, i) > 0.5 ? 0.5 : -0.5;
      else if (panel.at_bound(t, i))
        y(t, i) = spec.threshold - 0.5;
      else
        y(t, i) = panel.values(t, i);
    }
  }
  return y;
}

inline Eigen::VectorXd gather_latent(const Eigen::MatrixXd& y, const LatentLayout& lay) {
  Eigen::VectorXd out(lay.n_latent());
  for (Eigen::Index k = 0; k < lay.n_latent(); ++k) {
    const Eigen::Index f = lay.latent_to_full[static_cast<std::size_t>(k)];
    out[k] = y(lay.time_of(f), lay.var_of(f));
  }
  return out;
}

inline void scatter_latent(const Eigen::VectorXd& latent, const LatentLayout& lay, Eigen::MatrixXd& y) {
  for (Eigen::Index k = 0; k < lay.n_latent(); ++k) {
    const Eigen::Index f = lay.latent_to_full[static_cast<std::size_t>(k)];
    y(lay.time_of(f), lay.var_of(f)) = latent[k];
  }
}

// Stacked (time-major) vector of a (T + P) x n data matrix.
inline Eigen::VectorXd stack_rows(const Eigen::MatrixXd& y) {
  Eigen::VectorXd out(y.size());
  for (Eigen::Index t = 0; t < y.rows(); ++t) out.segment(t * y.cols(), y.cols()) = y.row(t).transpose();
  return out;
}

}  // namespace mixvar
