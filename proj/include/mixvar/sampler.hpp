#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/latent_gibbs.hpp"
#include "mixvar/model.hpp"
#include "mixvar/param_gibbs.hpp"
#include "mixvar/random.hpp"
#include "mixvar/truncated_hmc.hpp"

namespace mixvar {

struct ChainConfig {
  Eigen::Index lags = 5;
  std::size_t iterations = 12000;
  std::size_t burn_in = 3000;
  std::size_t thin = 3;
  std::uint64_t seed = 1;
  bool heteroskedastic = true;
  bool sample_horseshoe = true;
  double initial_global_scale = 0.1;
  // Prior precision for latent presample entries (standardized units).
  double presample_precision = 0.1;
  HmcConfig hmc;
  PriorConfig prior;

  std::size_t retained() const {
    if (iterations <= burn_in || thin == 0) return 0;
    return (iterations - burn_in) / thin;
  }
};

/// Current state of one chain: parameters plus the complete data matrix
/// (observed entries fixed, latent entries at their current draw).
struct ChainState {
  ModelParams params;
  Eigen::MatrixXd y;
};

struct SweepDiagnostics {
  std::size_t hmc_events = 0;
  double travel_time = 0.0;
  bool hmc_rejected = false;
  bool covariance_accepted = false;
};

struct PosteriorDraws {
  std::vector<ModelParams> params;
  std::vector<Eigen::MatrixXd> latent;  // complete (T + P) x n data per draw
  std::vector<SweepDiagnostics> diagnostics;  // one per sweep, burn-in included

  std::size_t size() const { return params.size(); }

  double covariance_acceptance() const {
    if (diagnostics.empty()) return 0.0;
    std::size_t acc = 0;
    for (const auto& d : diagnostics) acc += d.covariance_accepted;
    return static_cast<double>(acc) / static_cast<double>(diagnostics.size());
  }
};

// Raised when a chain hits an unrecoverable numerical failure; carries the
// state at the failing sweep.
class ChainFailure : public NumericalError {
 public:
  ChainFailure(const std::string& what, std::size_t iteration, ChainState state)
      : NumericalError(what + " (sweep " + std::to_string(iteration) + ")"),
        iteration(iteration),
        state(std::move(state)) {}
  std::size_t iteration;
  ChainState state;
};

/// Gibbs sampler for one standardized panel. Holds the time partition and
/// latent layout, which do not change across sweeps.
class MixedVarSampler {
 public:
  MixedVarSampler(MixedPanel panel, ChainConfig cfg)
      : panel_(std::move(panel)), cfg_(std::move(cfg)) {
    panel_.validate();
    if (cfg_.lags < 1) throw ConfigError("lag order must be at least 1");
    if (panel_.rows() <= cfg_.lags) throw ConfigError("panel has too few rows for the lag order");
    partition_ = build_partition(panel_);
    layout_ = build_layout(panel_, partition_);
    y_obs_ = observed_vector(panel_, layout_);
  }

  const MixedPanel& panel() const { return panel_; }
  const ChainConfig& config() const { return cfg_; }
  const LatentLayout& layout() const { return layout_; }
  Eigen::Index T() const { return panel_.rows() - cfg_.lags; }

  ChainState initial_state() const {
    ChainState s;
    s.params = ModelParams::zeros(panel_.n(), cfg_.lags, T(), panel_.n_binary());
    s.params.global_scale = cfg_.initial_global_scale;
    s.params.outlier_prob = cfg_.prior.outlier_a / (cfg_.prior.outlier_a + cfg_.prior.outlier_b);
    s.y = initialize_latents(panel_);
    return s;
  }

  SystemMatrices system(const ModelParams& params) const {
    SystemMatrices sys;
    sys.n = panel_.n();
    sys.P = cfg_.lags;
    sys.T = T();
    sys.blocks.push_back(Eigen::MatrixXd::Identity(sys.n, sys.n));
    for (Eigen::Index p = 1; p <= sys.P; ++p) sys.blocks.push_back(-params.lag(p));
    sys.intercept = params.intercept;
    Eigen::LLT<Eigen::MatrixXd> llt(params.sigma);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma");
    sys.sigma_inv = llt.solve(Eigen::MatrixXd::Identity(sys.n, sys.n));
    sys.outlier = params.outlier;
    sys.presample_precision = cfg_.presample_precision;
    sys.layout = layout_;
    return sys;
  }

  // Latent block only.
  HmcDraw sample_latent(ChainState& s, Rng& rng) const {
    if (layout_.n_latent() == 0) return HmcDraw{};
    const LatentConditional cond = latent_conditional(system(s.params), y_obs_);
    const Eigen::VectorXd current = gather_latent(s.y, layout_);
    HmcDraw draw = truncated_gaussian_draw(cond, current, cfg_.hmc, rng);
    scatter_latent(draw.state, layout_, s.y);
    return draw;
  }

  /// One sweep: latent draw, coefficients, horseshoe scales, covariance
  /// (PX-MH), outlier states.
  SweepDiagnostics sweep(ChainState& s, Rng& rng) const {
    SweepDiagnostics diag;
    const HmcDraw draw = sample_latent(s, rng);
    diag.hmc_events = draw.events;
    diag.travel_time = draw.travel_time;
    diag.hmc_rejected = draw.rejected;

    sample_coefficients(s.y, s.params, cfg_.prior, rng);
    if (cfg_.sample_horseshoe) sample_horseshoe(s.params, rng);

    const Eigen::MatrixXd eps = var_residuals(s.params, s.y);
    const Eigen::MatrixXd scaled = s.params.outlier.cwiseSqrt().cwiseInverse().asDiagonal() * eps;
    diag.covariance_accepted = sample_covariance_pxmh(scaled, s.params, rng);
    if (cfg_.heteroskedastic) sample_outliers(eps, s.params, cfg_.prior, rng);
    return diag;
  }

  /// Runs the configured number of sweeps from `state`, keeping every
  /// `thin`-th sweep after burn-in.
  PosteriorDraws run(ChainState state, Rng& rng) const {
    PosteriorDraws out;
    const std::size_t keep = cfg_.retained();
    out.params.reserve(keep);
    out.latent.reserve(keep);
    out.diagnostics.reserve(cfg_.iterations);
    for (std::size_t it = 0; it < cfg_.iterations; ++it) {
      try {
        out.diagnostics.push_back(sweep(state, rng));
      } catch (const NumericalError& e) {
        throw ChainFailure(e.what(), it, state);
      }
      if (it >= cfg_.burn_in && (it - cfg_.burn_in + 1) % cfg_.thin == 0 && out.params.size() < keep) {
        out.params.push_back(state.params);
        out.latent.push_back(state.y);
      }
    }
    return out;
  }

 private:
  MixedPanel panel_;
  ChainConfig cfg_;
  std::vector<PartitionRow> partition_;
  LatentLayout layout_;
  Eigen::VectorXd y_obs_;
};

/// Runs one chain on a standardized panel, seeded from cfg.seed.
inline PosteriorDraws run_chain(const MixedPanel& panel, const ChainConfig& cfg) {
  MixedVarSampler sampler(panel, cfg);
  Rng rng(cfg.seed);
  return sampler.run(sampler.initial_state(), rng);
}

}  // namespace mixvar
