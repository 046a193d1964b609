#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/errors.hpp"

namespace mixvar {

enum class VariableKind { binary, censored, unrestricted };

// Transformation codes as used in variable metadata files.
enum class Transform { level = 0, log = 1, log_diff = 2 };

inline const char* to_string(VariableKind k) {
  switch (k) {
    case VariableKind::binary: return "binary";
    case VariableKind::censored: return "censored";
    case VariableKind::unrestricted: return "unrestricted";
  }
  return "?";
}

struct VariableSpec {
  std::string code;
  VariableKind kind = VariableKind::unrestricted;
  // Censoring bound: observations are max(latent, threshold).
  double threshold = 0.0;
  Transform transform = Transform::level;
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Observed data for a mixed panel. Rows are time (including presample
/// rows), columns follow `specs`, ordered binary block, censored block,
/// unrestricted block.
struct MixedPanel {
  std::vector<VariableSpec> specs;
  Eigen::MatrixXd values;
  BoolMatrix observed;
  std::vector<std::string> dates;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index n() const { return static_cast<Eigen::Index>(specs.size()); }

  int count(VariableKind k) const {
    int c = 0;
    for (const auto& s : specs) c += s.kind == k;
    return c;
  }
  int n_binary() const { return count(VariableKind::binary); }
  int n_censored() const { return count(VariableKind::censored); }
  int n_unrestricted() const { return count(VariableKind::unrestricted); }

  bool at_bound(Eigen::Index t, Eigen::Index i) const {
    const auto& s = specs[static_cast<std::size_t>(i)];
    return s.kind == VariableKind::censored && observed(t, i) && values(t, i) <= s.threshold;
  }

  // Throws ConfigError when an invariant is violated.
  void validate() const {
    const Eigen::Index n_vars = n();
    if (values.cols() != n_vars || observed.rows() != values.rows() ||
        observed.cols() != n_vars) {
      throw ConfigError("panel shape does not match variable specs");
    }
    int block = 0;
    for (Eigen::Index i = 0; i < n_vars; ++i) {
      const auto& s = specs[static_cast<std::size_t>(i)];
      const int b = static_cast<int>(s.kind);
      if (b < block) throw ConfigError("variables must be ordered binary, censored, unrestricted");
      block = b;
      if (!std::isfinite(s.threshold)) throw ConfigError("threshold of " + s.code + " not finite");
      if (s.kind == VariableKind::binary && s.transform != Transform::level)
        throw ConfigError("binary variable " + s.code + " must use transform code 0");
      for (Eigen::Index t = 0; t < rows(); ++t) {
        if (!observed(t, i)) continue;
        const double v = values(t, i);
        if (!std::isfinite(v)) throw ConfigError("non-finite observed value in " + s.code);
        if (s.kind == VariableKind::binary && v != 0.0 && v != 1.0)
          throw ConfigError("binary variable " + s.code + " has value outside {0,1}");
        if (s.kind == VariableKind::censored && v < s.threshold)
          throw ConfigError("censored variable " + s.code + " below its threshold");
      }
    }
  }
};

// --- transformations ------------------------------------------------------

// Missing entries are NaN in series-level helpers.
inline Eigen::VectorXd apply_transform(const VariableSpec& spec, const Eigen::VectorXd& raw) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd out(raw.size());
  auto checked_log = [&](double x) {
    if (std::isnan(x)) return nan;
    if (!(x > 0.0)) throw NonPositiveLog(spec.code + ": " + std::to_string(x));
    return std::log(x);
  };
  switch (spec.transform) {
    case Transform::level:
      out = raw;
      break;
    case Transform::log:
      for (Eigen::Index t = 0; t < raw.size(); ++t) out[t] = checked_log(raw[t]);
      break;
    case Transform::log_diff:
      if (raw.size() > 0) {
        checked_log(raw[0]);
        out[0] = nan;
      }
      for (Eigen::Index t = 1; t < raw.size(); ++t) {
        const double cur = checked_log(raw[t]);
        const double prev = checked_log(raw[t - 1]);
        out[t] = 100.0 * (cur - prev);
      }
      break;
  }
  return out;
}

inline std::vector<bool> censor_threshold_mask(const Eigen::VectorXd& series, double cutoff = 0.25) {
  std::vector<bool> mask(static_cast<std::size_t>(series.size()), false);
  for (Eigen::Index t = 0; t < series.size(); ++t)
    mask[static_cast<std::size_t>(t)] = !std::isnan(series[t]) && series[t] <= cutoff;
  return mask;
}

// Recodes every observed censored entry at or below its threshold to the
// threshold itself.
inline MixedPanel recode_censored(MixedPanel panel) {
  for (Eigen::Index i = 0; i < panel.n(); ++i) {
    const auto& s = panel.specs[static_cast<std::size_t>(i)];
    if (s.kind != VariableKind::censored) continue;
    Eigen::VectorXd col = panel.values.col(i);
    for (Eigen::Index t = 0; t < col.size(); ++t)
      if (!panel.observed(t, i)) col[t] = std::numeric_limits<double>::quiet_NaN();
    const auto mask = censor_threshold_mask(col, s.threshold);
    for (Eigen::Index t = 0; t < col.size(); ++t)
      if (mask[static_cast<std::size_t>(t)]) panel.values(t, i) = s.threshold;
  }
  return panel;
}

// --- standardization -------------------------------------------------------

struct StandardizationState {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  static StandardizationState identity(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
  }

  double to_standard(Eigen::Index i, double v) const { return (v - center[i]) / scale[i]; }
  double to_original(Eigen::Index i, double v) const { return v * scale[i] + center[i]; }
};

struct StandardizedPanel {
  MixedPanel panel;
  StandardizationState state;
};

/// Centers and scales every non-binary column by its observed mean and
/// sample standard deviation (divisor n - 1). Censoring thresholds move
/// with their columns.
inline StandardizedPanel standardize(const MixedPanel& panel) {
  const Eigen::Index n = panel.n();
  StandardizedPanel out{panel, StandardizationState::identity(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& spec = out.panel.specs[static_cast<std::size_t>(i)];
    if (spec.kind == VariableKind::binary) continue;
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index t = 0; t < panel.rows(); ++t)
      if (panel.observed(t, i)) {
        sum += panel.values(t, i);
        ++count;
      }
    if (count < 2) throw DegenerateColumn(spec.code + " has fewer than 2 observations");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Eigen::Index t = 0; t < panel.rows(); ++t)
      if (panel.observed(t, i)) ss += (panel.values(t, i) - mean) * (panel.values(t, i) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(count - 1));
    if (!(sd > 0.0)) throw DegenerateColumn(spec.code + " has zero variance");
    out.state.center[i] = mean;
    out.state.scale[i] = sd;
    for (Eigen::Index t = 0; t < panel.rows(); ++t)
      if (panel.observed(t, i)) out.panel.values(t, i) = (panel.values(t, i) - mean) / sd;
    spec.threshold = (spec.threshold - mean) / sd;
  }
  return out;
}

// Maps a T x n matrix in standardized units back to original units.
inline Eigen::MatrixXd destandardize(const Eigen::MatrixXd& values, const StandardizationState& s) {
  Eigen::MatrixXd out = values;
  for (Eigen::Index i = 0; i < values.cols(); ++i)
    out.col(i) = (values.col(i).array() * s.scale[i] + s.center[i]).matrix();
  return out;
}

inline MixedPanel destandardize(const MixedPanel& panel, const StandardizationState& s) {
  MixedPanel out = panel;
  out.values = destandardize(panel.values, s);
  for (Eigen::Index i = 0; i < panel.n(); ++i) {
    auto& spec = out.specs[static_cast<std::size_t>(i)];
    spec.threshold = s.to_original(i, spec.threshold);
  }
  return out;
}

// --- time partition ----------------------------------------------------------

/// Partition of one time row into missing, restricted (observed binary or
/// censored at its bound) and observed entries, plus restriction signs for
/// every variable (+1: latent > bound, -1: latent <= bound, 0: none).
struct PartitionRow {
  std::vector<int> missing;
  std::vector<int> restricted;
  std::vector<int> observed;
  std::vector<int> sign;

  int n_latent() const { return static_cast<int>(missing.size() + restricted.size()); }
  int n_observed() const { return static_cast<int>(observed.size()); }
};

inline PartitionRow build_partition(const MixedPanel& panel, Eigen::Index t) {
  PartitionRow row;
  const Eigen::Index n = panel.n();
  row.sign.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ii = static_cast<int>(i);
    if (!panel.observed(t, i)) {
      row.missing.push_back(ii);
      continue;
    }
    const auto& spec = panel.specs[static_cast<std::size_t>(i)];
    switch (spec.kind) {
      case VariableKind::binary:
        row.restricted.push_back(ii);
        row.sign[static_cast<std::size_t>(i)] = 2 * static_cast<int>(panel.values(t, i)) - 1;
        break;
      case VariableKind::censored:
        if (panel.at_bound(t, i)) {
          row.restricted.push_back(ii);
          row.sign[static_cast<std::size_t>(i)] = -1;
        } else {
          row.observed.push_back(ii);
        }
        break;
      case VariableKind::unrestricted:
        row.observed.push_back(ii);
        break;
    }
  }
  return row;
}

inline std::vector<PartitionRow> build_partition(const MixedPanel& panel) {
  std::vector<PartitionRow> rows;
  rows.reserve(static_cast<std::size_t>(panel.rows()));
  for (Eigen::Index t = 0; t < panel.rows(); ++t) rows.push_back(build_partition(panel, t));
  return rows;
}

}  // namespace mixvar
