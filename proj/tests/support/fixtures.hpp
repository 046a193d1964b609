#pragma once

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/model.hpp"
#include "mixvar/random.hpp"

namespace fixture {

// Panel with one binary, one censored (threshold -0.3) and one unrestricted
// variable, roughly standardized, with about 10% of entries missing.
inline mixvar::MixedPanel small_mixed_panel(Eigen::Index rows, mixvar::Rng& rng, double missing = 0.1) {
  using mixvar::VariableKind;
  mixvar::MixedPanel p;
  p.specs = {{"B", VariableKind::binary, 0.0, mixvar::Transform::level},
             {"C", VariableKind::censored, -0.3, mixvar::Transform::level},
             {"U", VariableKind::unrestricted, 0.0, mixvar::Transform::level}};
  p.values = Eigen::MatrixXd::Zero(rows, 3);
  p.observed = mixvar::BoolMatrix::Constant(rows, 3, true);
  for (Eigen::Index t = 0; t < rows; ++t) {
    p.values(t, 0) = rng.uniform() < 0.4 ? 1.0 : 0.0;
    p.values(t, 1) = std::max(-0.3, rng.normal());
    p.values(t, 2) = rng.normal();
    for (Eigen::Index i = 0; i < 3; ++i)
      if (rng.uniform() < missing) {
        p.observed(t, i) = false;
        p.values(t, i) = 0.0;
      }
  }
  return p;
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, mixvar::Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n) + Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * s * d.asDiagonal();
}

inline mixvar::ModelParams random_params(Eigen::Index n, Eigen::Index P, Eigen::Index T, int n_binary,
                                         mixvar::Rng& rng) {
  auto m = mixvar::ModelParams::zeros(n, P, T, n_binary);
  for (Eigen::Index i = 0; i < m.lags.size(); ++i) m.lags.data()[i] = 0.15 * rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) m.intercept[i] = 0.3 * rng.normal();
  m.sigma = random_spd(n, rng);
  for (Eigen::Index t = 0; t < T; ++t) m.outlier[t] = rng.uniform() < 0.2 ? 4.0 : 1.0;
  return m;
}

}  // namespace fixture
