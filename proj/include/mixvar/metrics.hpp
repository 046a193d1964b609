#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "mixvar/errors.hpp"

namespace mixvar {

/// Mann-Whitney AUC: P(score+ > score-) + P(tie) / 2, via midranks.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& outcomes) {
  if (scores.size() != outcomes.size()) throw DimensionMismatch("roc_auc scores vs outcomes");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (outcomes[order[k]] != 0) rank_sum += midrank;
    i = j;
  }
  for (int o : outcomes) (o != 0 ? pos : neg)++;
  if (pos == 0 || neg == 0) throw SingleClass("roc_auc");
  const double np = static_cast<double>(pos), nn = static_cast<double>(neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// fair: second term averaged over the m(m-1) distinct pairs.
// plain: averaged over all m^2 pairs, including the zero diagonal.
enum class CrpsEstimator { fair, plain };

/// Sample CRPS  mean|X - y| - 0.5 * mean|X - X'|, sorted O(m log m) form.
inline double crps_sample(std::vector<double> draws, double outcome, CrpsEstimator est = CrpsEstimator::fair) {
  const std::size_t m = draws.size();
  if (m < 2) throw TooFewDraws("crps_sample needs at least 2 draws");
  std::sort(draws.begin(), draws.end());
  double abs_err = 0.0, pair_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    abs_err += std::abs(draws[i] - outcome);
    // sum_{i<j} (x_(j) - x_(i)) = sum_i x_(i) (2i - m + 1), zero-based i
    pair_sum += draws[i] * (2.0 * static_cast<double>(i) - static_cast<double>(m) + 1.0);
  }
  const double md = static_cast<double>(m);
  const double denom = est == CrpsEstimator::fair ? md * (md - 1.0) : md * md;
  return std::max(0.0, abs_err / md - pair_sum / denom);
}

struct ScoreRecord {
  std::string model, dataset, variable;
  int horizon = 1;
  std::string subsample;
  double score = 0.0;
};

struct ScoreCell {
  std::string model, dataset, variable;
  int horizon = 1;
  std::string subsample;
  double mean = 0.0;   // average raw score
  double ratio = 0.0;  // mean over the benchmark's mean, 1 for the benchmark
  std::size_t count = 0;
};

/// Averages scores per (model, dataset, variable, horizon, subsample) and
/// divides by the benchmark model's average in the same cell.
inline std::vector<ScoreCell> score_table(const std::vector<ScoreRecord>& scores, const std::string& benchmark) {
  using Key = std::tuple<std::string, std::string, int, std::string>;  // dataset, variable, horizon, subsample
  std::map<std::pair<std::string, Key>, std::pair<double, std::size_t>> acc;
  for (const auto& s : scores) {
    auto& a = acc[{s.model, Key{s.dataset, s.variable, s.horizon, s.subsample}}];
    a.first += s.score;
    ++a.second;
  }
  std::vector<ScoreCell> out;
  for (const auto& [k, a] : acc) {
    const auto& [model, cell] = k;
    const auto bench = acc.find({benchmark, cell});
    if (bench == acc.end())
      throw MissingBenchmark(benchmark + " for " + std::get<0>(cell) + "/" + std::get<1>(cell) + "/h" +
                             std::to_string(std::get<2>(cell)));
    ScoreCell c{model, std::get<0>(cell), std::get<1>(cell), std::get<2>(cell), std::get<3>(cell), 0.0, 0.0, a.second};
    c.mean = a.first / static_cast<double>(a.second);
    const double b = bench->second.first / static_cast<double>(bench->second.second);
    c.ratio = c.mean / b;
    out.push_back(c);
  }
  return out;
}

}  // namespace mixvar
