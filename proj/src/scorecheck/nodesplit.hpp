#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scorecheck/model.hpp"
#include "scorecheck/samplers.hpp"

namespace scorecheck {

struct NodeSplitConfig {
  /// Shared by both halves so they retain the same number of draws;
  /// chain.seed is replaced by streams derived from `seed`.
  ChainConfig chain;
  /// fixed_gamma clamps gamma in both halves; flat_beta_prior applies to the
  /// rest-of-model fit.
  FitMode mode;
  std::uint64_t seed = 0;
};

struct NodeSplitResult {
  std::size_t group = 0;
  std::string label;
  std::vector<double> rep_draws;
  std::vector<double> lik_draws;
  std::vector<double> diff_draws;
  /// Fraction of diff_draws <= 0.
  double p_hat = 0.5;
  /// 2 min(p_hat, 1 - p_hat)
  double conflict_p = 1.0;

  /// Columns r, rep, lik, diff; r is 1-based.
  std::string draws_csv() const;
};

/// Node split at theta_k. The prior part replicates theta_k ~ N(beta, re_variance)
/// from a parent fit without group k; the likelihood part puts a flat prior on
/// theta_k and uses only group k, with gamma either clamped or given its own
/// inverse-gamma posterior. The halves run on independent streams.
NodeSplitResult node_split_check(const GroupedDataset& data, std::size_t group, const ModelHyperParams& hyper,
                                 const NodeSplitConfig& cfg);

/// 2 min(P, 1 - P) with P the fraction of differences <= 0.
double node_split_pvalue(std::span<const double> diff_draws);

}  // namespace scorecheck
