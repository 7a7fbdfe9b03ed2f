#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scorecheck/combine.hpp"
#include "scorecheck/distributions.hpp"
#include "scorecheck/model.hpp"
#include "scorecheck/rng.hpp"
#include "scorecheck/samplers.hpp"

namespace scorecheck {

/// d/dalpha log N(theta2 | mean, alpha * variance) at alpha = 1.
double score_normal_variance(double theta2, double mean, double variance);
/// d/dalpha log N(theta2 | mean, alpha^2 * variance) at alpha = 1; twice the
/// variance-scale score.
double score_normal_sd(double theta2, double mean, double variance);
/// d/dalpha log N(theta2 | mean + alpha, variance) at alpha = 0.
double score_normal_mean(double theta2, double mean, double variance);

/// Dispersion score of the double binomial at unit dispersion:
/// 1/2 - D/2, plus d log c / d tau at 1 when `include_logc`.
double score_double_binomial_dispersion(int k, const DoubleBinomialParams& params, bool include_logc);

/// log p(theta2 | alpha) for the numeric expansion.
using LogPrior = std::function<double(double theta2, double alpha)>;

/// 1e-5 * max(1, |alpha0|)
double default_fd_step(double alpha0);

/// Central difference of `log_prior` in alpha at alpha0. A missing `step`
/// selects `default_fd_step`.
double score_numeric(const LogPrior& log_prior, double alpha0, double theta2, std::optional<double> step = {});

enum class ExpansionKind { normal_variance, normal_sd, normal_mean, double_binomial_dispersion, numeric };

const char* to_string(ExpansionKind kind);
ExpansionKind expansion_kind_from_string(const std::string& name);

/// Conditional prior of the checked parameter given the link values.
using ConditionalPrior = std::variant<NormalParams, DoubleBinomialParams>;

/// Direction of the prior expansion. At alpha0 the expanded prior equals the
/// base conditional prior, which is what reference draws come from.
struct ExpansionFamily {
  ExpansionKind kind = ExpansionKind::normal_variance;
  /// numeric only: log density of theta2 under the expanded normal prior.
  std::function<double(double theta2, double alpha, const NormalParams& base)> log_prior;
  double alpha0 = 1.0;
  std::optional<double> step;
  /// double_binomial_dispersion only.
  bool include_logc = true;

  static ExpansionFamily normal_variance() { return {}; }
  static ExpansionFamily normal_sd() { return {ExpansionKind::normal_sd, {}, 1.0, {}, true}; }
  static ExpansionFamily normal_mean() { return {ExpansionKind::normal_mean, {}, 0.0, {}, true}; }
  static ExpansionFamily double_binomial_dispersion(bool include_logc = true) {
    return {ExpansionKind::double_binomial_dispersion, {}, 1.0, {}, include_logc};
  }
  static ExpansionFamily numeric(std::function<double(double, double, const NormalParams&)> log_prior,
                                 double alpha0, std::optional<double> step = {}) {
    return {ExpansionKind::numeric, std::move(log_prior), alpha0, step, true};
  }

  /// Throws ParameterError if the family cannot score values from `prior`.
  void check_compatible(const ConditionalPrior& prior) const;
  double score(double theta2, const ConditionalPrior& prior) const;
};

/// G draws from `prior` and their scores. Requires G >= 100.
std::vector<double> reference_scores(const ExpansionFamily& expansion, const ConditionalPrior& prior,
                                     std::size_t count, Rng& rng);

/// Fraction of references >= observed.
double empirical_pvalue(double observed, std::span<const double> references);

struct CheckConfig {
  /// chain.seed is replaced by a stream derived from `seed` and the group.
  ChainConfig chain;
  std::size_t reference_draws = 2000;
  ExpansionFamily expansion;
  CombineConfig combine;
  FitMode mode;
  std::uint64_t seed = 0;
  /// Worker threads over posterior draws; 0 means hardware concurrency.
  unsigned jobs = 1;
};

struct DrawRecord {
  double beta = 0.0;
  double gamma = 0.0;
  double theta2 = 0.0;
  double score_observed = 0.0;
  double p_value = 0.0;
};

struct ScoreCheckResult {
  std::size_t group = 0;
  std::string label;
  std::vector<DrawRecord> per_draw;
  CombineResult combined;
  std::vector<ParameterDiagnostics> parent_diagnostics;
  /// Effective chain seed used for the parent fit.
  std::uint64_t chain_seed = 0;

  std::vector<double> pvalues() const;
  /// Columns m, score_observed, p_value; m is 1-based.
  std::string pvalues_csv() const;
};

/// Sequential check of one held-out group: parent Gibbs fit, one exact child
/// draw per retained link draw, observed score against G fresh reference
/// scores per draw, and both combiners. Draw m uses stream
/// (seed, child_draw, group, m), so results do not depend on `jobs`.
ScoreCheckResult run_group_check(const GroupedDataset& data, std::size_t held_out, const ModelHyperParams& hyper,
                                 const CheckConfig& cfg);

}  // namespace scorecheck
