#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scorecheck/distributions.hpp"
#include "scorecheck/model.hpp"
#include "scorecheck/rng.hpp"

namespace scorecheck {

struct ChainConfig {
  std::size_t iterations = 12000;
  std::size_t burn_in = 2000;
  std::size_t thin = 10;
  std::uint64_t seed = 0;

  void validate() const;
  /// floor((iterations - burn_in) / thin)
  std::size_t retained() const;
};

/// Departures from the full model used by oracle comparisons and tests.
struct FitMode {
  /// Clamp gamma to this value instead of sampling it.
  std::optional<double> fixed_gamma;
  /// Improper uniform prior on beta instead of the model's normal prior.
  bool flat_beta_prior = false;
  /// Drop the likelihood so the chain targets the prior.
  bool ignore_likelihood = false;

  void validate() const;
};

/// Retained draws, row-major: row r holds one draw of every named parameter.
class PosteriorDraws {
 public:
  PosteriorDraws(std::vector<std::string> names, ChainConfig meta);

  const std::vector<std::string>& names() const noexcept { return names_; }
  const ChainConfig& meta() const noexcept { return meta_; }
  std::size_t rows() const noexcept { return names_.empty() ? 0 : values_.size() / names_.size(); }
  std::size_t cols() const noexcept { return names_.size(); }

  double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
  std::size_t index_of(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::vector<double> column(std::size_t col) const;

  void append_row(std::span<const double> row);

  /// Header of parameter names, then one line per retained draw.
  std::string to_csv() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  ChainConfig meta_;
};

/// Full conditionals of the parent model. `use_data = false` drops the
/// likelihood terms.
NormalParams theta_conditional(const Group& g, double beta, double gamma, double re_variance, bool use_data = true);
/// Flat prior when `flat_prior`; otherwise hyper.beta_prior.
NormalParams beta_conditional(std::span<const double> theta, const ModelHyperParams& hyper, bool flat_prior = false);
InvGammaParams gamma_conditional(const GroupedDataset& data, std::span<const double> theta,
                                 const ModelHyperParams& hyper, bool use_data = true);

/// Gibbs sampler for the parent model. Columns: "beta", "gamma", then
/// "theta[<label>]" for each parent group. The chain is driven by the stream
/// (cfg.seed, parent_chain).
PosteriorDraws gibbs_parent(const GroupedDataset& parent, const ModelHyperParams& hyper,
                            const ChainConfig& cfg, const FitMode& mode = {});

/// Conjugate posterior of the held-out group's theta given the link values.
NormalParams child_posterior(std::span<const double> child, double beta, double gamma, double re_variance);

/// One exact draw from `child_posterior`.
double child_draw(std::span<const double> child, double beta, double gamma, double re_variance, Rng& rng);

struct ParameterDiagnostics {
  std::string name;
  double ess = 0.0;
  /// Split R-hat; absent for a degenerate (constant) parameter.
  std::optional<double> rhat;
  /// All draws identical: ESS is reported as 1.
  bool degenerate = false;
};

/// Effective sample size (Geyer initial monotone sequence) and split R-hat
/// for every column. Multiple chains must share names and lengths. Requires
/// at least 10 draws per chain.
std::vector<ParameterDiagnostics> diagnostics(std::span<const PosteriorDraws> chains);
std::vector<ParameterDiagnostics> diagnostics(const PosteriorDraws& draws);

/// Scalar versions over raw chains of equal length.
double effective_sample_size(std::span<const std::vector<double>> chains);
std::optional<double> split_rhat(std::span<const std::vector<double>> chains);

}  // namespace scorecheck
