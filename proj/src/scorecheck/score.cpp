#include "scorecheck/score.hpp"

#include <algorithm>
#include <cmath>

#include "scorecheck/error.hpp"
#include "scorecheck/io.hpp"
#include "scorecheck/parallel.hpp"

namespace scorecheck {

namespace {

void check_variance(double variance) {
  if (!(std::isfinite(variance) && variance > 0.0)) throw ParameterError("score: variance must be positive");
}

std::string alpha_text(double a) { return format_double(a); }

}  // namespace

double score_normal_variance(double theta2, double mean, double variance) {
  check_variance(variance);
  const double d = theta2 - mean;
  return 0.5 * d * d / variance - 0.5;
}

double score_normal_sd(double theta2, double mean, double variance) {
  check_variance(variance);
  const double d = theta2 - mean;
  return d * d / variance - 1.0;
}

double score_normal_mean(double theta2, double mean, double variance) {
  check_variance(variance);
  return (theta2 - mean) / variance;
}

double score_double_binomial_dispersion(int k, const DoubleBinomialParams& params, bool include_logc) {
  validate(params);
  if (params.dispersion != 1.0) throw ParameterError("dispersion score is defined at dispersion 1");
  double s = 0.5 - 0.5 * binomial_deviance(k, params.trials, params.prob);
  if (include_logc) s += double_binomial_dlogc_at_unit(params.trials, params.prob);
  return s;
}

double default_fd_step(double alpha0) { return 1e-5 * std::max(1.0, std::abs(alpha0)); }

double score_numeric(const LogPrior& log_prior, double alpha0, double theta2, std::optional<double> step) {
  if (!log_prior) throw ParameterError("numeric score: no log-prior function");
  const double h = step.value_or(default_fd_step(alpha0));
  if (!(std::isfinite(h) && h > 0.0)) throw ParameterError("numeric score: step must be positive and finite");
  const double hi = log_prior(theta2, alpha0 + h);
  if (!std::isfinite(hi)) throw NumericError("numeric score: log prior not finite at alpha = " + alpha_text(alpha0 + h));
  const double lo = log_prior(theta2, alpha0 - h);
  if (!std::isfinite(lo)) throw NumericError("numeric score: log prior not finite at alpha = " + alpha_text(alpha0 - h));
  return (hi - lo) / (2.0 * h);
}

const char* to_string(ExpansionKind kind) {
  switch (kind) {
    case ExpansionKind::normal_variance: return "normal-variance";
    case ExpansionKind::normal_sd: return "normal-sd";
    case ExpansionKind::normal_mean: return "normal-mean";
    case ExpansionKind::double_binomial_dispersion: return "double-binomial-dispersion";
    case ExpansionKind::numeric: return "numeric";
  }
  return "unknown";
}

ExpansionKind expansion_kind_from_string(const std::string& name) {
  for (auto k : {ExpansionKind::normal_variance, ExpansionKind::normal_sd, ExpansionKind::normal_mean,
                 ExpansionKind::double_binomial_dispersion, ExpansionKind::numeric}) {
    if (name == to_string(k)) return k;
  }
  throw ParameterError("unknown expansion '" + name +
                       "' (expected normal-variance, normal-sd, normal-mean, double-binomial-dispersion or numeric)");
}

void ExpansionFamily::check_compatible(const ConditionalPrior& prior) const {
  const bool normal = std::holds_alternative<NormalParams>(prior);
  if (kind == ExpansionKind::double_binomial_dispersion) {
    if (normal) throw ParameterError("double-binomial expansion needs a double-binomial conditional prior");
    const auto& p = std::get<DoubleBinomialParams>(prior);
    validate(p);
    if (p.dispersion != 1.0) throw ParameterError("double-binomial conditional prior must have dispersion 1");
    return;
  }
  if (!normal) throw ParameterError(std::string(to_string(kind)) + " expansion needs a normal conditional prior");
  validate(std::get<NormalParams>(prior));
  if (kind == ExpansionKind::numeric && !log_prior) throw ParameterError("numeric expansion has no log-prior function");
}

double ExpansionFamily::score(double theta2, const ConditionalPrior& prior) const {
  check_compatible(prior);
  if (kind == ExpansionKind::double_binomial_dispersion) {
    const double k = std::round(theta2);
    if (k != theta2) throw ParameterError("double-binomial score needs an integer count");
    return score_double_binomial_dispersion(static_cast<int>(k), std::get<DoubleBinomialParams>(prior), include_logc);
  }
  const auto& p = std::get<NormalParams>(prior);
  switch (kind) {
    case ExpansionKind::normal_variance: return score_normal_variance(theta2, p.mean, p.variance);
    case ExpansionKind::normal_sd: return score_normal_sd(theta2, p.mean, p.variance);
    case ExpansionKind::normal_mean: return score_normal_mean(theta2, p.mean, p.variance);
    default: break;
  }
  const auto bound = [this, &p](double x, double a) { return log_prior(x, a, p); };
  return score_numeric(bound, alpha0, theta2, step);
}

std::vector<double> reference_scores(const ExpansionFamily& expansion, const ConditionalPrior& prior,
                                     std::size_t count, Rng& rng) {
  if (count < 100) throw ParameterError("reference scores: need G >= 100");
  expansion.check_compatible(prior);
  std::vector<double> out(count);
  if (const auto* db = std::get_if<DoubleBinomialParams>(&prior)) {
    const BinomialParams base{db->trials, db->prob};
    const double logc = expansion.include_logc ? double_binomial_dlogc_at_unit(db->trials, db->prob) : 0.0;
    for (double& s : out) {
      s = 0.5 - 0.5 * binomial_deviance(sample_binomial(base, rng), db->trials, db->prob) + logc;
    }
    return out;
  }
  const auto& p = std::get<NormalParams>(prior);
  for (double& s : out) {
    const double draw = rng.normal(p.mean, p.variance);
    switch (expansion.kind) {
      case ExpansionKind::normal_variance: s = score_normal_variance(draw, p.mean, p.variance); break;
      case ExpansionKind::normal_sd: s = score_normal_sd(draw, p.mean, p.variance); break;
      case ExpansionKind::normal_mean: s = score_normal_mean(draw, p.mean, p.variance); break;
      default: s = expansion.score(draw, prior); break;
    }
  }
  return out;
}

double empirical_pvalue(double observed, std::span<const double> references) {
  if (references.empty()) throw ParameterError("empirical p-value: no reference scores");
  std::size_t hits = 0;
  for (double r : references) hits += r >= observed ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(references.size());
}

std::vector<double> ScoreCheckResult::pvalues() const {
  std::vector<double> out;
  out.reserve(per_draw.size());
  for (const auto& d : per_draw) out.push_back(d.p_value);
  return out;
}

std::string ScoreCheckResult::pvalues_csv() const {
  std::string out = "m,score_observed,p_value\n";
  for (std::size_t m = 0; m < per_draw.size(); ++m) {
    out += std::to_string(m + 1);
    out += ',';
    out += format_double(per_draw[m].score_observed);
    out += ',';
    out += format_double(per_draw[m].p_value);
    out += '\n';
  }
  return out;
}

ScoreCheckResult run_group_check(const GroupedDataset& data, std::size_t held_out, const ModelHyperParams& hyper,
                                 const CheckConfig& cfg) {
  hyper.validate();
  cfg.combine.validate();
  if (cfg.reference_draws < 100) throw ParameterError("check: need at least 100 reference draws");
  const SplitData split = split_dataset(data, held_out);
  const NormalParams probe{0.0, hyper.re_variance};
  cfg.expansion.check_compatible(probe);

  ChainConfig chain = cfg.chain;
  chain.seed = derive_seed(cfg.seed, {stream::parent_chain, held_out});
  const PosteriorDraws parent = gibbs_parent(split.parent, hyper, chain, cfg.mode);
  const std::size_t draws = parent.rows();
  if (draws == 0) throw ParameterError("check: chain configuration retains no draws");

  ScoreCheckResult result;
  result.group = held_out;
  result.label = split.child.label;
  result.chain_seed = chain.seed;
  result.per_draw.resize(draws);
  if (draws >= 10) result.parent_diagnostics = diagnostics(parent);

  const std::size_t beta_col = parent.index_of("beta");
  const std::size_t gamma_col = parent.index_of("gamma");
  const std::span<const double> child = split.child.values;
  parallel_for(draws, cfg.jobs, [&](std::size_t m) {
    Rng rng(cfg.seed, {stream::child_draw, held_out, m});
    DrawRecord& rec = result.per_draw[m];
    rec.beta = parent.at(m, beta_col);
    rec.gamma = parent.at(m, gamma_col);
    rec.theta2 = child_draw(child, rec.beta, rec.gamma, hyper.re_variance, rng);
    const ConditionalPrior prior = NormalParams{rec.beta, hyper.re_variance};
    rec.score_observed = cfg.expansion.score(rec.theta2, prior);
    const std::vector<double> refs = reference_scores(cfg.expansion, prior, cfg.reference_draws, rng);
    rec.p_value = empirical_pvalue(rec.score_observed, refs);
  });

  result.combined = combine_pvalues(result.pvalues(), cfg.combine);
  return result;
}

}  // namespace scorecheck
