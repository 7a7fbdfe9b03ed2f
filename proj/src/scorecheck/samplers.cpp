#include "scorecheck/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scorecheck/error.hpp"
#include "scorecheck/io.hpp"

namespace scorecheck {

void ChainConfig::validate() const {
  if (iterations == 0) throw ParameterError("chain: iterations must be positive");
  if (burn_in >= iterations) throw ParameterError("chain: burn_in must be smaller than iterations");
  if (thin == 0) throw ParameterError("chain: thin must be at least 1");
}

std::size_t ChainConfig::retained() const { return (iterations - burn_in) / thin; }

void FitMode::validate() const {
  if (fixed_gamma && !(std::isfinite(*fixed_gamma) && *fixed_gamma > 0.0)) {
    throw ParameterError("fit mode: fixed gamma must be positive");
  }
  if (ignore_likelihood && flat_beta_prior) {
    throw ParameterError("fit mode: a prior-only run needs a proper beta prior");
  }
}

PosteriorDraws::PosteriorDraws(std::vector<std::string> names, ChainConfig meta)
    : names_(std::move(names)), meta_(meta) {
  if (names_.empty()) throw ParameterError("posterior draws need at least one parameter");
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ParameterError("no parameter named '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> PosteriorDraws::column(const std::string& name) const { return column(index_of(name)); }

std::vector<double> PosteriorDraws::column(std::size_t col) const {
  if (col >= cols()) throw ParameterError("column index out of range");
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, col);
  return out;
}

void PosteriorDraws::append_row(std::span<const double> row) {
  if (row.size() != names_.size()) throw ParameterError("row width does not match parameter count");
  for (double v : row) {
    if (!std::isfinite(v)) throw NumericError("non-finite posterior draw");
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

std::string PosteriorDraws::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < cols(); ++c) {
    if (c) out += ',';
    out += names_[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      if (c) out += ',';
      out += format_double(at(r, c));
    }
    out += '\n';
  }
  return out;
}

NormalParams theta_conditional(const Group& g, double beta, double gamma, double re_variance, bool use_data) {
  const double n = use_data ? static_cast<double>(g.size()) : 0.0;
  double sum = 0.0;
  if (use_data) {
    for (double y : g.values) sum += y;
  }
  const double prec = n / gamma + 1.0 / re_variance;
  return {(sum / gamma + beta / re_variance) / prec, 1.0 / prec};
}

NormalParams beta_conditional(std::span<const double> theta, const ModelHyperParams& hyper, bool flat_prior) {
  const double m = static_cast<double>(theta.size());
  double sum = 0.0;
  for (double t : theta) sum += t;
  const double tau2 = hyper.re_variance;
  if (flat_prior) return {sum / m, tau2 / m};
  const double v0 = hyper.beta_prior.variance;
  const double prec = m / tau2 + 1.0 / v0;
  return {(sum / tau2 + hyper.beta_prior.mean / v0) / prec, 1.0 / prec};
}

InvGammaParams gamma_conditional(const GroupedDataset& data, std::span<const double> theta,
                                 const ModelHyperParams& hyper, bool use_data) {
  InvGammaParams out = hyper.gamma_prior;
  if (!use_data) return out;
  double ss = 0.0;
  for (std::size_t i = 0; i < data.num_groups(); ++i) {
    for (double y : data.group(i).values) ss += (y - theta[i]) * (y - theta[i]);
  }
  out.shape += 0.5 * static_cast<double>(data.total_observations());
  out.rate += 0.5 * ss;
  return out;
}

PosteriorDraws gibbs_parent(const GroupedDataset& parent, const ModelHyperParams& hyper,
                            const ChainConfig& cfg, const FitMode& mode) {
  cfg.validate();
  hyper.validate();
  mode.validate();

  const std::size_t m = parent.num_groups();
  const double tau2 = hyper.re_variance;
  const bool use_data = !mode.ignore_likelihood;

  double total_n = 0.0, pooled_ss = 0.0, grand = 0.0;
  std::vector<double> theta(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Group& g = parent.group(i);
    theta[i] = g.mean();
    total_n += static_cast<double>(g.size());
    grand += theta[i] * static_cast<double>(g.size());
    pooled_ss += g.centered_sum_of_squares();
  }
  grand /= total_n;

  double beta = grand;
  double gamma = 0.0;
  if (mode.fixed_gamma) {
    gamma = *mode.fixed_gamma;
  } else if (total_n > static_cast<double>(m) && pooled_ss > 0.0) {
    gamma = pooled_ss / (total_n - static_cast<double>(m));
  } else {
    const auto& gp = hyper.gamma_prior;
    gamma = gp.shape > 1.0 ? gp.rate / (gp.shape - 1.0) : gp.rate / gp.shape;
  }

  std::vector<std::string> names{"beta", "gamma"};
  for (const Group& g : parent.groups()) names.push_back("theta[" + g.label + "]");
  PosteriorDraws draws(std::move(names), cfg);

  Rng rng(cfg.seed, {stream::parent_chain});
  std::vector<double> row(2 + m);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      const NormalParams c = theta_conditional(parent.group(i), beta, gamma, tau2, use_data);
      theta[i] = rng.normal(c.mean, c.variance);
    }
    const NormalParams cb = beta_conditional(theta, hyper, mode.flat_beta_prior);
    beta = rng.normal(cb.mean, cb.variance);
    if (!mode.fixed_gamma) {
      const InvGammaParams cg = gamma_conditional(parent, theta, hyper, use_data);
      gamma = cg.rate / rng.gamma(cg.shape);
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) {
      row[0] = beta;
      row[1] = gamma;
      std::copy(theta.begin(), theta.end(), row.begin() + 2);
      draws.append_row(row);
    }
  }
  return draws;
}

NormalParams child_posterior(std::span<const double> child, double beta, double gamma, double re_variance) {
  if (child.empty()) throw ParameterError("child data is empty");
  if (!(gamma > 0.0) || !(re_variance > 0.0)) {
    throw ParameterError("child posterior: gamma and re_variance must be positive");
  }
  double sum = 0.0;
  for (double y : child) sum += y;
  const double n = static_cast<double>(child.size());
  const double prec = n / gamma + 1.0 / re_variance;
  return {(sum / gamma + beta / re_variance) / prec, 1.0 / prec};
}

double child_draw(std::span<const double> child, double beta, double gamma, double re_variance, Rng& rng) {
  const NormalParams post = child_posterior(child, beta, gamma, re_variance);
  return rng.normal(post.mean, post.variance);
}

namespace {

constexpr std::size_t kMinDraws = 10;

void check_chains(std::span<const std::vector<double>> chains) {
  if (chains.empty()) throw ParameterError("diagnostics: no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw ParameterError("diagnostics: chains differ in length");
  }
  if (n < kMinDraws) {
    throw CapabilityError("diagnostics: need at least " + std::to_string(kMinDraws) + " draws per chain");
  }
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

struct VarianceParts {
  double within = 0.0;    // W
  double var_plus = 0.0;  // (n-1)/n W + B/n
};

VarianceParts variance_parts(std::span<const std::vector<double>> chains) {
  const double n = static_cast<double>(chains.front().size());
  const std::size_t k = chains.size();
  std::vector<double> means(k);
  double within = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    means[c] = mean_of(chains[c]);
    double ss = 0.0;
    for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
    within += ss / (n - 1.0);
  }
  within /= static_cast<double>(k);
  double between_over_n = 0.0;
  if (k > 1) {
    const double grand = mean_of(means);
    for (double mu : means) between_over_n += (mu - grand) * (mu - grand);
    between_over_n /= static_cast<double>(k - 1);
  }
  return {within, (n - 1.0) / n * within + between_over_n};
}

bool constant(std::span<const std::vector<double>> chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double v : c) {
      if (v != first) return false;
    }
  }
  return true;
}

// Biased autocovariance of one chain at `lag`.
double autocovariance(const std::vector<double>& x, double mu, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) s += (x[i] - mu) * (x[i + lag] - mu);
  return s / static_cast<double>(x.size());
}

}  // namespace

double effective_sample_size(std::span<const std::vector<double>> chains) {
  check_chains(chains);
  if (constant(chains)) return 1.0;
  const std::size_t n = chains.front().size();
  const std::size_t k = chains.size();
  const double total = static_cast<double>(n * k);
  const VarianceParts vp = variance_parts(chains);
  if (!(vp.var_plus > 0.0)) return 1.0;

  std::vector<double> means(k);
  for (std::size_t c = 0; c < k; ++c) means[c] = mean_of(chains[c]);
  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t c = 0; c < k; ++c) acov += autocovariance(chains[c], means[c], lag);
    acov /= static_cast<double>(k);
    return 1.0 - (vp.within - acov) / vp.var_plus;
  };

  // Geyer: sum successive pairs while positive, forced monotone.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = (t == 0 ? 1.0 : rho(t)) + rho(t + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

std::optional<double> split_rhat(std::span<const std::vector<double>> chains) {
  check_chains(chains);
  if (constant(chains)) return std::nullopt;
  const std::size_t half = chains.front().size() / 2;
  std::vector<std::vector<double>> halves;
  halves.reserve(2 * chains.size());
  for (const auto& c : chains) {
    // Odd lengths drop the middle draw.
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  const VarianceParts vp = variance_parts(halves);
  if (!(vp.within > 0.0)) return std::nullopt;
  return std::sqrt(vp.var_plus / vp.within);
}

std::vector<ParameterDiagnostics> diagnostics(std::span<const PosteriorDraws> chains) {
  if (chains.empty()) throw ParameterError("diagnostics: no chains");
  const auto& names = chains.front().names();
  for (const auto& c : chains) {
    if (c.names() != names) throw ParameterError("diagnostics: chains have different parameters");
  }
  std::vector<ParameterDiagnostics> out;
  for (std::size_t col = 0; col < names.size(); ++col) {
    std::vector<std::vector<double>> cols;
    for (const auto& c : chains) cols.push_back(c.column(col));
    ParameterDiagnostics d;
    d.name = names[col];
    check_chains(cols);
    d.degenerate = constant(cols);
    d.ess = effective_sample_size(cols);
    d.rhat = split_rhat(cols);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ParameterDiagnostics> diagnostics(const PosteriorDraws& draws) {
  return diagnostics(std::span<const PosteriorDraws>(&draws, 1));
}

}  // namespace scorecheck
