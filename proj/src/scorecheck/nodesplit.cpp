#include "scorecheck/nodesplit.hpp"

#include <algorithm>
#include <future>

#include "scorecheck/error.hpp"
#include "scorecheck/io.hpp"
#include "scorecheck/rng.hpp"

namespace scorecheck {

namespace {

// Flat prior on lambda, data from one group only.
std::vector<double> likelihood_part(const Group& g, const ModelHyperParams& hyper, const NodeSplitConfig& cfg,
                                    std::size_t group) {
  Rng rng(cfg.seed, {stream::nodesplit_lik, group});
  const double n = static_cast<double>(g.size());
  const double ybar = g.mean();
  std::vector<double> out;
  out.reserve(cfg.chain.retained());

  if (cfg.mode.fixed_gamma) {
    const double var = *cfg.mode.fixed_gamma / n;
    for (std::size_t r = 0; r < cfg.chain.retained(); ++r) out.push_back(rng.normal(ybar, var));
    return out;
  }

  // (lambda, gamma) Gibbs with gamma ~ InvGamma(gamma_prior).
  double gamma = g.size() > 1 && g.centered_sum_of_squares() > 0.0
                     ? g.centered_sum_of_squares() / (n - 1.0)
                     : hyper.gamma_prior.rate / std::max(1.0, hyper.gamma_prior.shape - 1.0);
  const double shape = hyper.gamma_prior.shape + 0.5 * n;
  for (std::size_t it = 0; it < cfg.chain.iterations; ++it) {
    const double lambda = rng.normal(ybar, gamma / n);
    double ss = 0.0;
    for (double y : g.values) ss += (y - lambda) * (y - lambda);
    gamma = (hyper.gamma_prior.rate + 0.5 * ss) / rng.gamma(shape);
    if (it >= cfg.chain.burn_in && (it - cfg.chain.burn_in) % cfg.chain.thin == cfg.chain.thin - 1) {
      out.push_back(lambda);
    }
  }
  return out;
}

}  // namespace

double node_split_pvalue(std::span<const double> diff_draws) {
  if (diff_draws.empty()) throw ParameterError("node split: no difference draws");
  std::size_t below = 0;
  for (double d : diff_draws) below += d <= 0.0 ? 1 : 0;
  const double p = static_cast<double>(below) / static_cast<double>(diff_draws.size());
  return 2.0 * std::min(p, 1.0 - p);
}

std::string NodeSplitResult::draws_csv() const {
  std::string out = "r,rep,lik,diff\n";
  for (std::size_t r = 0; r < diff_draws.size(); ++r) {
    out += std::to_string(r + 1) + ',' + format_double(rep_draws[r]) + ',' + format_double(lik_draws[r]) + ',' +
           format_double(diff_draws[r]) + '\n';
  }
  return out;
}

NodeSplitResult node_split_check(const GroupedDataset& data, std::size_t group, const ModelHyperParams& hyper,
                                 const NodeSplitConfig& cfg) {
  cfg.chain.validate();
  cfg.mode.validate();
  hyper.validate();
  if (cfg.mode.ignore_likelihood) throw ParameterError("node split: prior-only mode is not meaningful");
  const SplitData split = split_dataset(data, group);
  if (cfg.chain.retained() == 0) throw ParameterError("node split: chain configuration retains no draws");

  auto lik = std::async(std::launch::async, [&] { return likelihood_part(split.child, hyper, cfg, group); });

  ChainConfig chain = cfg.chain;
  chain.seed = derive_seed(cfg.seed, {stream::nodesplit_rep, group, 0});
  const PosteriorDraws parent = gibbs_parent(split.parent, hyper, chain, cfg.mode);
  Rng rng(cfg.seed, {stream::nodesplit_rep, group, 1});
  NodeSplitResult out;
  out.group = group;
  out.label = split.child.label;
  const std::size_t beta_col = parent.index_of("beta");
  out.rep_draws.reserve(parent.rows());
  for (std::size_t r = 0; r < parent.rows(); ++r) {
    out.rep_draws.push_back(rng.normal(parent.at(r, beta_col), hyper.re_variance));
  }

  out.lik_draws = lik.get();
  out.diff_draws.resize(out.rep_draws.size());
  for (std::size_t r = 0; r < out.diff_draws.size(); ++r) out.diff_draws[r] = out.rep_draws[r] - out.lik_draws[r];
  std::size_t below = 0;
  for (double d : out.diff_draws) below += d <= 0.0 ? 1 : 0;
  out.p_hat = static_cast<double>(below) / static_cast<double>(out.diff_draws.size());
  out.conflict_p = node_split_pvalue(out.diff_draws);
  return out;
}

}  // namespace scorecheck
