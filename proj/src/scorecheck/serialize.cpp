#include "scorecheck/serialize.hpp"

#include <cmath>

namespace scorecheck {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json normal(const NormalParams& p) { return Json{{"mean", number(p.mean)}, {"variance", number(p.variance)}}; }

}  // namespace

Json to_json(const ModelHyperParams& h) {
  return Json{{"re_variance", h.re_variance},
              {"beta_prior", normal(h.beta_prior)},
              {"gamma_prior", Json{{"shape", h.gamma_prior.shape}, {"rate", h.gamma_prior.rate}}}};
}

Json to_json(const TruthRecord& t, const GroupedDataset& data) {
  Json groups = Json::array();
  for (std::size_t i = 0; i < t.theta.size(); ++i) {
    groups.push_back(Json{{"group", data.group(i).label}, {"theta", t.theta[i]}, {"injected", bool(t.injected[i])}});
  }
  return Json{{"beta", t.beta}, {"gamma", t.gamma}, {"groups", std::move(groups)}};
}

Json to_json(const ChainConfig& c) {
  return Json{{"iterations", c.iterations}, {"burn_in", c.burn_in}, {"thin", c.thin}, {"retained", c.retained()}};
}

Json to_json(const FitMode& m) {
  return Json{{"fixed_gamma", m.fixed_gamma ? Json(*m.fixed_gamma) : Json(nullptr)},
              {"flat_beta_prior", m.flat_beta_prior},
              {"ignore_likelihood", m.ignore_likelihood}};
}

Json to_json(const CombineConfig& c) {
  Json j{{"trim_fraction", c.trim_fraction},
         {"clamp_epsilon", c.clamp_epsilon},
         {"weights", c.weights.empty() ? Json("equal") : Json(c.weights)},
         {"null_mode", to_string(c.null_mode)}};
  if (c.null_mode == NullMode::monte_carlo) {
    j["mc_simulations"] = c.mc_simulations;
    j["mc_seed"] = c.mc_seed;
  }
  return j;
}

Json to_json(const CombineResult& r) {
  return Json{{"count", r.count},
              {"p_min", number(r.p_min)},
              {"p_min_label", significance_label(r.p_min)},
              {"t_hcct", number(r.t_hcct)},
              {"location", number(r.location)},
              {"p_hcct", number(r.p_hcct)},
              {"p_hcct_label", significance_label(r.p_hcct)}};
}

Json to_json(const CheckConfig& c) {
  Json expansion{{"kind", to_string(c.expansion.kind)}};
  if (c.expansion.kind == ExpansionKind::numeric) {
    expansion["alpha0"] = c.expansion.alpha0;
    expansion["step"] = c.expansion.step.value_or(default_fd_step(c.expansion.alpha0));
  }
  return Json{{"chain", to_json(c.chain)},
              {"reference_draws", c.reference_draws},
              {"expansion", std::move(expansion)},
              {"combine", to_json(c.combine)},
              {"fit_mode", to_json(c.mode)},
              {"seed", c.seed}};
}

Json to_json(const std::vector<ParameterDiagnostics>& d) {
  Json out = Json::array();
  for (const auto& p : d) {
    out.push_back(Json{{"name", p.name},
                       {"ess", number(p.ess)},
                       {"rhat", p.rhat ? number(*p.rhat) : Json(nullptr)},
                       {"degenerate", p.degenerate}});
  }
  return out;
}

Json to_json(const ScoreCheckResult& r, const CheckConfig& c) {
  return Json{{"group", r.label},
              {"index", r.group + 1},
              {"draws", r.per_draw.size()},
              {"combined", to_json(r.combined)},
              {"parent_diagnostics", to_json(r.parent_diagnostics)},
              {"config", to_json(c)}};
}

Json to_json(const NodeSplitResult& r) {
  return Json{{"group", r.label},
              {"index", r.group + 1},
              {"draws", r.diff_draws.size()},
              {"p_hat", number(r.p_hat)},
              {"conflict_p", number(r.conflict_p)},
              {"conflict_p_label", significance_label(r.conflict_p)}};
}

Json to_json(const BalancedNormalSetup& s) {
  return Json{{"m", s.m},           {"n", s.n},           {"sigma0_sq", s.sigma0_sq},
              {"tau0_sq", s.tau0_sq}, {"ybar_i", s.ybar_i}, {"ybar_rest", s.ybar_rest}};
}

Json oracle_report(const BalancedNormalSetup& s) {
  const IicDensities iic = analytic_iic(s);
  const NormalParams gdelta = analytic_gdelta(s);
  const NormalParams x = analytic_scaled_difference(s);
  const NormalParams parent = analytic_parent_posterior(s.ybar_rest, s.m, s.n, s.sigma0_sq, s.tau0_sq);
  const NormalParams child = analytic_child_posterior(s.ybar_i, s.n, s.sigma0_sq, s.tau0_sq, s.ybar_rest);
  return Json{{"setup", to_json(s)},
              {"iic", Json{{"g_c", normal(iic.g_c)}, {"g_p", normal(iic.g_p)}}},
              {"gdelta", normal(gdelta)},
              {"gdelta_conflict_p", two_sided_tail_at_zero(gdelta)},
              {"scaled_difference", normal(x)},
              {"expected_score_pvalue", expected_randomised_pvalue(s)},
              {"parent_posterior", normal(parent)},
              {"child_posterior_at_parent_mean", normal(child)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace scorecheck
