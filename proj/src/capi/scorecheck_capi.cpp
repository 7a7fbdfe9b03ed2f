#include "scorecheck/scorecheck.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "scorecheck/combine.hpp"
#include "scorecheck/distributions.hpp"
#include "scorecheck/error.hpp"
#include "scorecheck/model.hpp"
#include "scorecheck/nodesplit.hpp"
#include "scorecheck/oracles.hpp"
#include "scorecheck/score.hpp"
#include "scorecheck/serialize.hpp"

namespace sc = scorecheck;

struct sc_dataset {
  sc::GroupedDataset data;
};

struct sc_truth {
  sc::TruthRecord truth;
  sc::GroupedDataset data;
};

struct sc_check_result {
  sc::ScoreCheckResult result;
  sc::CheckConfig config;
};

struct sc_nodesplit_result {
  sc::NodeSplitResult result;
};

namespace {

thread_local std::string last_error;

sc_status status_of(sc::ErrorKind kind) {
  switch (kind) {
    case sc::ErrorKind::parameter: return SC_ERR_PARAMETER;
    case sc::ErrorKind::capability: return SC_ERR_CAPABILITY;
    case sc::ErrorKind::numeric: return SC_ERR_NUMERIC;
    case sc::ErrorKind::io: return SC_ERR_IO;
    case sc::ErrorKind::parse: return SC_ERR_PARSE;
  }
  return SC_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread's error text.
template <class Fn>
sc_status guard(Fn&& fn) noexcept {
  try {
    fn();
    return SC_OK;
  } catch (const sc::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SC_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw sc::ParameterError(std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  require(out, "output pointer");
  *out = copy_string(s);
}

sc::ModelHyperParams to_hyper(const sc_hyper* h) {
  sc::ModelHyperParams out;
  if (h) {
    out.re_variance = h->re_variance;
    out.beta_prior = {h->beta_mean, h->beta_variance};
    out.gamma_prior = {h->gamma_shape, h->gamma_rate};
  }
  return out;
}

sc::ChainConfig to_chain(const sc_chain_config& c) {
  sc::ChainConfig out;
  out.iterations = c.iterations;
  out.burn_in = c.burn_in;
  out.thin = c.thin;
  return out;
}

sc::FitMode to_mode(const sc_fit_mode& m) {
  sc::FitMode out;
  if (m.fix_gamma) out.fixed_gamma = m.fixed_gamma;
  out.flat_beta_prior = m.flat_beta_prior != 0;
  out.ignore_likelihood = m.ignore_likelihood != 0;
  return out;
}

sc::CombineConfig to_combine(const sc_combine_config* c) {
  sc::CombineConfig out;
  if (!c) return out;
  out.trim_fraction = c->trim_fraction;
  if (c->weights && c->n_weights) out.weights.assign(c->weights, c->weights + c->n_weights);
  out.clamp_epsilon = c->clamp_epsilon;
  switch (c->null_mode) {
    case SC_NULL_LANDAU: out.null_mode = sc::NullMode::landau; break;
    case SC_NULL_MONTE_CARLO: out.null_mode = sc::NullMode::monte_carlo; break;
    default: throw sc::ParameterError("unknown null mode");
  }
  out.mc_simulations = c->mc_simulations;
  out.mc_seed = c->mc_seed;
  return out;
}

sc::CheckConfig to_check(const sc_check_options* o) {
  sc_check_options defaults;
  sc_check_options_default(&defaults);
  if (!o) o = &defaults;
  sc::CheckConfig out;
  out.chain = to_chain(o->chain);
  out.reference_draws = o->reference_draws;
  switch (o->expansion) {
    case SC_EXPANSION_NORMAL_VARIANCE: out.expansion = sc::ExpansionFamily::normal_variance(); break;
    case SC_EXPANSION_NORMAL_SD: out.expansion = sc::ExpansionFamily::normal_sd(); break;
    case SC_EXPANSION_NORMAL_MEAN: out.expansion = sc::ExpansionFamily::normal_mean(); break;
    case SC_EXPANSION_NUMERIC: {
      if (!o->numeric_log_prior) throw sc::ParameterError("numeric expansion needs a log-prior callback");
      const sc_log_prior_fn fn = o->numeric_log_prior;
      void* user = o->numeric_user;
      std::optional<double> step;
      if (o->numeric_step != 0.0) step = o->numeric_step;
      out.expansion = sc::ExpansionFamily::numeric(
          [fn, user](double t, double a, const sc::NormalParams& b) { return fn(t, a, b.mean, b.variance, user); },
          o->numeric_alpha0, step);
      break;
    }
    default: throw sc::ParameterError("unknown expansion kind");
  }
  out.combine = to_combine(&o->combine);
  out.mode = to_mode(o->mode);
  out.seed = o->seed;
  out.jobs = o->jobs;
  return out;
}

void fill(const sc::CombineResult& r, sc_combine_result* out) {
  out->count = r.count;
  out->p_min = r.p_min;
  out->t_hcct = r.t_hcct;
  out->location = r.location;
  out->p_hcct = r.p_hcct;
}

sc::BalancedNormalSetup to_setup(const sc_oracle_setup* s) {
  require(s, "setup");
  return {s->m, s->n, s->sigma0_sq, s->tau0_sq, s->ybar_i, s->ybar_rest};
}

template <class F>
sc_status scalar(double* out, F&& f) {
  return guard([&] {
    require(out, "output pointer");
    *out = f();
  });
}

}  // namespace

extern "C" {

const char* sc_last_error(void) { return last_error.c_str(); }

const char* sc_status_name(sc_status status) {
  switch (status) {
    case SC_OK: return "ok";
    case SC_ERR_PARAMETER: return "parameter error";
    case SC_ERR_CAPABILITY: return "capability error";
    case SC_ERR_NUMERIC: return "numeric error";
    case SC_ERR_IO: return "i/o error";
    case SC_ERR_PARSE: return "parse error";
    case SC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sc_version(void) { return "0.1.0"; }

void sc_string_free(char* s) { delete[] s; }

sc_status sc_dataset_create(size_t groups, const char* const* labels, const double* const* values,
                            const size_t* counts, sc_dataset** out) {
  return guard([&] {
    require(out, "output pointer");
    *out = nullptr;
    require(labels, "labels");
    require(values, "values");
    require(counts, "counts");
    std::vector<sc::Group> gs(groups);
    for (size_t i = 0; i < groups; ++i) {
      require(labels[i], "group label");
      if (counts[i]) require(values[i], "group values");
      gs[i].label = labels[i];
      gs[i].values.assign(values[i], values[i] + counts[i]);
    }
    *out = new sc_dataset{sc::GroupedDataset(std::move(gs))};
  });
}

sc_status sc_dataset_from_csv(const char* text, sc_dataset** out) {
  return guard([&] {
    require(text, "text");
    require(out, "output pointer");
    *out = nullptr;
    *out = new sc_dataset{sc::parse_dataset_csv(text)};
  });
}

sc_status sc_dataset_read_csv(const char* path, sc_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = nullptr;
    *out = new sc_dataset{sc::read_dataset_csv(path)};
  });
}

sc_status sc_dataset_write_csv(const sc_dataset* data, const char* path) {
  return guard([&] {
    require(data, "dataset");
    require(path, "path");
    sc::write_dataset_csv(data->data, path);
  });
}

sc_status sc_dataset_to_csv(const sc_dataset* data, char** out) {
  return guard([&] {
    require(data, "dataset");
    emit(out, sc::format_dataset_csv(data->data));
  });
}

size_t sc_dataset_num_groups(const sc_dataset* data) { return data ? data->data.num_groups() : 0; }

sc_status sc_dataset_group_label(const sc_dataset* data, size_t group, const char** out) {
  return guard([&] {
    require(data, "dataset");
    require(out, "output pointer");
    *out = data->data.group(group).label.c_str();
  });
}

sc_status sc_dataset_group_values(const sc_dataset* data, size_t group, const double** values, size_t* count) {
  return guard([&] {
    require(data, "dataset");
    require(values, "output pointer");
    require(count, "output pointer");
    const sc::Group& g = data->data.group(group);
    *values = g.values.data();
    *count = g.values.size();
  });
}

void sc_dataset_free(sc_dataset* data) { delete data; }

void sc_hyper_default(sc_hyper* out) {
  if (!out) return;
  const sc::ModelHyperParams h;
  *out = {h.re_variance, h.beta_prior.mean, h.beta_prior.variance, h.gamma_prior.shape, h.gamma_prior.rate};
}

sc_status sc_simulate(size_t groups, size_t per_group, const sc_hyper* hyper, const sc_injection* injections,
                      size_t n_injections, uint64_t seed, sc_dataset** data, sc_truth** truth) {
  return guard([&] {
    require(data, "dataset output pointer");
    *data = nullptr;
    if (truth) *truth = nullptr;
    if (n_injections) require(injections, "injections");
    sc::ConflictSpec conflict;
    for (size_t i = 0; i < n_injections; ++i) conflict.injections.push_back({injections[i].group, injections[i].theta});
    sc::SimulatedData sim = sc::simulate_dataset(groups, per_group, to_hyper(hyper), conflict, seed);
    auto* d = new sc_dataset{sim.data};
    if (truth) {
      try {
        *truth = new sc_truth{std::move(sim.truth), std::move(sim.data)};
      } catch (...) {
        delete d;
        throw;
      }
    }
    *data = d;
  });
}

double sc_truth_beta(const sc_truth* t) { return t ? t->truth.beta : std::numeric_limits<double>::quiet_NaN(); }
double sc_truth_gamma(const sc_truth* t) { return t ? t->truth.gamma : std::numeric_limits<double>::quiet_NaN(); }
size_t sc_truth_num_groups(const sc_truth* t) { return t ? t->truth.theta.size() : 0; }

sc_status sc_truth_theta(const sc_truth* t, size_t group, double* theta, int* injected) {
  return guard([&] {
    require(t, "truth");
    if (group >= t->truth.theta.size()) throw sc::ParameterError("group index out of range");
    if (theta) *theta = t->truth.theta[group];
    if (injected) *injected = t->truth.injected[group] ? 1 : 0;
  });
}

sc_status sc_truth_to_json(const sc_truth* t, char** out) {
  return guard([&] {
    require(t, "truth");
    emit(out, sc::dump(sc::to_json(t->truth, t->data)));
  });
}

void sc_truth_free(sc_truth* t) { delete t; }

void sc_chain_config_default(sc_chain_config* out) {
  if (!out) return;
  const sc::ChainConfig c;
  *out = {c.iterations, c.burn_in, c.thin};
}

void sc_fit_mode_default(sc_fit_mode* out) {
  if (out) *out = {0, 1.0, 0, 0};
}

void sc_combine_config_default(sc_combine_config* out) {
  if (!out) return;
  const sc::CombineConfig c;
  *out = {c.trim_fraction, nullptr, 0, c.clamp_epsilon, SC_NULL_LANDAU, c.mc_simulations, c.mc_seed};
}

void sc_check_options_default(sc_check_options* out) {
  if (!out) return;
  *out = sc_check_options{};
  sc_chain_config_default(&out->chain);
  out->reference_draws = sc::CheckConfig{}.reference_draws;
  out->expansion = SC_EXPANSION_NORMAL_VARIANCE;
  out->numeric_alpha0 = 1.0;
  sc_combine_config_default(&out->combine);
  sc_fit_mode_default(&out->mode);
  out->jobs = 1;
}

sc_status sc_combine(const double* pvals, size_t count, const sc_combine_config* cfg, sc_combine_result* out) {
  return guard([&] {
    require(out, "output pointer");
    if (count) require(pvals, "p-values");
    fill(sc::combine_pvalues({pvals, count}, to_combine(cfg)), out);
  });
}

sc_status sc_yuan_pmin(const double* pvals, size_t count, double trim_fraction, double* out) {
  return scalar(out, [&] {
    if (count) require(pvals, "p-values");
    return sc::yuan_pmin({pvals, count}, trim_fraction);
  });
}

sc_status sc_combine_to_json(const sc_combine_result* r, const sc_combine_config* cfg, char** out) {
  return guard([&] {
    require(r, "result");
    sc::CombineResult cr{r->count, r->p_min, r->t_hcct, r->location, r->p_hcct};
    sc::Json j = sc::to_json(cr);
    j["config"] = sc::to_json(to_combine(cfg));
    emit(out, sc::dump(j));
  });
}

sc_status sc_run_group_check(const sc_dataset* data, size_t held_out, const sc_hyper* hyper,
                             const sc_check_options* options, sc_check_result** out) {
  return guard([&] {
    require(data, "dataset");
    require(out, "output pointer");
    *out = nullptr;
    sc::CheckConfig cfg = to_check(options);
    sc::ScoreCheckResult r = sc::run_group_check(data->data, held_out, to_hyper(hyper), cfg);
    *out = new sc_check_result{std::move(r), std::move(cfg)};
  });
}

size_t sc_check_result_num_draws(const sc_check_result* r) { return r ? r->result.per_draw.size() : 0; }

sc_status sc_check_result_draw(const sc_check_result* r, size_t m, sc_draw_record* out) {
  return guard([&] {
    require(r, "result");
    require(out, "output pointer");
    if (m >= r->result.per_draw.size()) throw sc::ParameterError("draw index out of range");
    const sc::DrawRecord& d = r->result.per_draw[m];
    *out = {d.beta, d.gamma, d.theta2, d.score_observed, d.p_value};
  });
}

sc_status sc_check_result_pvalues(const sc_check_result* r, double* out, size_t capacity) {
  return guard([&] {
    require(r, "result");
    require(out, "output buffer");
    if (capacity < r->result.per_draw.size()) throw sc::ParameterError("output buffer too small");
    for (size_t m = 0; m < r->result.per_draw.size(); ++m) out[m] = r->result.per_draw[m].p_value;
  });
}

void sc_check_result_combined(const sc_check_result* r, sc_combine_result* out) {
  if (r && out) fill(r->result.combined, out);
}

size_t sc_check_result_num_diagnostics(const sc_check_result* r) {
  return r ? r->result.parent_diagnostics.size() : 0;
}

sc_status sc_check_result_diagnostic(const sc_check_result* r, size_t i, sc_diagnostic* out) {
  return guard([&] {
    require(r, "result");
    require(out, "output pointer");
    if (i >= r->result.parent_diagnostics.size()) throw sc::ParameterError("diagnostic index out of range");
    const auto& d = r->result.parent_diagnostics[i];
    *out = {d.name.c_str(), d.ess, d.rhat.value_or(std::numeric_limits<double>::quiet_NaN()), d.degenerate ? 1 : 0};
  });
}

sc_status sc_check_result_to_json(const sc_check_result* r, char** out) {
  return guard([&] {
    require(r, "result");
    emit(out, sc::dump(sc::to_json(r->result, r->config)));
  });
}

sc_status sc_check_result_pvalues_csv(const sc_check_result* r, char** out) {
  return guard([&] {
    require(r, "result");
    emit(out, r->result.pvalues_csv());
  });
}

void sc_check_result_free(sc_check_result* r) { delete r; }

void sc_nodesplit_options_default(sc_nodesplit_options* out) {
  if (!out) return;
  sc_chain_config_default(&out->chain);
  sc_fit_mode_default(&out->mode);
  out->seed = 0;
}

sc_status sc_node_split_check(const sc_dataset* data, size_t group, const sc_hyper* hyper,
                              const sc_nodesplit_options* options, sc_nodesplit_result** out) {
  return guard([&] {
    require(data, "dataset");
    require(out, "output pointer");
    *out = nullptr;
    sc_nodesplit_options defaults;
    sc_nodesplit_options_default(&defaults);
    if (!options) options = &defaults;
    sc::NodeSplitConfig cfg;
    cfg.chain = to_chain(options->chain);
    cfg.mode = to_mode(options->mode);
    cfg.seed = options->seed;
    *out = new sc_nodesplit_result{sc::node_split_check(data->data, group, to_hyper(hyper), cfg)};
  });
}

double sc_nodesplit_conflict_p(const sc_nodesplit_result* r) {
  return r ? r->result.conflict_p : std::numeric_limits<double>::quiet_NaN();
}

double sc_nodesplit_p_hat(const sc_nodesplit_result* r) {
  return r ? r->result.p_hat : std::numeric_limits<double>::quiet_NaN();
}

size_t sc_nodesplit_num_draws(const sc_nodesplit_result* r) { return r ? r->result.diff_draws.size() : 0; }

sc_status sc_nodesplit_draw(const sc_nodesplit_result* r, size_t i, double* rep, double* lik) {
  return guard([&] {
    require(r, "result");
    if (i >= r->result.diff_draws.size()) throw sc::ParameterError("draw index out of range");
    if (rep) *rep = r->result.rep_draws[i];
    if (lik) *lik = r->result.lik_draws[i];
  });
}

sc_status sc_nodesplit_to_json(const sc_nodesplit_result* r, char** out) {
  return guard([&] {
    require(r, "result");
    emit(out, sc::dump(sc::to_json(r->result)));
  });
}

sc_status sc_nodesplit_to_csv(const sc_nodesplit_result* r, char** out) {
  return guard([&] {
    require(r, "result");
    emit(out, r->result.draws_csv());
  });
}

void sc_nodesplit_result_free(sc_nodesplit_result* r) { delete r; }

sc_status sc_oracle_evaluate(const sc_oracle_setup* setup, sc_oracle_result* out) {
  return guard([&] {
    require(out, "output pointer");
    const sc::BalancedNormalSetup s = to_setup(setup);
    const sc::IicDensities iic = sc::analytic_iic(s);
    const sc::NormalParams gd = sc::analytic_gdelta(s);
    const sc::NormalParams x = sc::analytic_scaled_difference(s);
    const sc::NormalParams parent = sc::analytic_parent_posterior(s.ybar_rest, s.m, s.n, s.sigma0_sq, s.tau0_sq);
    *out = {iic.g_c.mean, iic.g_c.variance, iic.g_p.mean, iic.g_p.variance, gd.mean, gd.variance,
            sc::two_sided_tail_at_zero(gd), x.mean, x.variance, sc::expected_randomised_pvalue(s),
            parent.mean, parent.variance};
  });
}

sc_status sc_oracle_to_json(const sc_oracle_setup* setup, char** out) {
  return guard([&] { emit(out, sc::dump(sc::oracle_report(to_setup(setup)))); });
}

sc_status sc_landau_pdf(double x, double* out) { return scalar(out, [&] { return sc::landau_pdf(x); }); }
sc_status sc_landau_sf(double x, double* out) { return scalar(out, [&] { return sc::landau_sf(x); }); }

sc_status sc_landau_sf_scaled(double x, double location, double scale, double* out) {
  return scalar(out, [&] { return sc::landau_sf(x, location, scale); });
}

sc_status sc_normal_logpdf(double x, double mean, double variance, double* out) {
  return scalar(out, [&] { return sc::normal_logpdf(x, {mean, variance}); });
}

sc_status sc_binomial_deviance(int successes, int trials, double mu, double* out) {
  return scalar(out, [&] { return sc::binomial_deviance(successes, trials, mu); });
}

sc_status sc_double_binomial_logpmf(int k, int trials, double prob, double dispersion, int normalized,
                                    double* out) {
  return scalar(out, [&] { return sc::double_binomial_logpmf(k, {trials, prob, dispersion}, normalized != 0); });
}

sc_status sc_score_normal_variance(double theta2, double mean, double variance, double* out) {
  return scalar(out, [&] { return sc::score_normal_variance(theta2, mean, variance); });
}

sc_status sc_score_normal_sd(double theta2, double mean, double variance, double* out) {
  return scalar(out, [&] { return sc::score_normal_sd(theta2, mean, variance); });
}

sc_status sc_score_normal_mean(double theta2, double mean, double variance, double* out) {
  return scalar(out, [&] { return sc::score_normal_mean(theta2, mean, variance); });
}

sc_status sc_score_double_binomial(int k, int trials, double prob, int include_logc, double* out) {
  return scalar(out, [&] {
    return sc::score_double_binomial_dispersion(k, {trials, prob, 1.0}, include_logc != 0);
  });
}

}  // extern "C"
