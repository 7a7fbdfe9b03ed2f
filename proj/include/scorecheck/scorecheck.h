/*
 * scorecheck C API.
 *
 * Conflict detection for a hierarchical normal random-effects model by
 * randomised score discrepancies, with dependent p-value combination and a
 * node-splitting baseline.
 *
 * Conventions:
 *   - Every fallible call returns sc_status; on failure sc_last_error() holds
 *     a message for the calling thread until its next failing call.
 *   - Objects are opaque handles released with their *_free function; free
 *     functions accept NULL. A failing constructor sets its handle outputs
 *     to NULL.
 *   - Strings returned through char** are owned by the caller and released
 *     with sc_string_free. const char* results are borrowed from their handle.
 *   - Group indices are 0-based.
 *   - The second parameter of every normal distribution is a variance.
 */
#ifndef SCORECHECK_SCORECHECK_H
#define SCORECHECK_SCORECHECK_H

#include <stddef.h>
#include <stdint.h>

#if defined(SC_BUILDING_LIBRARY)
#define SC_API __attribute__((visibility("default")))
#else
#define SC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sc_status {
  SC_OK = 0,
  SC_ERR_PARAMETER = 1,  /* invalid or out-of-range argument */
  SC_ERR_CAPABILITY = 2, /* valid request outside what is supported */
  SC_ERR_NUMERIC = 3,    /* non-finite evaluation */
  SC_ERR_IO = 4,
  SC_ERR_PARSE = 5,
  SC_ERR_INTERNAL = 6
} sc_status;

SC_API const char* sc_last_error(void);
SC_API const char* sc_status_name(sc_status status);
SC_API const char* sc_version(void);
SC_API void sc_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct sc_dataset sc_dataset;

/* counts[i] observations at values[i] for group labels[i]. */
SC_API sc_status sc_dataset_create(size_t groups, const char* const* labels, const double* const* values,
                                   const size_t* counts, sc_dataset** out);
/* CSV with header "group,value". */
SC_API sc_status sc_dataset_from_csv(const char* text, sc_dataset** out);
SC_API sc_status sc_dataset_read_csv(const char* path, sc_dataset** out);
SC_API sc_status sc_dataset_write_csv(const sc_dataset* data, const char* path);
SC_API sc_status sc_dataset_to_csv(const sc_dataset* data, char** out);
SC_API size_t sc_dataset_num_groups(const sc_dataset* data);
SC_API sc_status sc_dataset_group_label(const sc_dataset* data, size_t group, const char** out);
SC_API sc_status sc_dataset_group_values(const sc_dataset* data, size_t group, const double** values,
                                         size_t* count);
SC_API void sc_dataset_free(sc_dataset* data);

/* ---- model and simulation ---------------------------------------------- */

typedef struct sc_hyper {
  double re_variance;   /* random-effects variance */
  double beta_mean;     /* normal prior on beta */
  double beta_variance;
  double gamma_shape;   /* inverse-gamma prior on the observation variance */
  double gamma_rate;
} sc_hyper;

/* re_variance 5, beta ~ N(0, 5), gamma ~ InvGamma(2, 2). */
SC_API void sc_hyper_default(sc_hyper* out);

typedef struct sc_injection {
  size_t group;
  double theta;
} sc_injection;

typedef struct sc_truth sc_truth;

SC_API sc_status sc_simulate(size_t groups, size_t per_group, const sc_hyper* hyper,
                             const sc_injection* injections, size_t n_injections, uint64_t seed,
                             sc_dataset** data, sc_truth** truth);
SC_API double sc_truth_beta(const sc_truth* truth);
SC_API double sc_truth_gamma(const sc_truth* truth);
SC_API size_t sc_truth_num_groups(const sc_truth* truth);
SC_API sc_status sc_truth_theta(const sc_truth* truth, size_t group, double* theta, int* injected);
SC_API sc_status sc_truth_to_json(const sc_truth* truth, char** out);
SC_API void sc_truth_free(sc_truth* truth);

/* ---- configuration ----------------------------------------------------- */

typedef struct sc_chain_config {
  size_t iterations;
  size_t burn_in;
  size_t thin;
} sc_chain_config;

typedef struct sc_fit_mode {
  int fix_gamma;          /* nonzero: clamp gamma to fixed_gamma */
  double fixed_gamma;
  int flat_beta_prior;    /* nonzero: improper flat prior on beta */
  int ignore_likelihood;  /* nonzero: sample the prior */
} sc_fit_mode;

typedef enum sc_null_mode { SC_NULL_LANDAU = 0, SC_NULL_MONTE_CARLO = 1 } sc_null_mode;

typedef struct sc_combine_config {
  double trim_fraction;
  const double* weights; /* NULL for equal weights; otherwise n_weights entries */
  size_t n_weights;
  double clamp_epsilon;
  sc_null_mode null_mode;
  size_t mc_simulations;
  uint64_t mc_seed;
} sc_combine_config;

typedef enum sc_expansion {
  SC_EXPANSION_NORMAL_VARIANCE = 0,
  SC_EXPANSION_NORMAL_SD = 1,
  SC_EXPANSION_NORMAL_MEAN = 2,
  SC_EXPANSION_NUMERIC = 3
} sc_expansion;

/* log p(theta2 | alpha) of the expanded conditional prior whose base is
 * N(mean, variance). Must be thread-safe when jobs > 1. */
typedef double (*sc_log_prior_fn)(double theta2, double alpha, double mean, double variance, void* user);

typedef struct sc_check_options {
  sc_chain_config chain;
  size_t reference_draws;
  sc_expansion expansion;
  sc_log_prior_fn numeric_log_prior; /* SC_EXPANSION_NUMERIC only */
  void* numeric_user;
  double numeric_alpha0;
  double numeric_step;               /* 0 selects the default step */
  sc_combine_config combine;
  sc_fit_mode mode;
  uint64_t seed;
  unsigned jobs;                     /* 0 = hardware concurrency */
} sc_check_options;

SC_API void sc_chain_config_default(sc_chain_config* out);
SC_API void sc_fit_mode_default(sc_fit_mode* out);
SC_API void sc_combine_config_default(sc_combine_config* out);
SC_API void sc_check_options_default(sc_check_options* out);

/* ---- p-value combination ----------------------------------------------- */

typedef struct sc_combine_result {
  size_t count;
  double p_min;
  double t_hcct;
  double location;
  double p_hcct;
} sc_combine_result;

SC_API sc_status sc_combine(const double* pvals, size_t count, const sc_combine_config* cfg,
                            sc_combine_result* out);
SC_API sc_status sc_yuan_pmin(const double* pvals, size_t count, double trim_fraction, double* out);
SC_API sc_status sc_combine_to_json(const sc_combine_result* result, const sc_combine_config* cfg, char** out);

/* ---- score check ------------------------------------------------------- */

typedef struct sc_check_result sc_check_result;

typedef struct sc_draw_record {
  double beta;
  double gamma;
  double theta2;
  double score_observed;
  double p_value;
} sc_draw_record;

typedef struct sc_diagnostic {
  const char* name; /* borrowed */
  double ess;
  double rhat;      /* NaN when undefined */
  int degenerate;
} sc_diagnostic;

SC_API sc_status sc_run_group_check(const sc_dataset* data, size_t held_out, const sc_hyper* hyper,
                                    const sc_check_options* options, sc_check_result** out);
SC_API size_t sc_check_result_num_draws(const sc_check_result* r);
SC_API sc_status sc_check_result_draw(const sc_check_result* r, size_t m, sc_draw_record* out);
SC_API sc_status sc_check_result_pvalues(const sc_check_result* r, double* out, size_t capacity);
SC_API void sc_check_result_combined(const sc_check_result* r, sc_combine_result* out);
SC_API size_t sc_check_result_num_diagnostics(const sc_check_result* r);
SC_API sc_status sc_check_result_diagnostic(const sc_check_result* r, size_t i, sc_diagnostic* out);
SC_API sc_status sc_check_result_to_json(const sc_check_result* r, char** out);
/* Columns m, score_observed, p_value. */
SC_API sc_status sc_check_result_pvalues_csv(const sc_check_result* r, char** out);
SC_API void sc_check_result_free(sc_check_result* r);

/* ---- node splitting ---------------------------------------------------- */

typedef struct sc_nodesplit_options {
  sc_chain_config chain;
  sc_fit_mode mode;
  uint64_t seed;
} sc_nodesplit_options;

typedef struct sc_nodesplit_result sc_nodesplit_result;

SC_API void sc_nodesplit_options_default(sc_nodesplit_options* out);
SC_API sc_status sc_node_split_check(const sc_dataset* data, size_t group, const sc_hyper* hyper,
                                     const sc_nodesplit_options* options, sc_nodesplit_result** out);
SC_API double sc_nodesplit_conflict_p(const sc_nodesplit_result* r);
SC_API double sc_nodesplit_p_hat(const sc_nodesplit_result* r);
SC_API size_t sc_nodesplit_num_draws(const sc_nodesplit_result* r);
SC_API sc_status sc_nodesplit_draw(const sc_nodesplit_result* r, size_t i, double* rep, double* lik);
SC_API sc_status sc_nodesplit_to_json(const sc_nodesplit_result* r, char** out);
/* Columns r, rep, lik, diff. */
SC_API sc_status sc_nodesplit_to_csv(const sc_nodesplit_result* r, char** out);
SC_API void sc_nodesplit_result_free(sc_nodesplit_result* r);

/* ---- closed-form oracles (balanced, clamped-variance normal example) ---- */

typedef struct sc_oracle_setup {
  size_t m;
  size_t n;
  double sigma0_sq;
  double tau0_sq;
  double ybar_i;
  double ybar_rest;
} sc_oracle_setup;

typedef struct sc_oracle_result {
  double g_c_mean, g_c_variance;
  double g_p_mean, g_p_variance;
  double gdelta_mean, gdelta_variance;
  double gdelta_conflict_p;
  double x_mean, x_variance;
  double expected_score_pvalue;
  double parent_mean, parent_variance;
} sc_oracle_result;

SC_API sc_status sc_oracle_evaluate(const sc_oracle_setup* setup, sc_oracle_result* out);
SC_API sc_status sc_oracle_to_json(const sc_oracle_setup* setup, char** out);

/* ---- scalar numerics --------------------------------------------------- */

SC_API sc_status sc_landau_pdf(double x, double* out);
/* Standard Landau survival function. */
SC_API sc_status sc_landau_sf(double x, double* out);
/* Stable(1, 1) survival function with characteristic-function scale. */
SC_API sc_status sc_landau_sf_scaled(double x, double location, double scale, double* out);
SC_API sc_status sc_normal_logpdf(double x, double mean, double variance, double* out);
SC_API sc_status sc_binomial_deviance(int successes, int trials, double mu, double* out);
SC_API sc_status sc_double_binomial_logpmf(int k, int trials, double prob, double dispersion, int normalized,
                                           double* out);
SC_API sc_status sc_score_normal_variance(double theta2, double mean, double variance, double* out);
SC_API sc_status sc_score_normal_sd(double theta2, double mean, double variance, double* out);
SC_API sc_status sc_score_normal_mean(double theta2, double mean, double variance, double* out);
SC_API sc_status sc_score_double_binomial(int k, int trials, double prob, int include_logc, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SCORECHECK_SCORECHECK_H */
