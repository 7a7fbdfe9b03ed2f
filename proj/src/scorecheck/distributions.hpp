#pragma once

#include <variant>

#include "scorecheck/rng.hpp"

namespace scorecheck {

/// Normal distribution. The second parameter is the VARIANCE everywhere in
/// this library, never the standard deviation.
struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;
};

struct InvGammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct BinomialParams {
  int trials = 1;
  double prob = 0.5;
};

struct UniformParams {
  double lower = 0.0;
  double upper = 1.0;
};

/// Efron's double binomial: a binomial(trials, prob) with an extra dispersion
/// parameter. dispersion = 1 recovers the ordinary binomial exactly.
struct DoubleBinomialParams {
  int trials = 1;
  double prob = 0.5;
  double dispersion = 1.0;
};

void validate(const NormalParams& p);
void validate(const InvGammaParams& p);
void validate(const BetaParams& p);
void validate(const BinomialParams& p);
void validate(const UniformParams& p);
void validate(const DoubleBinomialParams& p);

double normal_logpdf(double x, const NormalParams& params);
double binomial_logpmf(int k, const BinomialParams& params);

/// Binomial deviance D(y, mu) = 2 n [y log(y/mu) + (1-y) log((1-y)/(1-mu))],
/// y = successes / trials, with 0 log 0 = 0.
double binomial_deviance(int successes, int trials, double mu);

/// Largest `trials` for which the double-binomial normaliser is computed by
/// exact summation.
inline constexpr int kDoubleBinomialExactCap = 5000;

/// Log pmf of the double binomial. With `normalized` the constant c(mu, tau, n)
/// is included (exact summation over 0..trials; CapabilityError above the
/// cap). Without it the value is log of phi^{1/2} C(n,k) g_mu^phi g_y^{1-phi}.
double double_binomial_logpmf(int k, const DoubleBinomialParams& params, bool normalized);

/// log c(mu, tau, n) by exact summation.
double double_binomial_log_normalizer(const DoubleBinomialParams& params);

/// d/dtau log c(mu, tau, n) at tau = 1. Uses the identity
/// d log c / d tau |_1 = E_binom[D]/2 - 1/2, which is exact because the
/// unnormalised family sums to one at tau = 1.
double double_binomial_dlogc_at_unit(int trials, double prob);

/// Density of the standard Landau distribution,
/// p(x) = (1/pi) int_0^inf exp(-u log u - x u) sin(pi u) du.
double landau_pdf(double x);

/// Survival function 1 - F(x) of the standard Landau distribution above.
/// Absolute error below 1e-9 across the real line; exactly 1 for x < -10.
double landau_sf(double x);

/// Survival function of the stable(alpha = 1, beta = 1) law with the given
/// location and scale c in the characteristic-function parameterisation
/// phi(t) = exp(i t mu - c|t| (1 + i (2/pi) sign(t) log|t|)).
/// The standard Landau above is the case location = 0, scale = pi/2.
double landau_sf(double x, double location, double scale);

using Distribution =
    std::variant<NormalParams, InvGammaParams, BetaParams, BinomialParams, UniformParams>;

void validate(const Distribution& dist);
double sample(const Distribution& dist, Rng& rng);
double cdf(const Distribution& dist, double x);
double mean(const Distribution& dist);

double sample_normal(const NormalParams& p, Rng& rng);
double sample_inverse_gamma(const InvGammaParams& p, Rng& rng);
double sample_beta(const BetaParams& p, Rng& rng);
int sample_binomial(const BinomialParams& p, Rng& rng);
double sample_uniform(const UniformParams& p, Rng& rng);

/// Standard normal lower-tail probability.
double normal_cdf(double z);

}  // namespace scorecheck
