#include "scorecheck/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/uniform.hpp>

#include "scorecheck/error.hpp"

namespace scorecheck {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// x log(y) with the convention 0 log 0 = 0.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_count(int k, int trials, const char* what) {
  if (k < 0 || k > trials) {
    throw ParameterError(std::string(what) + ": count " + std::to_string(k) + " outside [0, " +
                         std::to_string(trials) + "]");
  }
}

double log_sum_exp(const std::vector<double>& v) {
  double hi = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

std::vector<double> double_binomial_unnormalized(const DoubleBinomialParams& p) {
  std::vector<double> out(static_cast<std::size_t>(p.trials) + 1);
  for (int k = 0; k <= p.trials; ++k) out[k] = double_binomial_logpmf(k, p, false);
  return out;
}

}  // namespace

void validate(const NormalParams& p) {
  if (!std::isfinite(p.mean)) throw ParameterError("normal: mean must be finite");
  if (!positive_finite(p.variance)) {
    throw ParameterError("normal: variance must be positive, got " + std::to_string(p.variance));
  }
}

void validate(const InvGammaParams& p) {
  if (!positive_finite(p.shape) || !positive_finite(p.rate)) {
    throw ParameterError("inverse-gamma: shape and rate must be positive");
  }
}

void validate(const BetaParams& p) {
  if (!positive_finite(p.alpha) || !positive_finite(p.beta)) {
    throw ParameterError("beta: both shape parameters must be positive");
  }
}

void validate(const BinomialParams& p) {
  if (p.trials < 1) throw ParameterError("binomial: trials must be >= 1");
  if (!(p.prob >= 0.0 && p.prob <= 1.0)) throw ParameterError("binomial: prob must lie in [0, 1]");
}

void validate(const UniformParams& p) {
  if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
    throw ParameterError("uniform: need finite lower < upper");
  }
}

void validate(const DoubleBinomialParams& p) {
  if (p.trials < 1) throw ParameterError("double-binomial: trials must be >= 1");
  if (!(p.prob > 0.0 && p.prob < 1.0)) throw ParameterError("double-binomial: prob must lie in (0, 1)");
  if (!positive_finite(p.dispersion)) throw ParameterError("double-binomial: dispersion must be positive");
}

double normal_logpdf(double x, const NormalParams& params) {
  validate(params);
  const double d = x - params.mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * params.variance) + d * d / params.variance);
}

double binomial_logpmf(int k, const BinomialParams& params) {
  validate(params);
  check_count(k, params.trials, "binomial");
  return log_choose(params.trials, k) + xlogy(k, params.prob) +
         xlogy(params.trials - k, 1.0 - params.prob);
}

double binomial_deviance(int successes, int trials, double mu) {
  if (trials < 1) throw ParameterError("binomial deviance: trials must be >= 1");
  check_count(successes, trials, "binomial deviance");
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("binomial deviance: mu must lie in (0, 1)");
  const double n = trials;
  const double y = successes / n;
  return 2.0 * n * (xlogy(y, y / mu) + xlogy(1.0 - y, (1.0 - y) / (1.0 - mu)));
}

double double_binomial_logpmf(int k, const DoubleBinomialParams& params, bool normalized) {
  validate(params);
  check_count(k, params.trials, "double-binomial");
  const int n = params.trials;
  const double tau = params.dispersion;
  const double y = static_cast<double>(k) / n;
  const double at_mu = xlogy(k, params.prob) + xlogy(n - k, 1.0 - params.prob);
  const double at_y = xlogy(k, y) + xlogy(n - k, 1.0 - y);
  double value = 0.5 * std::log(tau) + log_choose(n, k) + tau * at_mu + (1.0 - tau) * at_y;
  if (normalized) value += double_binomial_log_normalizer(params);
  return value;
}

double double_binomial_log_normalizer(const DoubleBinomialParams& params) {
  validate(params);
  if (params.trials > kDoubleBinomialExactCap) {
    throw CapabilityError("double-binomial: trials " + std::to_string(params.trials) +
                          " exceeds the exact-summation cap of " +
                          std::to_string(kDoubleBinomialExactCap) +
                          "; use the unnormalized form instead");
  }
  return -log_sum_exp(double_binomial_unnormalized(params));
}

double double_binomial_dlogc_at_unit(int trials, double prob) {
  DoubleBinomialParams p{trials, prob, 1.0};
  validate(p);
  if (trials > kDoubleBinomialExactCap) {
    throw CapabilityError("double-binomial: trials " + std::to_string(trials) +
                          " exceeds the exact-summation cap of " +
                          std::to_string(kDoubleBinomialExactCap) +
                          "; the log-normalizer derivative is unavailable");
  }
  double expected_deviance = 0.0;
  for (int k = 0; k <= trials; ++k) {
    const double w = std::exp(binomial_logpmf(k, {trials, prob}));
    expected_deviance += w * binomial_deviance(k, trials, prob);
  }
  return 0.5 * expected_deviance - 0.5;
}

void validate(const Distribution& dist) {
  std::visit([](const auto& p) { validate(p); }, dist);
}

double sample_normal(const NormalParams& p, Rng& rng) {
  validate(p);
  return rng.normal(p.mean, p.variance);
}

double sample_inverse_gamma(const InvGammaParams& p, Rng& rng) {
  validate(p);
  return p.rate / rng.gamma(p.shape);
}

double sample_beta(const BetaParams& p, Rng& rng) {
  validate(p);
  const double x = rng.gamma(p.alpha);
  const double y = rng.gamma(p.beta);
  return x / (x + y);
}

int sample_binomial(const BinomialParams& p, Rng& rng) {
  validate(p);
  std::binomial_distribution<int> dist(p.trials, p.prob);
  return dist(rng.engine());
}

double sample_uniform(const UniformParams& p, Rng& rng) {
  validate(p);
  return p.lower + (p.upper - p.lower) * rng.uniform();
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double sample(const Distribution& dist, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const NormalParams& p) { return sample_normal(p, rng); },
          [&](const InvGammaParams& p) { return sample_inverse_gamma(p, rng); },
          [&](const BetaParams& p) { return sample_beta(p, rng); },
          [&](const BinomialParams& p) { return static_cast<double>(sample_binomial(p, rng)); },
          [&](const UniformParams& p) { return sample_uniform(p, rng); },
      },
      dist);
}

double cdf(const Distribution& dist, double x) {
  namespace bm = boost::math;
  validate(dist);
  return std::visit(
      overloaded{
          [&](const NormalParams& p) {
            return bm::cdf(bm::normal_distribution<double>(p.mean, std::sqrt(p.variance)), x);
          },
          [&](const InvGammaParams& p) {
            if (x <= 0.0) return 0.0;
            return bm::cdf(bm::inverse_gamma_distribution<double>(p.shape, p.rate), x);
          },
          [&](const BetaParams& p) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return bm::cdf(bm::beta_distribution<double>(p.alpha, p.beta), x);
          },
          [&](const BinomialParams& p) {
            if (x < 0.0) return 0.0;
            if (x >= p.trials) return 1.0;
            return bm::cdf(bm::binomial_distribution<double>(p.trials, p.prob), std::floor(x));
          },
          [&](const UniformParams& p) {
            return std::clamp((x - p.lower) / (p.upper - p.lower), 0.0, 1.0);
          },
      },
      dist);
}

double mean(const Distribution& dist) {
  validate(dist);
  return std::visit(
      overloaded{
          [](const NormalParams& p) { return p.mean; },
          [](const InvGammaParams& p) {
            return p.shape > 1.0 ? p.rate / (p.shape - 1.0) : std::numeric_limits<double>::infinity();
          },
          [](const BetaParams& p) { return p.alpha / (p.alpha + p.beta); },
          [](const BinomialParams& p) { return p.trials * p.prob; },
          [](const UniformParams& p) { return 0.5 * (p.lower + p.upper); },
      },
      dist);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace scorecheck
