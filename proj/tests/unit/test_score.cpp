#include <doctest.h>

#include <cmath>
#include <numbers>

#include "scorecheck/error.hpp"
#include "scorecheck/score.hpp"
#include "support/stats.hpp"

using namespace scorecheck;
using doctest::Approx;

namespace {

double chisq1_cdf(double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(0.5 * x)); }

double fd(const std::function<double(double)>& f, double a0, double h) { return (f(a0 + h) - f(a0 - h)) / (2.0 * h); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("normal score examples") {
  CHECK(score_normal_variance(1.3, 1.3, 2.0) == -0.5);
  CHECK(score_normal_variance(1.0 + std::sqrt(3.0), 1.0, 3.0) == Approx(0.0).epsilon(1e-15));
  CHECK(score_normal_variance(2.0, 0.0, 1.0) == 1.5);
  CHECK(score_normal_sd(2.0, 0.0, 1.0) == Approx(2.0 * 1.5 + 0.0));
  CHECK(score_normal_mean(0.7, 0.7, 4.0) == 0.0);
  CHECK(score_normal_mean(1.0, 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS(score_normal_variance(0, 0, 0), ParameterError);
  CHECK_THROWS_AS(score_normal_mean(0, 0, -1), ParameterError);
}

TEST_CASE("analytic normal scores match finite differences of the log density") {
  for (int i = 0; i < 100; ++i) {
    const double theta2 = -6.0 + 12.0 * i / 99.0;
    const double mean = 0.3 * std::sin(i), var = 0.5 + 0.05 * i;
    auto lvar = [&](double a) { return normal_logpdf(theta2, {mean, a * var}); };
    auto lsd = [&](double a) { return normal_logpdf(theta2, {mean, a * a * var}); };
    auto lmean = [&](double a) { return normal_logpdf(theta2, {mean + a, var}); };
    CHECK(rel_err(fd(lvar, 1.0, 1e-5), score_normal_variance(theta2, mean, var)) < 1e-6);
    CHECK(rel_err(fd(lsd, 1.0, 1e-5), score_normal_sd(theta2, mean, var)) < 1e-6);
    CHECK(rel_err(fd(lmean, 0.0, 1e-6), score_normal_mean(theta2, mean, var)) < 1e-8);
  }
}

TEST_CASE("score_numeric reproduces the analytic expansions over a grid") {
  const auto var_family = ExpansionFamily::numeric(
      [](double x, double a, const NormalParams& b) { return normal_logpdf(x, {b.mean, a * b.variance}); }, 1.0);
  const auto mean_family = ExpansionFamily::numeric(
      [](double x, double a, const NormalParams& b) { return normal_logpdf(x, {b.mean + a, b.variance}); }, 0.0);
  const NormalParams base{0.4, 5.0};
  for (int i = 0; i < 100; ++i) {
    const double x = -8.0 + 16.0 * i / 99.0;
    const double analytic_v = score_normal_variance(x, base.mean, base.variance);
    const double analytic_m = score_normal_mean(x, base.mean, base.variance);
    CHECK(std::abs(var_family.score(x, base) - analytic_v) <= 1e-6 * std::max(1.0, std::abs(analytic_v)));
    CHECK(std::abs(mean_family.score(x, base) - analytic_m) <= 1e-6 * std::max(1.0, std::abs(analytic_m)));
  }
}

TEST_CASE("score_numeric: linear, mixture weight, errors") {
  CHECK(score_numeric([](double x, double a) { return 3.5 * a + x; }, 2.0, 1.0) == Approx(3.5).epsilon(1e-10));
  CHECK(default_fd_step(0.0) == 1e-5);
  CHECK(default_fd_step(-40.0) == Approx(4e-4));

  // Mixture (1 - a) N(0,1) + a N(3,1): d/da log at a = 0 is f1/f0 - 1.
  const double x = 1.2;
  auto mix = [](double t, double a) {
    return std::log((1 - a) * std::exp(normal_logpdf(t, {0, 1})) + a * std::exp(normal_logpdf(t, {3, 1})));
  };
  const double analytic = std::exp(normal_logpdf(x, {3, 1}) - normal_logpdf(x, {0, 1})) - 1.0;
  // Central difference at a boundary weight still evaluates a = -h, which is a
  // valid log as long as the mixture stays positive here.
  CHECK(score_numeric(mix, 0.0, x) == Approx(analytic).epsilon(1e-6));

  CHECK_THROWS_AS(score_numeric([](double, double a) { return a; }, 1.0, 0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(score_numeric([](double, double a) { return a; }, 1.0, 0.0, -1.0), ParameterError);
  CHECK_THROWS_AS(score_numeric(LogPrior{}, 1.0, 0.0), ParameterError);
  try {
    score_numeric([](double, double a) { return a > 1.0 ? NAN : 0.0; }, 1.0, 0.0, 0.5);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("1.5") != std::string::npos);
  }
}

TEST_CASE("double-binomial dispersion score") {
  CHECK(score_double_binomial_dispersion(3, {10, 0.3, 1.0}, false) == Approx(0.5));
  CHECK(score_double_binomial_dispersion(0, {10, 0.5, 1.0}, false) == Approx(0.5 - 10.0 * std::numbers::ln2).epsilon(1e-12));
  CHECK(score_double_binomial_dispersion(0, {10, 0.5, 1.0}, false) == Approx(-6.4315).epsilon(1e-4));
  CHECK_THROWS_AS(score_double_binomial_dispersion(1, {10, 0.5, 2.0}, false), ParameterError);
  CHECK_THROWS_AS(score_double_binomial_dispersion(1, {6000, 0.5, 1.0}, true), CapabilityError);
  CHECK_NOTHROW(score_double_binomial_dispersion(1, {6000, 0.5, 1.0}, false));

  for (int trials : {1, 7, 50, 200, 500}) {
    for (double prob : {0.05, 0.3, 0.5, 0.9}) {
      for (int k = 0; k <= trials; k += std::max(1, trials / 25)) {
        auto logpmf = [&](double tau) { return double_binomial_logpmf(k, {trials, prob, tau}, true); };
        const double oracle = fd(logpmf, 1.0, 1e-5);
        const double got = score_double_binomial_dispersion(k, {trials, prob, 1.0}, true);
        CAPTURE(trials);
        CAPTURE(prob);
        CAPTURE(k);
        CHECK(std::abs(got - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
      }
    }
  }
}

TEST_CASE("expansion families") {
  CHECK(expansion_kind_from_string("normal-sd") == ExpansionKind::normal_sd);
  CHECK(std::string(to_string(ExpansionKind::double_binomial_dispersion)) == "double-binomial-dispersion");
  CHECK_THROWS_AS(expansion_kind_from_string("normal-variance-scale"), ParameterError);

  const ConditionalPrior normal = NormalParams{0.0, 5.0};
  const ConditionalPrior db = DoubleBinomialParams{20, 0.3, 1.0};
  CHECK_THROWS_AS(ExpansionFamily::normal_variance().check_compatible(db), ParameterError);
  CHECK_THROWS_AS(ExpansionFamily::double_binomial_dispersion().check_compatible(normal), ParameterError);
  CHECK_THROWS_AS(ExpansionFamily::numeric({}, 1.0).check_compatible(normal), ParameterError);
  CHECK(ExpansionFamily::normal_variance().score(std::sqrt(5.0), normal) == Approx(0.0).epsilon(1e-15));
  CHECK(ExpansionFamily::double_binomial_dispersion(false).score(6.0, db) == Approx(0.5));
  CHECK_THROWS_AS(ExpansionFamily::double_binomial_dispersion().score(6.5, db), ParameterError);
}

TEST_CASE("reference scores") {
  const ConditionalPrior prior = NormalParams{1.0, 5.0};
  Rng a(5), b(5);
  const auto refs = reference_scores(ExpansionFamily::normal_variance(), prior, 10000, a);
  CHECK(refs == reference_scores(ExpansionFamily::normal_variance(), prior, 10000, b));
  // (Z^2 - 1) / 2 has sd 1/sqrt(2).
  CHECK(std::abs(testsupport::mean(refs)) < 4.0 * std::sqrt(0.5) / 100.0);
  std::vector<double> chi(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) chi[i] = 2.0 * refs[i] + 1.0;
  CHECK(testsupport::ks_test(chi, chisq1_cdf) > 0.01);

  Rng c(6);
  CHECK_THROWS_AS(reference_scores(ExpansionFamily::normal_variance(), prior, 99, c), ParameterError);

  // Double-binomial references are scores of binomial draws.
  Rng d(7);
  const auto dbrefs = reference_scores(ExpansionFamily::double_binomial_dispersion(false),
                                       DoubleBinomialParams{30, 0.4, 1.0}, 5000, d);
  // E[D] is close to 1 for a moderately sized binomial, so the mean score is near 0.
  CHECK(std::abs(testsupport::mean(dbrefs)) < 0.1);
}

TEST_CASE("empirical p-value") {
  const std::vector<double> refs{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(empirical_pvalue(0.5, refs) == 1.0);
  CHECK(empirical_pvalue(5.5, refs) == 0.0);
  CHECK(empirical_pvalue(3.0, refs) == Approx(0.6));
  CHECK(empirical_pvalue(5.0, refs) == Approx(0.2));
  CHECK_THROWS_AS(empirical_pvalue(0.0, std::vector<double>{}), ParameterError);
}

namespace {

CheckConfig small_config(std::uint64_t seed) {
  CheckConfig cfg;
  cfg.chain = {2200, 200, 10, 0};
  cfg.reference_draws = 500;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("run_group_check: layout, pivotal identity and determinism across jobs") {
  const ModelHyperParams hyper;
  const auto sim = simulate_dataset(5, 10, hyper, {}, 4);
  CheckConfig cfg = small_config(17);
  const auto r1 = run_group_check(sim.data, 1, hyper, cfg);
  cfg.jobs = 3;
  const auto r3 = run_group_check(sim.data, 1, hyper, cfg);
  REQUIRE(r1.per_draw.size() == 200);
  CHECK(r1.label == "2");
  CHECK(r1.pvalues_csv() == r3.pvalues_csv());
  CHECK(r1.combined.p_hcct == r3.combined.p_hcct);
  CHECK(r1.pvalues_csv().rfind("m,score_observed,p_value\n1,", 0) == 0);

  const double tol = 2.0 / std::sqrt(500.0);
  for (const auto& d : r1.per_draw) {
    const double x = (d.theta2 - d.beta) / std::sqrt(hyper.re_variance);
    CHECK(d.score_observed == Approx(0.5 * (x * x - 1.0)).epsilon(1e-12));
    CHECK(d.p_value >= 0.0);
    CHECK(d.p_value <= 1.0);
    // P((Z^2 - 1)/2 >= s) = P(chi2_1 >= x^2).
    CHECK(std::abs(d.p_value - (1.0 - chisq1_cdf(x * x))) < tol);
  }
  CHECK(r1.combined.count == 200);
  CHECK(r1.combined.p_min >= 0.0);
  CHECK(r1.combined.p_min <= 1.0);

  cfg.seed = 18;
  CHECK(run_group_check(sim.data, 1, hyper, cfg).pvalues_csv() != r1.pvalues_csv());
  CHECK_THROWS_AS(run_group_check(sim.data, 5, hyper, cfg), ParameterError);
  cfg.reference_draws = 50;
  CHECK_THROWS_AS(run_group_check(sim.data, 0, hyper, cfg), ParameterError);
  cfg.reference_draws = 500;
  cfg.expansion = ExpansionFamily::double_binomial_dispersion();
  CHECK_THROWS_AS(run_group_check(sim.data, 0, hyper, cfg), ParameterError);
}

TEST_CASE("run_group_check flags an injected group") {
  const ModelHyperParams hyper;
  const auto sim = simulate_dataset(5, 10, hyper, {{{2, 20.0}}}, 2);
  const auto cfg = small_config(3);
  const auto injected = run_group_check(sim.data, 2, hyper, cfg);
  CHECK(injected.combined.p_hcct < 0.05);
  CHECK(injected.combined.p_min < 0.05);
}

TEST_CASE("sd-scale expansion doubles the observed score") {
  const ModelHyperParams hyper;
  const auto sim = simulate_dataset(5, 10, hyper, {}, 8);
  CheckConfig cfg = small_config(1);
  const auto v = run_group_check(sim.data, 0, hyper, cfg);
  cfg.expansion = ExpansionFamily::normal_sd();
  const auto s = run_group_check(sim.data, 0, hyper, cfg);
  for (std::size_t m = 0; m < v.per_draw.size(); ++m) {
    CHECK(s.per_draw[m].theta2 == v.per_draw[m].theta2);
    CHECK(s.per_draw[m].score_observed == Approx(2.0 * v.per_draw[m].score_observed));
    // Same reference draws, monotone map: identical p-values.
    CHECK(s.per_draw[m].p_value == v.per_draw[m].p_value);
  }
}
