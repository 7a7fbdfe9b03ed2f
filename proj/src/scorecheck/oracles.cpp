#include "scorecheck/oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "scorecheck/error.hpp"

namespace scorecheck {

namespace {

void check_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0)) throw ParameterError(std::string("oracle: ") + what + " must be positive");
}

}  // namespace

void BalancedNormalSetup::validate() const {
  if (m < 2) throw ParameterError("oracle: need m >= 2");
  if (n < 1) throw ParameterError("oracle: need n >= 1");
  check_positive(sigma0_sq, "sigma0_sq");
  check_positive(tau0_sq, "tau0_sq");
  if (!std::isfinite(ybar_i) || !std::isfinite(ybar_rest)) throw ParameterError("oracle: group means must be finite");
}

IicDensities analytic_iic(const BalancedNormalSetup& s) {
  s.validate();
  const double m = static_cast<double>(s.m), n = static_cast<double>(s.n);
  return {{s.ybar_i, s.sigma0_sq / n},
          {s.ybar_rest, m / (m - 1.0) * s.tau0_sq + s.sigma0_sq / (n * (m - 1.0))}};
}

NormalParams analytic_gdelta(const BalancedNormalSetup& s) {
  s.validate();
  const double m = static_cast<double>(s.m), n = static_cast<double>(s.n);
  return {s.ybar_rest - s.ybar_i, m / (m - 1.0) * (s.tau0_sq + s.sigma0_sq / n)};
}

NormalParams analytic_scaled_difference(const BalancedNormalSetup& s) {
  s.validate();
  const double m = static_cast<double>(s.m), n = static_cast<double>(s.n);
  const double tau0 = std::sqrt(s.tau0_sq);
  const double k = s.sigma0_sq / (n * tau0) + tau0;
  return {(s.ybar_i - s.ybar_rest) / k, (s.sigma0_sq / (n * tau0) + tau0 / (m - 1.0)) / k};
}

NormalParams analytic_child_posterior(double ybar_i, std::size_t n, double sigma0_sq, double tau0_sq,
                                      double mu_tilde) {
  if (n < 1) throw ParameterError("oracle: need n >= 1");
  check_positive(sigma0_sq, "sigma0_sq");
  check_positive(tau0_sq, "tau0_sq");
  const double nn = static_cast<double>(n);
  const double prec = nn / sigma0_sq + 1.0 / tau0_sq;
  return {(nn * ybar_i / sigma0_sq + mu_tilde / tau0_sq) / prec, 1.0 / prec};
}

NormalParams analytic_parent_posterior(double ybar_rest, std::size_t m, std::size_t n, double sigma0_sq,
                                       double tau0_sq) {
  if (m < 2) throw ParameterError("oracle: parent posterior needs m >= 2");
  if (n < 1) throw ParameterError("oracle: need n >= 1");
  check_positive(sigma0_sq, "sigma0_sq");
  check_positive(tau0_sq, "tau0_sq");
  return {ybar_rest, (tau0_sq + sigma0_sq / static_cast<double>(n)) / (static_cast<double>(m) - 1.0)};
}

double two_sided_tail_at_zero(const NormalParams& d) {
  validate(d);
  return 2.0 * normal_cdf(-std::abs(d.mean) / std::sqrt(d.variance));
}

double expected_randomised_pvalue(const BalancedNormalSetup& s) {
  const NormalParams x = analytic_scaled_difference(s);
  const double sd = std::sqrt(x.variance);
  auto f = [&](double z) {
    const double v = x.mean + sd * z;
    return std::exp(-0.5 * z * z) * 2.0 * normal_cdf(-std::abs(v));
  };
  // Split at the kink |v| = 0 so each panel is smooth.
  const double kink = -x.mean / sd;
  double total = 0.0;
  const double lo = -12.0, hi = 12.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (kink > lo && kink < hi) {
    total = GK::integrate(f, lo, kink, 15, 1e-13) + GK::integrate(f, kink, hi, 15, 1e-13);
  } else {
    total = GK::integrate(f, lo, hi, 15, 1e-13);
  }
  return total / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace scorecheck
