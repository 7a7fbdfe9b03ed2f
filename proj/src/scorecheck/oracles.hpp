#pragma once

#include <cstddef>

#include "scorecheck/distributions.hpp"

namespace scorecheck {

/// Balanced normal example with clamped variances and a flat prior on the
/// common mean. sigma0_sq is the observation variance, tau0_sq the
/// random-effects variance.
struct BalancedNormalSetup {
  std::size_t m = 5;
  std::size_t n = 10;
  double sigma0_sq = 1.0;
  double tau0_sq = 1.0;
  double ybar_i = 0.0;
  double ybar_rest = 0.0;

  void validate() const;
};

struct IicDensities {
  NormalParams g_c;  // likelihood side
  NormalParams g_p;  // prior side
};

IicDensities analytic_iic(const BalancedNormalSetup& s);

/// Density of the split difference delta = lambda_rep - lambda_lik.
NormalParams analytic_gdelta(const BalancedNormalSetup& s);

/// X = (theta2 - mu) / tau0 with theta2 a child draw and mu a parent draw.
NormalParams analytic_scaled_difference(const BalancedNormalSetup& s);

NormalParams analytic_child_posterior(double ybar_i, std::size_t n, double sigma0_sq, double tau0_sq,
                                      double mu_tilde);

/// Posterior of the common mean from the m - 1 parent groups.
NormalParams analytic_parent_posterior(double ybar_rest, std::size_t m, std::size_t n, double sigma0_sq,
                                       double tau0_sq);

/// 2 Phi(-|mean| / sd): two-sided tail of `d` at zero.
double two_sided_tail_at_zero(const NormalParams& d);

/// E[2 Phi(-|X|)] for X ~ analytic_scaled_difference(s): the mean randomised
/// p-value of the variance-scale check. Gauss-Kronrod quadrature.
double expected_randomised_pvalue(const BalancedNormalSetup& s);

}  // namespace scorecheck
