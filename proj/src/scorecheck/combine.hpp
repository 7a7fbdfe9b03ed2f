#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scorecheck {

enum class NullMode { landau, monte_carlo };

struct CombineConfig {
  /// Fraction of order statistics dropped at each end for p_min; in [0, 0.25).
  double trim_fraction = 0.025;
  /// HCCT weights, one per p-value, summing to 1. Empty means equal weights.
  std::vector<double> weights;
  /// p-values are clamped into [eps, 1 - eps] before the cotangent; eps < 1e-6.
  double clamp_epsilon = 1e-15;
  NullMode null_mode = NullMode::landau;
  /// Monte-Carlo null size and stream; used only when null_mode = monte_carlo.
  std::size_t mc_simulations = 10000;
  std::uint64_t mc_seed = 0;

  void validate() const;
};

/// Yuan order-statistic bound: min over the trimmed range of min{1, M p_(j) / j}.
double yuan_pmin(std::span<const double> pvals, double trim_fraction);

struct HcctStatistic {
  double t = 0.0;
  /// (2/pi)(-sum w log w + 1 - Euler gamma)
  double location = 0.0;
};

/// T = sum w_j cot(pi p_j / 2) with clamped p_j. Empty `weights` means 1/M each.
HcctStatistic hcct_statistic(std::span<const double> pvals, std::span<const double> weights,
                             double clamp_epsilon = 1e-15);

double hcct_location(std::span<const double> weights);
double hcct_location_equal(std::size_t count);

/// Asymptotic tail of T under independence: unit-scale stable(1, 1) law
/// centred at `location`.
double hcct_landau_pvalue(double t, double location);

/// Sorted sample of T under independent uniform p-values.
class HcctNull {
 public:
  explicit HcctNull(std::vector<double> sorted_sample);

  /// Fraction of null statistics >= t.
  double exceedance(double t) const;
  /// Empirical quantile (inverse of the lower-tail ECDF).
  double quantile(double q) const;
  std::span<const double> sample() const noexcept { return sample_; }

 private:
  std::vector<double> sample_;
};

/// Requires n_sim >= 10^4. Simulation blocks run on independent streams in
/// parallel; the sample depends only on the arguments.
HcctNull monte_carlo_null(std::size_t count, std::span<const double> weights, std::size_t n_sim,
                          std::uint64_t seed, double clamp_epsilon = 1e-15, unsigned jobs = 0);

struct CombineResult {
  std::size_t count = 0;
  double p_min = 1.0;
  double t_hcct = 0.0;
  double location = 0.0;
  double p_hcct = 1.0;
};

CombineResult combine_pvalues(std::span<const double> pvals, const CombineConfig& cfg);

/// "**" below 0.05, "*" below 0.25, otherwise empty. Labels only.
std::string significance_label(double p);

const char* to_string(NullMode mode);
NullMode null_mode_from_string(const std::string& name);

}  // namespace scorecheck
