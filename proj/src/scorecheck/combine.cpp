#include "scorecheck/combine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scorecheck/distributions.hpp"
#include "scorecheck/error.hpp"
#include "scorecheck/parallel.hpp"
#include "scorecheck/rng.hpp"

namespace scorecheck {

namespace {

using std::numbers::pi;

void check_pvalues(std::span<const double> pvals) {
  if (pvals.empty()) throw ParameterError("combine: no p-values");
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("combine: p-values must lie in [0, 1]");
  }
}

void check_weights(std::span<const double> weights, std::size_t count) {
  if (weights.empty()) return;
  if (weights.size() != count) {
    throw ParameterError("combine: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(count) + " p-values");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(std::isfinite(w) && w > 0.0)) throw ParameterError("combine: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("combine: weights must sum to 1");
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1e-6)) throw ParameterError("combine: clamp epsilon must lie in (0, 1e-6)");
}

// cot(pi p / 2). On [1/4, 3/4] the form cot(pi/4 + u) = (1 - tan u) / (1 + tan u)
// is well conditioned and returns exactly 1 at p = 1/2.
double cot_half_pi(double p, double eps) {
  const double c = std::clamp(p, eps, 1.0 - eps);
  if (c >= 0.25 && c <= 0.75) {
    const double t = std::tan(0.5 * pi * (c - 0.5));
    return (1.0 - t) / (1.0 + t);
  }
  return 1.0 / std::tan(0.5 * pi * c);
}

}  // namespace

void CombineConfig::validate() const {
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.25)) {
    throw ParameterError("combine: trim fraction must lie in [0, 0.25)");
  }
  check_epsilon(clamp_epsilon);
  if (!weights.empty()) check_weights(weights, weights.size());
  if (null_mode == NullMode::monte_carlo && mc_simulations < 10000) {
    throw ParameterError("combine: Monte-Carlo null needs at least 10000 simulations");
  }
}

double yuan_pmin(std::span<const double> pvals, double trim_fraction) {
  check_pvalues(pvals);
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.25)) {
    throw ParameterError("p_min: trim fraction must lie in [0, 0.25)");
  }
  std::vector<double> sorted(pvals.begin(), pvals.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const auto cut = static_cast<std::size_t>(std::ceil(trim_fraction * static_cast<double>(m)));
  // 1-based j in [cut + 1, m - cut].
  if (2 * cut >= m) {
    throw ParameterError("p_min: trimming " + std::to_string(cut) + " per side leaves no order statistics of " +
                         std::to_string(m));
  }
  double best = 1.0;
  for (std::size_t j = cut + 1; j <= m - cut; ++j) {
    best = std::min(best, static_cast<double>(m) * sorted[j - 1] / static_cast<double>(j));
  }
  return std::min(best, 1.0);
}

double hcct_location(std::span<const double> weights) {
  double entropy = 0.0;
  for (double w : weights) entropy -= w * std::log(w);
  return (2.0 / pi) * (entropy + 1.0 - std::numbers::egamma);
}

double hcct_location_equal(std::size_t count) {
  if (count == 0) throw ParameterError("hcct: no p-values");
  return (2.0 / pi) * (std::log(static_cast<double>(count)) + 1.0 - std::numbers::egamma);
}

HcctStatistic hcct_statistic(std::span<const double> pvals, std::span<const double> weights, double clamp_epsilon) {
  check_pvalues(pvals);
  check_weights(weights, pvals.size());
  check_epsilon(clamp_epsilon);
  HcctStatistic out;
  if (weights.empty()) {
    for (double p : pvals) out.t += cot_half_pi(p, clamp_epsilon);
    out.t /= static_cast<double>(pvals.size());
    out.location = hcct_location_equal(pvals.size());
  } else {
    for (std::size_t j = 0; j < pvals.size(); ++j) out.t += weights[j] * cot_half_pi(pvals[j], clamp_epsilon);
    out.location = hcct_location(weights);
  }
  return out;
}

double hcct_landau_pvalue(double t, double location) { return landau_sf(t, location, 1.0); }

HcctNull::HcctNull(std::vector<double> sorted_sample) : sample_(std::move(sorted_sample)) {
  if (sample_.empty()) throw ParameterError("hcct null: empty sample");
  if (!std::is_sorted(sample_.begin(), sample_.end())) throw ParameterError("hcct null: sample not sorted");
}

double HcctNull::exceedance(double t) const {
  const auto it = std::lower_bound(sample_.begin(), sample_.end(), t);
  return static_cast<double>(sample_.end() - it) / static_cast<double>(sample_.size());
}

double HcctNull::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("hcct null: quantile level must lie in [0, 1]");
  const double n = static_cast<double>(sample_.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n));
  if (k > 0) --k;
  return sample_[std::min(k, sample_.size() - 1)];
}

HcctNull monte_carlo_null(std::size_t count, std::span<const double> weights, std::size_t n_sim,
                          std::uint64_t seed, double clamp_epsilon, unsigned jobs) {
  if (count == 0) throw ParameterError("hcct null: count must be positive");
  if (n_sim < 10000) throw ParameterError("hcct null: need at least 10000 simulations");
  check_weights(weights, count);
  check_epsilon(clamp_epsilon);

  constexpr std::size_t kBlock = 1000;
  const std::size_t blocks = (n_sim + kBlock - 1) / kBlock;
  std::vector<double> sample(n_sim);
  parallel_for(blocks, jobs, [&](std::size_t b) {
    Rng rng(seed, {stream::hcct_null, b});
    const std::size_t end = std::min(n_sim, (b + 1) * kBlock);
    for (std::size_t s = b * kBlock; s < end; ++s) {
      double t = 0.0;
      if (weights.empty()) {
        for (std::size_t j = 0; j < count; ++j) t += cot_half_pi(rng.uniform(), clamp_epsilon);
        t /= static_cast<double>(count);
      } else {
        for (std::size_t j = 0; j < count; ++j) t += weights[j] * cot_half_pi(rng.uniform(), clamp_epsilon);
      }
      sample[s] = t;
    }
  });
  std::sort(sample.begin(), sample.end());
  return HcctNull(std::move(sample));
}

CombineResult combine_pvalues(std::span<const double> pvals, const CombineConfig& cfg) {
  cfg.validate();
  CombineResult out;
  out.count = pvals.size();
  out.p_min = yuan_pmin(pvals, cfg.trim_fraction);
  const HcctStatistic stat = hcct_statistic(pvals, cfg.weights, cfg.clamp_epsilon);
  out.t_hcct = stat.t;
  out.location = stat.location;
  if (cfg.null_mode == NullMode::landau) {
    out.p_hcct = hcct_landau_pvalue(stat.t, stat.location);
  } else {
    out.p_hcct = monte_carlo_null(pvals.size(), cfg.weights, cfg.mc_simulations, cfg.mc_seed, cfg.clamp_epsilon)
                     .exceedance(stat.t);
  }
  return out;
}

std::string significance_label(double p) {
  if (p < 0.05) return "**";
  if (p < 0.25) return "*";
  return "";
}

const char* to_string(NullMode mode) { return mode == NullMode::landau ? "landau" : "monte-carlo"; }

NullMode null_mode_from_string(const std::string& name) {
  if (name == "landau") return NullMode::landau;
  if (name == "monte-carlo" || name == "monte_carlo") return NullMode::monte_carlo;
  throw ParameterError("unknown null mode '" + name + "' (expected landau or monte-carlo)");
}

}  // namespace scorecheck
