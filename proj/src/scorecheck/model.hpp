#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorecheck/distributions.hpp"

namespace scorecheck {

/// One exchangeable group of real-valued observations.
struct Group {
  std::string label;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double mean() const;
  /// Sum of squared deviations about the group mean.
  double centered_sum_of_squares() const;
};

/// Observations partitioned into labelled groups. Groups may have unequal
/// sizes. Construction validates: at least one group, every group non-empty,
/// unique labels, finite values. Full analyses additionally require two or
/// more groups; a parent split of a two-group dataset has exactly one.
class GroupedDataset {
 public:
  explicit GroupedDataset(std::vector<Group> groups);

  std::size_t num_groups() const noexcept { return groups_.size(); }
  const Group& group(std::size_t i) const;
  std::span<const Group> groups() const noexcept { return groups_; }
  std::size_t total_observations() const;

  bool operator==(const GroupedDataset& other) const;

 private:
  std::vector<Group> groups_;
};

/// Hyper-parameters of the normal random-effects model
///   y_ij ~ N(theta_i, gamma), theta_i ~ N(beta, re_variance),
///   beta ~ beta_prior, gamma ~ InvGamma(gamma_prior).
struct ModelHyperParams {
  double re_variance = 5.0;
  NormalParams beta_prior{0.0, 5.0};
  InvGammaParams gamma_prior{2.0, 2.0};

  void validate() const;
};

/// Fix theta of a group (0-based index) in simulation.
struct Injection {
  std::size_t group = 0;
  double theta = 0.0;
};

struct ConflictSpec {
  std::vector<Injection> injections;
};

/// Generating values behind a simulated dataset.
struct TruthRecord {
  double beta = 0.0;
  double gamma = 0.0;
  std::vector<double> theta;
  std::vector<bool> injected;
};

struct SimulatedData {
  GroupedDataset data;
  TruthRecord truth;
};

/// Draw beta and gamma from their priors, theta_i ~ N(beta, re_variance)
/// except for injected groups, then y_ij ~ N(theta_i, gamma). Groups are
/// labelled "1".."m". Deterministic in `seed`.
SimulatedData simulate_dataset(std::size_t groups, std::size_t per_group, const ModelHyperParams& hyper,
                               const ConflictSpec& conflict, std::uint64_t seed);

struct SplitData {
  GroupedDataset parent;
  Group child;
};

/// Hold out one group: the child is that group verbatim, the parent is every
/// other group in the original order.
SplitData split_dataset(const GroupedDataset& data, std::size_t held_out);

/// `group,value` CSV, one observation per row, groups in order of first
/// appearance.
GroupedDataset parse_dataset_csv(std::string_view text);
std::string format_dataset_csv(const GroupedDataset& data);
GroupedDataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const GroupedDataset& data, const std::filesystem::path& path);

}  // namespace scorecheck
