#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <scorecheck/scorecheck.h>

namespace cli {

/// Usage or configuration problem; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationBlock {
  std::size_t groups = 5;
  std::size_t per_group = 10;
  /// 0-based group indices; the config file uses 1-based numbers.
  std::vector<sc_injection> injections;
  /// Seed of the simulated dataset; defaults to the run seed.
  std::optional<std::uint64_t> seed;
};

struct OracleBlock {
  sc_oracle_setup setup{5, 10, 1.0, 1.0, 0.0, 0.0};
};

struct RunConfig {
  /// Exactly one of these is set for simulate/check/nodesplit.
  std::optional<std::filesystem::path> dataset_path;
  std::optional<SimulationBlock> simulation;

  sc_hyper hyper{};
  sc_chain_config chain{};
  std::size_t reference_draws = 2000;
  sc_expansion expansion = SC_EXPANSION_NORMAL_VARIANCE;
  sc_fit_mode mode{};
  sc_combine_config combine{};
  std::vector<double> weights;

  /// 0-based held-out groups; empty means every group.
  std::vector<std::size_t> groups;
  bool nodesplit = true;
  /// Clamp gamma in the node split only; both halves otherwise follow `mode`.
  std::optional<double> nodesplit_fixed_gamma;

  OracleBlock oracle;

  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::filesystem::path out_dir = "results";

  RunConfig();
};

/// INI text with sections [data], [simulate], [model], [chain], [check],
/// [nodesplit], [combine], [oracle], [run]. Unknown sections or keys are
/// errors. A relative [data] path resolves against `base_dir`; [run] out is
/// taken as given.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError unless exactly one data source is configured.
void require_data_source(const RunConfig& cfg);

}  // namespace cli
