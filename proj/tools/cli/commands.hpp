#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <scorecheck/scorecheck.h>

#include "config.hpp"

namespace cli {

/// A failed library call. Parameter and parse failures map to exit code 1,
/// everything else to 2.
struct ApiError : std::runtime_error {
  ApiError(sc_status status, const std::string& message) : std::runtime_error(message), status(status) {}
  sc_status status;
};

int exit_code_for(sc_status status);

/// Write `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// <out>/data.csv and <out>/truth.json.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);

/// Score check (and node split unless disabled) for every configured group:
/// <out>/summary.json, <out>/summary.csv, <out>/group_<k>_pvalues.csv and
/// <out>/group_<k>_nodesplit.csv with k the 1-based group number.
void cmd_check(const RunConfig& cfg, std::ostream& log);

/// Node split only: <out>/summary.json, <out>/summary.csv and
/// <out>/group_<k>_nodesplit.csv.
void cmd_nodesplit(const RunConfig& cfg, std::ostream& log);

/// Combine the p-values in `column` of a CSV file. Returns the JSON text.
std::string cmd_combine(const RunConfig& cfg, const std::filesystem::path& input, const std::string& column);

/// Closed-form oracle report for cfg.oracle as JSON text.
std::string cmd_oracle(const RunConfig& cfg);

}  // namespace cli
