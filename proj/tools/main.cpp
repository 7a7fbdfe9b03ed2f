#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
};

void add_common(CLI::App* app, Common& c, bool with_jobs) {
  app->add_option("--config", c.config, "INI run configuration");
  app->add_option("--seed", c.seed, "master seed (overrides [run] seed)");
  app->add_option("--out", c.out, "output directory (overrides [run] out)");
  if (with_jobs) app->add_option("--jobs", c.jobs, "worker threads, 0 = all cores (overrides [run] jobs)");
}

cli::RunConfig resolve(const Common& c) {
  cli::RunConfig cfg = c.config.empty() ? cli::RunConfig{} : cli::load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out_dir = *c.out;
  if (c.jobs) cfg.jobs = *c.jobs;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-discrepancy conflict checks for a hierarchical normal model"};
  app.set_version_flag("--version", std::string(sc_version()));
  app.require_subcommand(1);

  Common sim_opts, check_opts, split_opts, comb_opts, oracle_opts;
  auto* sim = app.add_subcommand("simulate", "simulate a dataset from a [simulate] block");
  add_common(sim, sim_opts, false);

  bool no_nodesplit = false;
  auto* chk = app.add_subcommand("check", "score check of every held-out group, with node splitting");
  add_common(chk, check_opts, true);
  chk->add_flag("--no-nodesplit", no_nodesplit, "skip the node-splitting baseline");

  auto* split = app.add_subcommand("nodesplit", "node-splitting check of every group");
  add_common(split, split_opts, true);

  std::string input, column = "p_value";
  auto* comb = app.add_subcommand("combine", "combine a CSV column of p-values");
  add_common(comb, comb_opts, false);
  comb->add_option("--input", input, "CSV file with a header row")->required();
  comb->add_option("--column", column, "column holding the p-values")->capture_default_str();

  std::optional<std::size_t> m, n;
  std::optional<double> sigma0_sq, tau0_sq, ybar_i, ybar_rest;
  auto* orc = app.add_subcommand("oracle", "closed-form results for the balanced clamped-variance example");
  add_common(orc, oracle_opts, false);
  orc->add_option("--m", m, "number of groups");
  orc->add_option("--n", n, "observations per group");
  orc->add_option("--sigma0-sq", sigma0_sq, "observation variance");
  orc->add_option("--tau0-sq", tau0_sq, "random-effects variance");
  orc->add_option("--ybar-i", ybar_i, "mean of the checked group");
  orc->add_option("--ybar-rest", ybar_rest, "mean of the other groups");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto emit = [](const cli::RunConfig& cfg, const Common& c, const std::string& name, const std::string& text) {
      std::cout << text;
      if (c.out) {
        std::filesystem::create_directories(cfg.out_dir);
        cli::write_file_atomic(cfg.out_dir / name, text);
      }
    };
    if (*sim) {
      cli::cmd_simulate(resolve(sim_opts), std::cerr);
    } else if (*chk) {
      auto cfg = resolve(check_opts);
      if (no_nodesplit) cfg.nodesplit = false;
      cli::cmd_check(cfg, std::cerr);
    } else if (*split) {
      cli::cmd_nodesplit(resolve(split_opts), std::cerr);
    } else if (*comb) {
      const auto cfg = resolve(comb_opts);
      emit(cfg, comb_opts, "combine.json", cli::cmd_combine(cfg, input, column));
    } else if (*orc) {
      auto cfg = resolve(oracle_opts);
      auto& s = cfg.oracle.setup;
      if (m) s.m = *m;
      if (n) s.n = *n;
      if (sigma0_sq) s.sigma0_sq = *sigma0_sq;
      if (tau0_sq) s.tau0_sq = *tau0_sq;
      if (ybar_i) s.ybar_i = *ybar_i;
      if (ybar_rest) s.ybar_rest = *ybar_rest;
      emit(cfg, oracle_opts, "oracle.json", cli::cmd_oracle(cfg));
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const cli::ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
