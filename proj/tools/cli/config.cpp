#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"data", {"path"}},
      {"simulate", {"groups", "per_group", "inject", "seed"}},
      {"model", {"re_variance", "beta_mean", "beta_variance", "gamma_shape", "gamma_rate"}},
      {"chain", {"iterations", "burn_in", "thin"}},
      {"check", {"reference_draws", "expansion", "fixed_gamma", "flat_beta_prior", "groups"}},
      {"nodesplit", {"enabled", "fixed_gamma"}},
      {"combine", {"trim_fraction", "clamp_epsilon", "null_mode", "mc_simulations", "mc_seed", "weights"}},
      {"oracle", {"m", "n", "sigma0_sq", "tau0_sq", "ybar_i", "ybar_rest"}},
      {"run", {"seed", "jobs", "out"}},
  };
  return s;
}

std::string field(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

[[noreturn]] void bad_value(const std::string& section, const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config " + field(section, key) + ": expected " + expected + ", got '" + value + "'");
}

std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(section, key, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(section, key, v, "a finite number");
  }
  return out;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
  const std::string l = boost::algorithm::to_lower_copy(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  bad_value(section, key, v, "true or false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, v, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

std::size_t to_group(const std::string& section, const std::string& key, const std::string& v) {
  const std::uint64_t g = to_u64(section, key, v);
  if (g == 0) bad_value(section, key, v, "a 1-based group number");
  return static_cast<std::size_t>(g - 1);
}

sc_expansion to_expansion(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "normal-variance") return SC_EXPANSION_NORMAL_VARIANCE;
  if (v == "normal-sd") return SC_EXPANSION_NORMAL_SD;
  if (v == "normal-mean") return SC_EXPANSION_NORMAL_MEAN;
  bad_value(section, key, v, "normal-variance, normal-sd or normal-mean");
}

}  // namespace

RunConfig::RunConfig() {
  sc_hyper_default(&hyper);
  sc_chain_config_default(&chain);
  sc_fit_mode_default(&mode);
  sc_combine_config_default(&combine);
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (known == schema().end()) {
      if (body.empty()) throw ConfigError("config: key '" + section + "' must appear inside a section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.count(key)) throw ConfigError("config: unknown key " + field(section, key));
      const std::string v = boost::algorithm::trim_copy(node.data());
      const auto& s = section;

      if (s == "data") {
        const std::filesystem::path p(v);
        cfg.dataset_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      } else if (s == "simulate") {
        if (!cfg.simulation) cfg.simulation.emplace();
        auto& sim = *cfg.simulation;
        if (key == "groups") sim.groups = to_u64(s, key, v);
        if (key == "per_group") sim.per_group = to_u64(s, key, v);
        if (key == "seed") sim.seed = to_u64(s, key, v);
        if (key == "inject") {
          // "3:20, 8:20" means theta_3 = theta_8 = 20.
          sim.injections.clear();
          for (const auto& item : split_list(v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) bad_value(s, key, item, "<group>:<theta>");
            sim.injections.push_back({to_group(s, key, boost::algorithm::trim_copy(item.substr(0, colon))),
                                      to_double(s, key, boost::algorithm::trim_copy(item.substr(colon + 1)))});
          }
        }
      } else if (s == "model") {
        const double x = to_double(s, key, v);
        if (key == "re_variance") cfg.hyper.re_variance = x;
        if (key == "beta_mean") cfg.hyper.beta_mean = x;
        if (key == "beta_variance") cfg.hyper.beta_variance = x;
        if (key == "gamma_shape") cfg.hyper.gamma_shape = x;
        if (key == "gamma_rate") cfg.hyper.gamma_rate = x;
      } else if (s == "chain") {
        const std::size_t x = to_u64(s, key, v);
        if (key == "iterations") cfg.chain.iterations = x;
        if (key == "burn_in") cfg.chain.burn_in = x;
        if (key == "thin") cfg.chain.thin = x;
      } else if (s == "check") {
        if (key == "reference_draws") cfg.reference_draws = to_u64(s, key, v);
        if (key == "expansion") cfg.expansion = to_expansion(s, key, v);
        if (key == "fixed_gamma") {
          cfg.mode.fix_gamma = 1;
          cfg.mode.fixed_gamma = to_double(s, key, v);
        }
        if (key == "flat_beta_prior") cfg.mode.flat_beta_prior = to_bool(s, key, v) ? 1 : 0;
        if (key == "groups") {
          cfg.groups.clear();
          if (boost::algorithm::to_lower_copy(v) != "all") {
            for (const auto& g : split_list(v)) cfg.groups.push_back(to_group(s, key, g));
          }
        }
      } else if (s == "nodesplit") {
        if (key == "enabled") cfg.nodesplit = to_bool(s, key, v);
        if (key == "fixed_gamma") cfg.nodesplit_fixed_gamma = to_double(s, key, v);
      } else if (s == "combine") {
        if (key == "trim_fraction") cfg.combine.trim_fraction = to_double(s, key, v);
        if (key == "clamp_epsilon") cfg.combine.clamp_epsilon = to_double(s, key, v);
        if (key == "mc_simulations") cfg.combine.mc_simulations = to_u64(s, key, v);
        if (key == "mc_seed") cfg.combine.mc_seed = to_u64(s, key, v);
        if (key == "null_mode") {
          if (v == "landau") {
            cfg.combine.null_mode = SC_NULL_LANDAU;
          } else if (v == "monte-carlo") {
            cfg.combine.null_mode = SC_NULL_MONTE_CARLO;
          } else {
            bad_value(s, key, v, "landau or monte-carlo");
          }
        }
        if (key == "weights") {
          cfg.weights.clear();
          for (const auto& w : split_list(v)) cfg.weights.push_back(to_double(s, key, w));
        }
      } else if (s == "oracle") {
        auto& o = cfg.oracle.setup;
        if (key == "m") o.m = to_u64(s, key, v);
        if (key == "n") o.n = to_u64(s, key, v);
        if (key == "sigma0_sq") o.sigma0_sq = to_double(s, key, v);
        if (key == "tau0_sq") o.tau0_sq = to_double(s, key, v);
        if (key == "ybar_i") o.ybar_i = to_double(s, key, v);
        if (key == "ybar_rest") o.ybar_rest = to_double(s, key, v);
      } else if (s == "run") {
        if (key == "seed") cfg.seed = to_u64(s, key, v);
        if (key == "jobs") cfg.jobs = static_cast<unsigned>(to_u64(s, key, v));
        if (key == "out") cfg.out_dir = v;
      }
    }
  }
  if (cfg.dataset_path && cfg.simulation) throw ConfigError("config: give either [data] or [simulate], not both");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

void require_data_source(const RunConfig& cfg) {
  if (!cfg.dataset_path && !cfg.simulation) throw ConfigError("config: needs a [data] path or a [simulate] block");
}

}  // namespace cli
