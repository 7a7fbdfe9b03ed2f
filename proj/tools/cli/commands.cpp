#include "commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <json.hpp>

namespace cli {

namespace {

using Json = nlohmann::ordered_json;

void check(sc_status status) {
  if (status != SC_OK) throw ApiError(status, std::string(sc_status_name(status)) + ": " + sc_last_error());
}

struct Deleter {
  void operator()(sc_dataset* p) const { sc_dataset_free(p); }
  void operator()(sc_truth* p) const { sc_truth_free(p); }
  void operator()(sc_check_result* p) const { sc_check_result_free(p); }
  void operator()(sc_nodesplit_result* p) const { sc_nodesplit_result_free(p); }
};
template <class T>
using Handle = std::unique_ptr<T, Deleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  sc_string_free(s);
  return out;
}

std::string format(double v) {
  if (!std::isfinite(v)) return "";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string label_for(double p) {
  if (p < 0.05) return "**";
  if (p < 0.25) return "*";
  return "";
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json hyper_json(const sc_hyper& h) {
  return Json{{"re_variance", h.re_variance},
              {"beta_prior", Json{{"mean", h.beta_mean}, {"variance", h.beta_variance}}},
              {"gamma_prior", Json{{"shape", h.gamma_shape}, {"rate", h.gamma_rate}}}};
}

sc_combine_config combine_config(const RunConfig& cfg) {
  sc_combine_config c = cfg.combine;
  c.weights = cfg.weights.empty() ? nullptr : cfg.weights.data();
  c.n_weights = cfg.weights.size();
  return c;
}

struct LoadedData {
  Handle<sc_dataset> data;
  Json description;
};

LoadedData load_data(const RunConfig& cfg, std::ostream& log, bool write_copy) {
  require_data_source(cfg);
  LoadedData out;
  if (cfg.dataset_path) {
    sc_dataset* d = nullptr;
    check(sc_dataset_read_csv(cfg.dataset_path->string().c_str(), &d));
    out.data.reset(d);
    out.description = Json{{"source", "file"}, {"path", cfg.dataset_path->generic_string()}};
  } else {
    const SimulationBlock& sim = *cfg.simulation;
    const std::uint64_t seed = sim.seed.value_or(cfg.seed);
    sc_dataset* d = nullptr;
    sc_truth* t = nullptr;
    check(sc_simulate(sim.groups, sim.per_group, &cfg.hyper, sim.injections.data(), sim.injections.size(), seed, &d,
                      &t));
    out.data.reset(d);
    Handle<sc_truth> truth(t);
    char* js = nullptr;
    check(sc_truth_to_json(truth.get(), &js));
    const Json truth_json = Json::parse(take(js));
    Json injections = Json::array();
    for (const auto& inj : sim.injections) injections.push_back(Json{{"group", inj.group + 1}, {"theta", inj.theta}});
    out.description = Json{{"source", "simulated"},
                           {"groups", sim.groups},
                           {"per_group", sim.per_group},
                           {"seed", seed},
                           {"injections", std::move(injections)},
                           {"truth", truth_json}};
    if (write_copy) {
      std::filesystem::create_directories(cfg.out_dir);
      check(sc_dataset_write_csv(out.data.get(), (cfg.out_dir / "data.csv").string().c_str()));
      write_file_atomic(cfg.out_dir / "truth.json", dump(truth_json));
      log << "simulated " << sim.groups << " groups x " << sim.per_group << " (seed " << seed << ")\n";
    }
  }
  return out;
}

std::vector<std::size_t> selected_groups(const RunConfig& cfg, std::size_t available) {
  std::vector<std::size_t> out = cfg.groups;
  if (out.empty()) {
    for (std::size_t i = 0; i < available; ++i) out.push_back(i);
  }
  for (std::size_t g : out) {
    if (g >= available) {
      throw ConfigError("config [check] groups: group " + std::to_string(g + 1) + " does not exist (dataset has " +
                        std::to_string(available) + ")");
    }
  }
  return out;
}

/// Runs `task(i)` for i in [0, count) on up to `jobs` threads. The first
/// exception is rethrown after all workers stop.
template <class F>
void run_parallel(std::size_t count, unsigned jobs, F&& task) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(jobs, count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

sc_nodesplit_options nodesplit_options(const RunConfig& cfg) {
  sc_nodesplit_options o;
  sc_nodesplit_options_default(&o);
  o.chain = cfg.chain;
  o.mode = cfg.mode;
  if (cfg.nodesplit_fixed_gamma) {
    o.mode.fix_gamma = 1;
    o.mode.fixed_gamma = *cfg.nodesplit_fixed_gamma;
  }
  o.seed = cfg.seed;
  return o;
}

Json nodesplit_config_json(const RunConfig& cfg) {
  const sc_nodesplit_options o = nodesplit_options(cfg);
  return Json{{"fixed_gamma", o.mode.fix_gamma ? Json(o.mode.fixed_gamma) : Json(nullptr)},
              {"flat_beta_prior", o.mode.flat_beta_prior != 0},
              {"seed", o.seed}};
}

struct GroupOutcome {
  Json check;
  Json nodesplit;
  std::vector<std::string> warnings;
  std::string pvalues_csv;
  std::string nodesplit_csv;
  double p_hcct = NAN, p_min = NAN, conflict_p = NAN;
  std::string label;
};

void run_nodesplit(const sc_dataset* data, std::size_t g, const RunConfig& cfg, GroupOutcome& out) {
  const sc_nodesplit_options o = nodesplit_options(cfg);
  sc_nodesplit_result* r = nullptr;
  check(sc_node_split_check(data, g, &cfg.hyper, &o, &r));
  Handle<sc_nodesplit_result> res(r);
  char* js = nullptr;
  check(sc_nodesplit_to_json(res.get(), &js));
  out.nodesplit = Json::parse(take(js));
  char* csv = nullptr;
  check(sc_nodesplit_to_csv(res.get(), &csv));
  out.nodesplit_csv = take(csv);
  out.conflict_p = sc_nodesplit_conflict_p(res.get());
}

void run_score(const sc_dataset* data, std::size_t g, const RunConfig& cfg, unsigned inner_jobs,
               GroupOutcome& out) {
  sc_check_options o;
  sc_check_options_default(&o);
  o.chain = cfg.chain;
  o.reference_draws = cfg.reference_draws;
  o.expansion = cfg.expansion;
  o.combine = combine_config(cfg);
  o.mode = cfg.mode;
  o.seed = cfg.seed;
  o.jobs = inner_jobs;
  sc_check_result* r = nullptr;
  check(sc_run_group_check(data, g, &cfg.hyper, &o, &r));
  Handle<sc_check_result> res(r);
  char* js = nullptr;
  check(sc_check_result_to_json(res.get(), &js));
  out.check = Json::parse(take(js));
  char* csv = nullptr;
  check(sc_check_result_pvalues_csv(res.get(), &csv));
  out.pvalues_csv = take(csv);
  sc_combine_result c;
  sc_check_result_combined(res.get(), &c);
  out.p_hcct = c.p_hcct;
  out.p_min = c.p_min;
  for (std::size_t i = 0; i < sc_check_result_num_diagnostics(res.get()); ++i) {
    sc_diagnostic d;
    check(sc_check_result_diagnostic(res.get(), i, &d));
    if (std::isfinite(d.rhat) && d.rhat > 1.05) {
      out.warnings.push_back("parent chain: split R-hat of " + std::string(d.name) + " is " + format(d.rhat) +
                             " (> 1.05)");
    }
  }
}

void run_groups(const RunConfig& cfg, std::ostream& log, bool score, bool nodesplit, const std::string& command) {
  LoadedData loaded = load_data(cfg, log, true);
  const sc_dataset* data = loaded.data.get();
  const std::vector<std::size_t> groups = selected_groups(cfg, sc_dataset_num_groups(data));

  unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  const auto outer = static_cast<unsigned>(std::min<std::size_t>(jobs, groups.size()));
  const unsigned inner = std::max(1u, jobs / std::max(1u, outer));

  std::vector<GroupOutcome> results(groups.size());
  std::mutex log_mu;
  run_parallel(groups.size(), outer, [&](std::size_t i) {
    GroupOutcome& out = results[i];
    const char* label = nullptr;
    check(sc_dataset_group_label(data, groups[i], &label));
    out.label = label;
    if (score) run_score(data, groups[i], cfg, inner, out);
    if (nodesplit) run_nodesplit(data, groups[i], cfg, out);
    std::lock_guard lock(log_mu);
    log << "group " << groups[i] + 1 << " (" << out.label << "): done\n";
    for (const auto& w : out.warnings) log << "warning: group " << groups[i] + 1 << ": " << w << "\n";
  });

  std::filesystem::create_directories(cfg.out_dir);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "index,group,p_hcct,p_hcct_label,p_min,p_min_label,conflict_p,conflict_p_label,warnings\n";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const GroupOutcome& r = results[i];
    const std::string k = std::to_string(groups[i] + 1);
    Json row{{"index", groups[i] + 1}, {"group", r.label}};
    if (score) {
      row["score_check"] = Json{{"combined", r.check["combined"]},
                                {"draws", r.check["draws"]},
                                {"parent_diagnostics", r.check["parent_diagnostics"]}};
      write_file_atomic(cfg.out_dir / ("group_" + k + "_pvalues.csv"), r.pvalues_csv);
    }
    if (nodesplit) {
      row["nodesplit"] = r.nodesplit;
      write_file_atomic(cfg.out_dir / ("group_" + k + "_nodesplit.csv"), r.nodesplit_csv);
    }
    row["warnings"] = r.warnings;
    rows.push_back(std::move(row));

    std::string group_label = r.label;
    if (group_label.find_first_of(",\"") != std::string::npos) {
      boost::algorithm::replace_all(group_label, "\"", "\"\"");
      group_label = "\"" + group_label + "\"";
    }
    csv << k << ',' << group_label << ',' << format(r.p_hcct) << ',' << (score ? label_for(r.p_hcct) : "") << ','
        << format(r.p_min) << ',' << (score ? label_for(r.p_min) : "") << ',' << format(r.conflict_p) << ','
        << (nodesplit ? label_for(r.conflict_p) : "") << ',' << boost::algorithm::join(r.warnings, "; ") << '\n';
  }

  Json summary{{"command", command}, {"dataset", loaded.description}, {"model", hyper_json(cfg.hyper)}};
  if (score) summary["score_check"] = results.front().check["config"];
  summary["nodesplit"] = nodesplit ? nodesplit_config_json(cfg) : Json(nullptr);
  if (nodesplit) {
    summary["nodesplit"]["chain"] = Json{{"iterations", cfg.chain.iterations},
                                          {"burn_in", cfg.chain.burn_in},
                                          {"thin", cfg.chain.thin}};
  }
  summary["significance_labels"] = Json{{"**", "p < 0.05"}, {"*", "p < 0.25"}};
  summary["groups"] = std::move(rows);
  write_file_atomic(cfg.out_dir / "summary.json", dump(summary));
  write_file_atomic(cfg.out_dir / "summary.csv", csv.str());
  log << "wrote " << (cfg.out_dir / "summary.json").string() << "\n";
}

}  // namespace

int exit_code_for(sc_status status) {
  return status == SC_ERR_PARAMETER || status == SC_ERR_PARSE ? 1 : 2;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ApiError(SC_ERR_IO, "cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out.flush()) throw ApiError(SC_ERR_IO, "error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ApiError(SC_ERR_IO, "cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.simulation) throw ConfigError("simulate: config needs a [simulate] block");
  load_data(cfg, log, true);
}

void cmd_check(const RunConfig& cfg, std::ostream& log) { run_groups(cfg, log, true, cfg.nodesplit, "check"); }

void cmd_nodesplit(const RunConfig& cfg, std::ostream& log) { run_groups(cfg, log, false, true, "nodesplit"); }

std::string cmd_combine(const RunConfig& cfg, const std::filesystem::path& input, const std::string& column) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw ApiError(SC_ERR_IO, "cannot open '" + input.string() + "' for reading");
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> col;
  std::vector<double> pvals;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    std::vector<std::string> fields;
    boost::algorithm::split(fields, line, boost::is_any_of(","));
    for (auto& f : fields) boost::algorithm::trim(f);
    if (!col) {
      const auto it = std::find(fields.begin(), fields.end(), column);
      if (it == fields.end()) {
        throw ApiError(SC_ERR_PARSE, input.string() + ":" + std::to_string(lineno) + ": no column '" + column + "'");
      }
      col = static_cast<std::size_t>(it - fields.begin());
      continue;
    }
    double v = 0.0;
    const std::string& f = *col < fields.size() ? fields[*col] : std::string();
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
      throw ApiError(SC_ERR_PARSE, input.string() + ":" + std::to_string(lineno) + ": '" + f + "' is not a number");
    }
    pvals.push_back(v);
  }
  if (!col) throw ApiError(SC_ERR_PARSE, input.string() + ": empty file");
  const sc_combine_config cc = combine_config(cfg);
  sc_combine_result r;
  check(sc_combine(pvals.data(), pvals.size(), &cc, &r));
  char* js = nullptr;
  check(sc_combine_to_json(&r, &cc, &js));
  Json out = Json::parse(take(js));
  out["input"] = Json{{"path", input.generic_string()}, {"column", column}};
  return dump(out);
}

std::string cmd_oracle(const RunConfig& cfg) {
  char* js = nullptr;
  check(sc_oracle_to_json(&cfg.oracle.setup, &js));
  return take(js);
}

}  // namespace cli
