#include "scorecheck/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scorecheck/error.hpp"
#include "scorecheck/io.hpp"
#include "scorecheck/rng.hpp"

namespace scorecheck {

double Group::mean() const {
  if (values.empty()) throw ParameterError("group '" + label + "' is empty");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double Group::centered_sum_of_squares() const {
  const double m = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss;
}

GroupedDataset::GroupedDataset(std::vector<Group> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw ParameterError("dataset needs at least one group");
  std::set<std::string> seen;
  for (const Group& g : groups_) {
    if (g.values.empty()) throw ParameterError("group '" + g.label + "' has no observations");
    if (!seen.insert(g.label).second) throw ParameterError("duplicate group label '" + g.label + "'");
    for (double v : g.values) {
      if (!std::isfinite(v)) throw ParameterError("group '" + g.label + "' contains a non-finite value");
    }
  }
}

const Group& GroupedDataset::group(std::size_t i) const {
  if (i >= groups_.size()) {
    throw ParameterError("group index " + std::to_string(i) + " out of range (have " +
                         std::to_string(groups_.size()) + ")");
  }
  return groups_[i];
}

std::size_t GroupedDataset::total_observations() const {
  std::size_t n = 0;
  for (const Group& g : groups_) n += g.size();
  return n;
}

bool GroupedDataset::operator==(const GroupedDataset& other) const {
  if (groups_.size() != other.groups_.size()) return false;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].label != other.groups_[i].label || groups_[i].values != other.groups_[i].values) {
      return false;
    }
  }
  return true;
}

void ModelHyperParams::validate() const {
  if (!(std::isfinite(re_variance) && re_variance > 0.0)) {
    throw ParameterError("random-effects variance must be positive");
  }
  scorecheck::validate(beta_prior);
  scorecheck::validate(gamma_prior);
}

SimulatedData simulate_dataset(std::size_t groups, std::size_t per_group, const ModelHyperParams& hyper,
                               const ConflictSpec& conflict, std::uint64_t seed) {
  if (groups < 2) throw ParameterError("simulate: need at least 2 groups");
  if (per_group < 1) throw ParameterError("simulate: need at least 1 observation per group");
  hyper.validate();

  TruthRecord truth;
  truth.injected.assign(groups, false);
  std::vector<double> fixed(groups, 0.0);
  for (const Injection& inj : conflict.injections) {
    if (inj.group >= groups) {
      throw ParameterError("simulate: injection group index " + std::to_string(inj.group) +
                           " out of range for " + std::to_string(groups) + " groups");
    }
    if (!std::isfinite(inj.theta)) throw ParameterError("simulate: injected theta must be finite");
    truth.injected[inj.group] = true;
    fixed[inj.group] = inj.theta;
  }

  Rng rng(seed, {stream::simulate});
  truth.beta = sample_normal(hyper.beta_prior, rng);
  truth.gamma = sample_inverse_gamma(hyper.gamma_prior, rng);
  // A theta is drawn for every group, injected or not, so injecting one group
  // leaves the draws for all other groups unchanged.
  truth.theta.resize(groups);
  for (std::size_t i = 0; i < groups; ++i) {
    const double drawn = rng.normal(truth.beta, hyper.re_variance);
    truth.theta[i] = truth.injected[i] ? fixed[i] : drawn;
  }

  std::vector<Group> out(groups);
  for (std::size_t i = 0; i < groups; ++i) {
    out[i].label = std::to_string(i + 1);
    out[i].values.resize(per_group);
    for (double& y : out[i].values) y = rng.normal(truth.theta[i], truth.gamma);
  }
  return {GroupedDataset(std::move(out)), std::move(truth)};
}

SplitData split_dataset(const GroupedDataset& data, std::size_t held_out) {
  if (data.num_groups() < 2) throw ParameterError("split: need at least 2 groups");
  const Group& child = data.group(held_out);
  std::vector<Group> rest;
  rest.reserve(data.num_groups() - 1);
  for (std::size_t i = 0; i < data.num_groups(); ++i) {
    if (i != held_out) rest.push_back(data.group(i));
  }
  return {GroupedDataset(std::move(rest)), child};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

GroupedDataset parse_dataset_csv(std::string_view text) {
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "dataset line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (line != "group,value") throw ParseError(where + "expected header 'group,value'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(where + "expected exactly two fields");
    }
    const std::string_view label = trim(line.substr(0, comma));
    const std::string_view field = trim(line.substr(comma + 1));
    if (label.empty()) throw ParseError(where + "empty group label");
    if (label.find('"') != std::string_view::npos) throw ParseError(where + "quoted labels are not supported");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ParseError(where + "cannot parse value '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) throw ParseError(where + "non-finite value");
    auto [it, inserted] = index.try_emplace(std::string(label), groups.size());
    if (inserted) groups.push_back({std::string(label), {}});
    groups[it->second].values.push_back(value);
  }
  if (!header_seen) throw ParseError("dataset: empty input");
  if (groups.empty()) throw ParseError("dataset: no observations");
  return GroupedDataset(std::move(groups));
}

std::string format_dataset_csv(const GroupedDataset& data) {
  std::string out = "group,value\n";
  for (const Group& g : data.groups()) {
    for (double v : g.values) {
      out += g.label;
      out += ',';
      out += format_double(v);
      out += '\n';
    }
  }
  return out;
}

GroupedDataset read_dataset_csv(const std::filesystem::path& path) {
  return parse_dataset_csv(read_text_file(path));
}

void write_dataset_csv(const GroupedDataset& data, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_dataset_csv(data));
}

}  // namespace scorecheck
