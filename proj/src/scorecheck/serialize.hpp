#pragma once

#include <json.hpp>

#include "scorecheck/combine.hpp"
#include "scorecheck/model.hpp"
#include "scorecheck/nodesplit.hpp"
#include "scorecheck/oracles.hpp"
#include "scorecheck/score.hpp"

namespace scorecheck {

/// Key order is fixed so equal inputs serialise to identical bytes.
using Json = nlohmann::ordered_json;

Json to_json(const ModelHyperParams& h);
Json to_json(const TruthRecord& t, const GroupedDataset& data);
Json to_json(const ChainConfig& c);
Json to_json(const FitMode& m);
Json to_json(const CombineConfig& c);
Json to_json(const CombineResult& r);
Json to_json(const CheckConfig& c);
Json to_json(const std::vector<ParameterDiagnostics>& d);
/// Combined values, config echo and diagnostics; per-draw values go to CSV.
Json to_json(const ScoreCheckResult& r, const CheckConfig& c);
Json to_json(const NodeSplitResult& r);
Json to_json(const BalancedNormalSetup& s);
/// All closed-form quantities for one setup.
Json oracle_report(const BalancedNormalSetup& s);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

}  // namespace scorecheck
