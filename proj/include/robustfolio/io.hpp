#pragma once

#include <string>

#include <json.hpp>

#include "robustfolio/market.hpp"
#include "robustfolio/measures.hpp"
#include "robustfolio/oracle.hpp"
#include "robustfolio/solver.hpp"
#include "robustfolio/theorem.hpp"
#include "robustfolio/utility.hpp"

namespace robustfolio::io {

using json = nlohmann::json;

// Market file: {"steps": n, "assets": d, "nodes": [{"id", "parent", "prices"}]}
// with parent null (or -1) at the root. Leaves are nodes without children.
json market_to_json(const MarketSpec& spec);
MarketSpec market_from_json(const json& j);

// Prior file: {"vertices": [[...], ...]} in market leaf order.
json priors_to_json(const PriorSet& priors);
PriorSet priors_from_json(const json& j);

// {"family": "power", "alpha": a} or {"family": "log"}.
json utility_to_json(const UtilityFunction& u);
UtilityFunction utility_from_json(const json& j);

json measure_to_json(const MeasureVector& q);
json plan_to_json(const OptimalPlan& plan);
json duality_to_json(const DualityReport& report);
json verification_to_json(const VerificationReport& report);
json no_betting_to_json(const NoBettingSet& set);
json summary_to_json(const VerificationSummary& summary);
json instance_to_json(const TrialInstance& instance);

// Parses a file, naming the file and byte position on failure. A document of
// the form {"inputs": {...}, ...} (machine output / replay dump) is unwrapped
// to its inputs.
json load_json_file(const std::string& path);
json unwrap_inputs(const json& doc);

// Extracts the named section from a document that may be the bare object
// itself or a replay wrapper containing it.
json extract_section(const json& doc, const std::string& key);

}  // namespace robustfolio::io
