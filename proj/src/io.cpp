#include "robustfolio/io.hpp"

#include <fstream>

namespace robustfolio::io {

namespace {

[[noreturn]] void parse_fail(const std::string& context, const std::string& detail) {
    raise(ErrorKind::ParseError, context + ": " + detail);
}

double number_field(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_number()) parse_fail(context, std::string(key) + " missing or not a number");
    return j[key].get<double>();
}

}  // namespace

json market_to_json(const MarketSpec& spec) {
    json nodes = json::array();
    for (const auto& node : spec.nodes) {
        json n;
        n["id"] = node.id;
        if (node.parent < 0)
            n["parent"] = nullptr;
        else
            n["parent"] = node.parent;
        n["prices"] = node.prices;
        nodes.push_back(std::move(n));
    }
    return json{{"steps", spec.steps}, {"assets", spec.assets}, {"nodes", std::move(nodes)}};
}

MarketSpec market_from_json(const json& j) {
    const std::string ctx = "market";
    if (!j.is_object()) parse_fail(ctx, "expected an object");
    MarketSpec spec;
    spec.steps = static_cast<int>(number_field(j, "steps", ctx));
    spec.assets = static_cast<int>(number_field(j, "assets", ctx));
    if (!j.contains("nodes") || !j["nodes"].is_array()) parse_fail(ctx, "nodes missing");
    for (const auto& n : j["nodes"]) {
        MarketNodeSpec node;
        node.id = static_cast<int>(number_field(n, "id", ctx));
        if (!n.contains("parent")) parse_fail(ctx, "node parent missing");
        node.parent = n["parent"].is_null() ? -1 : n["parent"].get<int>();
        if (!n.contains("prices") || !n["prices"].is_array()) parse_fail(ctx, "node prices missing");
        for (const auto& p : n["prices"]) {
            if (!p.is_number()) parse_fail(ctx, "non-numeric price");
            node.prices.push_back(p.get<double>());
        }
        spec.nodes.push_back(std::move(node));
    }
    return spec;
}

json priors_to_json(const PriorSet& priors) {
    json vertices = json::array();
    for (const auto& v : priors.vertices) vertices.push_back(v.weights);
    return json{{"vertices", std::move(vertices)}};
}

PriorSet priors_from_json(const json& j) {
    const std::string ctx = "priors";
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
        parse_fail(ctx, "vertices missing");
    PriorSet priors;
    for (const auto& row : j["vertices"]) {
        if (!row.is_array()) parse_fail(ctx, "vertex is not an array");
        MeasureVector q;
        for (const auto& w : row) {
            if (!w.is_number()) parse_fail(ctx, "non-numeric weight");
            q.weights.push_back(w.get<double>());
        }
        priors.vertices.push_back(std::move(q));
    }
    return priors;
}

json utility_to_json(const UtilityFunction& u) {
    switch (u.family) {
        case UtilityFamily::power:
            return json{{"family", "power"}, {"alpha", u.alpha}};
        case UtilityFamily::log:
            return json{{"family", "log"}};
        case UtilityFamily::custom:
            raise(ErrorKind::DomainError, "custom utilities have no file form");
    }
    return {};
}

UtilityFunction utility_from_json(const json& j) {
    const std::string ctx = "utility";
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        parse_fail(ctx, "family missing");
    const std::string family = j["family"].get<std::string>();
    if (family == "log") return UtilityFunction::log();
    if (family == "power") return UtilityFunction::power(number_field(j, "alpha", ctx));
    parse_fail(ctx, "unknown family '" + family + "'");
}

json measure_to_json(const MeasureVector& q) { return json(q.weights); }

json plan_to_json(const OptimalPlan& plan) {
    json holdings = json::array();
    for (std::size_t node = 0; node < plan.portfolio.holdings.size(); ++node) {
        if (plan.portfolio.holdings[node].empty()) continue;
        holdings.push_back(json{{"node", node}, {"amounts", plan.portfolio.holdings[node]}});
    }
    json out{{"initial_wealth", plan.portfolio.initial_wealth},
             {"holdings", std::move(holdings)},
             {"terminal_wealth", plan.terminal_wealth},
             {"value", plan.value},
             {"worst_case_prior", plan.worst_case_prior.weights},
             {"worst_case_mixture", plan.worst_case_mixture}};
    if (plan.dual_measure.has_value()) out["dual_measure"] = plan.dual_measure->weights;
    if (plan.dual_value.has_value()) out["dual_value"] = *plan.dual_value;
    if (plan.y.has_value()) out["y"] = *plan.y;
    return out;
}

json duality_to_json(const DualityReport& report) {
    return json{{"primal_value", report.primal_value},
                {"y_star", report.y_star},
                {"dual_bound", report.dual_bound},
                {"duality_gap", report.duality_gap},
                {"terminal_wealth", report.terminal_wealth},
                {"dual_terminal_wealth", report.dual_terminal_wealth},
                {"wealth_identity_error", report.wealth_identity_error},
                {"product_expectation", report.product_expectation},
                {"product_identity_error", report.product_identity_error},
                {"martingale_identity_error", report.martingale_identity_error},
                {"dual_measure", report.dual_measure.weights},
                {"pass", report.pass}};
}

json verification_to_json(const VerificationReport& report) {
    json out{{"market_id", report.market_id},
             {"detector_riskless", report.detector_riskless},
             {"smm_in_priors", report.smm_in_priors},
             {"emm_in_priors", report.emm_in_priors},
             {"agreement", report.agreement},
             {"value", report.value},
             {"u_of_x", report.u_of_x},
             {"wealth_spread", report.wealth_spread},
             {"terminal_wealth", report.terminal_wealth},
             {"worst_case_mixture", report.worst_case_mixture}};
    if (report.emm_certificate.has_value()) {
        out["emm_certificate"] = json{{"measure", report.emm_certificate->measure.weights},
                                      {"mixture", report.emm_certificate->mixture}};
    }
    if (report.smm_certificate.has_value()) {
        out["smm_certificate"] = json{{"measure", report.smm_certificate->measure.weights},
                                      {"mixture", report.smm_certificate->mixture}};
    }
    return out;
}

json no_betting_to_json(const NoBettingSet& set) {
    json out{{"points", set.points}};
    if (set.interval.has_value())
        out["interval"] = json{{"lower", set.interval->first}, {"upper", set.interval->second}};
    return out;
}

json summary_to_json(const VerificationSummary& summary) {
    json disagreements = json::array();
    for (std::size_t i = 0; i < summary.disagreeing_instances.size(); ++i) {
        json item = instance_to_json(summary.disagreeing_instances[i]);
        item["report"] = verification_to_json(summary.disagreeing_reports[i]);
        disagreements.push_back(std::move(item));
    }
    return json{{"trials", summary.trials},
                {"agreements", summary.agreements},
                {"agreement_rate", summary.agreement_rate},
                {"disagreements", std::move(disagreements)}};
}

json instance_to_json(const TrialInstance& instance) {
    return json{{"inputs", json{{"market", market_to_json(instance.market)},
                                {"priors", priors_to_json(instance.priors)},
                                {"utility", utility_to_json(instance.utility)},
                                {"x", instance.x},
                                {"trial", instance.trial}}}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorKind::ParseError,
              path + " at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

json unwrap_inputs(const json& doc) {
    if (doc.is_object() && doc.contains("inputs") && doc["inputs"].is_object())
        return doc["inputs"];
    return doc;
}

json extract_section(const json& doc, const std::string& key) {
    const json inner = unwrap_inputs(doc);
    if (inner.is_object() && inner.contains(key)) return inner[key];
    return inner;
}

}  // namespace robustfolio::io
