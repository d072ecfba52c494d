#include "robustfolio/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "robustfolio/io.hpp"
#include "robustfolio/oracle.hpp"

namespace robustfolio::cli {

namespace {

using io::json;

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt6(v[i]);
    }
    return s + ")";
}

// Inputs resolved from files, with replay documents filling the gaps.
struct Loaded {
    MarketSpec market_spec;
    FiniteMarket market;
    PriorSet priors;
    UtilityFunction utility;
    double x = 1.0;
    SolverConfig solver;
    json market_doc;
};

Loaded load_inputs(const RunConfig& cfg, bool need_market, bool need_priors) {
    Loaded in;
    json replay;
    if (need_market) {
        if (cfg.market_path.empty()) raise(ErrorKind::ParseError, "--market file required");
        in.market_doc = io::load_json_file(cfg.market_path);
        replay = io::unwrap_inputs(in.market_doc);
        in.market_spec = io::market_from_json(io::extract_section(in.market_doc, "market"));
        in.market = build_market(in.market_spec);
    }
    if (need_priors) {
        if (!cfg.priors_path.empty()) {
            in.priors = io::priors_from_json(
                io::extract_section(io::load_json_file(cfg.priors_path), "priors"));
        } else if (replay.is_object() && replay.contains("priors")) {
            in.priors = io::priors_from_json(replay["priors"]);
        } else {
            raise(ErrorKind::ParseError, "--priors file required");
        }
    }
    if (!cfg.utility_spec.empty()) {
        if (cfg.utility_spec.front() == '{') {
            try {
                in.utility = io::utility_from_json(json::parse(cfg.utility_spec));
            } catch (const json::parse_error& e) {
                raise(ErrorKind::ParseError, std::string("--utility: ") + e.what());
            }
        } else {
            in.utility = io::utility_from_json(
                io::extract_section(io::load_json_file(cfg.utility_spec), "utility"));
        }
    } else if (replay.is_object() && replay.contains("utility")) {
        in.utility = io::utility_from_json(replay["utility"]);
    } else {
        in.utility = UtilityFunction::log();
    }
    in.x = cfg.x;
    if (cfg.x == 1.0 && replay.is_object() && replay.contains("x") && replay["x"].is_number())
        in.x = replay["x"].get<double>();

    // solver settings: defaults, then the document's "solver" section, then flags
    in.solver = cfg.solver;
    if (replay.is_object() && replay.contains("solver") && replay["solver"].is_object()) {
        const json& s = replay["solver"];
        if (s.contains("tolerance") && s["tolerance"].is_number())
            in.solver.tolerance = s["tolerance"].get<double>();
        if (s.contains("max_iterations") && s["max_iterations"].is_number())
            in.solver.max_iterations = s["max_iterations"].get<int>();
        if (s.contains("step_a") && s["step_a"].is_number()) in.solver.step_a = s["step_a"].get<double>();
        if (s.contains("step_b") && s["step_b"].is_number()) in.solver.step_b = s["step_b"].get<double>();
        if (s.contains("seed") && s["seed"].is_number()) in.solver.seed = s["seed"].get<std::uint64_t>();
    }
    if (cfg.solver_tolerance.has_value()) in.solver.tolerance = *cfg.solver_tolerance;
    if (cfg.solver_max_iterations.has_value()) in.solver.max_iterations = *cfg.solver_max_iterations;
    return in;
}

json inputs_json(const RunConfig& cfg, const Loaded& in) {
    return json{{"market", io::market_to_json(in.market_spec)},
                {"priors", io::priors_to_json(in.priors)},
                {"utility", io::utility_to_json(in.utility)},
                {"x", in.x},
                {"seed", cfg.seed},
                {"tol", cfg.tol},
                {"solver", json{{"tolerance", in.solver.tolerance},
                                {"max_iterations", in.solver.max_iterations},
                                {"step_a", in.solver.step_a},
                                {"step_b", in.solver.step_b},
                                {"seed", in.solver.seed}}}};
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& human, const json& doc) {
    if (cfg.format == "machine") {
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path);
            if (!f) raise(ErrorKind::ParseError, cfg.out_path + ": cannot write");
            f << doc.dump(2) << "\n";
        } else {
            out << doc.dump(2) << "\n";
        }
    } else {
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path);
            if (!f) raise(ErrorKind::ParseError, cfg.out_path + ": cannot write");
            f << human;
        } else {
            out << human;
        }
    }
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const Loaded in = load_inputs(cfg, true, true);
    const OptimalPlan plan = solve_robust(in.market, in.priors, in.utility, in.x, in.solver);
    std::string human;
    human += "robust value u(x): " + fmt6(plan.value) + "\n";
    human += "terminal wealth:   " + fmt_vec(plan.terminal_wealth) + "\n";
    human += "worst-case prior:  " + fmt_vec(plan.worst_case_prior.weights) + "\n";
    human += "vertex mixture:    " + fmt_vec(plan.worst_case_mixture) + "\n";
    for (std::size_t node = 0; node < plan.portfolio.holdings.size(); ++node)
        if (!plan.portfolio.holdings[node].empty())
            human += "holdings @ node " + std::to_string(node) + ": " +
                     fmt_vec(plan.portfolio.holdings[node]) + "\n";
    const json doc{{"command", "solve"},
                   {"inputs", inputs_json(cfg, in)},
                   {"results", io::plan_to_json(plan)}};
    emit(cfg, out, human, doc);
    return kExitOk;
}

int cmd_dual(const RunConfig& cfg, std::ostream& out) {
    const Loaded in = load_inputs(cfg, true, true);
    if (in.priors.vertices.size() != 1)
        raise(ErrorKind::DomainError, "dual expects a single-vertex prior file");
    const MeasureVector& prior = in.priors.vertices.front();
    const DualityReport rep = reconcile_duality(in.market, prior, in.utility, in.x, in.solver);
    const double y = cfg.y.value_or(rep.y_star);
    const DualSolution dual = solve_dual(in.market, prior, in.utility, y, in.solver);

    std::string human;
    human += "y:                  " + fmt6(y) + "\n";
    human += "v(y):               " + fmt6(dual.value) + "\n";
    human += "Q*:                 " + fmt_vec(dual.q_star.weights) + "\n";
    human += "y* = argmin v+xy:   " + fmt6(rep.y_star) + "\n";
    human += "duality gap (rel):  " + fmt6(rep.duality_gap) + "\n";
    human += "|X - I(y dQ/dP)|/x: " + fmt6(rep.wealth_identity_error) + "\n";
    human += "E[X Y] vs x y*:     " + fmt6(rep.product_expectation) + " vs " +
             fmt6(in.x * rep.y_star) + "\n";
    json results = io::duality_to_json(rep);
    results["y"] = y;
    results["v_of_y"] = dual.value;
    results["q_star"] = dual.q_star.weights;
    results["frank_wolfe_gap"] = dual.gap;
    const json doc{{"command", "dual"}, {"inputs", inputs_json(cfg, in)}, {"results", results}};
    emit(cfg, out, human, doc);
    return kExitOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const Loaded in = load_inputs(cfg, true, true);
    const VerificationReport rep =
        theorem_check(in.market, in.priors, in.utility, in.x, in.solver, cfg.market_path, cfg.tol);
    std::string human;
    human += std::string("detector riskless:    ") + (rep.detector_riskless ? "yes" : "no") + "\n";
    human += std::string("EMM in priors:        ") + (rep.emm_in_priors ? "yes" : "no") + "\n";
    human += std::string("supermartingale in priors: ") + (rep.smm_in_priors ? "yes" : "no") + "\n";
    human += std::string("agreement:            ") + (rep.agreement ? "yes" : "no") + "\n";
    human += "robust value: " + fmt6(rep.value) + "   U(x): " + fmt6(rep.u_of_x) + "\n";
    const json doc{{"command", "check"},
                   {"inputs", inputs_json(cfg, in)},
                   {"results", io::verification_to_json(rep)}};
    emit(cfg, out, human, doc);
    return rep.agreement ? kExitOk : kExitDisagreement;
}

int cmd_no_betting(const RunConfig& cfg, std::ostream& out) {
    const Loaded in = load_inputs(cfg, true, true);
    if (in.market.tree.steps != 1)
        raise(ErrorKind::DomainError, "no-betting expects a one-period market");
    std::vector<std::vector<double>> payoffs;
    for (int leaf : in.market.tree.terminal_states) payoffs.push_back(in.market.prices[leaf]);
    const NoBettingSet nb = no_betting_set(in.priors, payoffs);
    std::string human;
    for (std::size_t i = 0; i < nb.points.size(); ++i)
        human += "E[A] under vertex " + std::to_string(i) + ": " + fmt_vec(nb.points[i]) + "\n";
    if (nb.interval.has_value())
        human += "no-betting interval: [" + fmt6(nb.interval->first) + ", " +
                 fmt6(nb.interval->second) + "]\n";
    const json doc{{"command", "no-betting"},
                   {"inputs", inputs_json(cfg, in)},
                   {"results", io::no_betting_to_json(nb)}};
    emit(cfg, out, human, doc);
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    VerificationCaps caps;
    SolverConfig solver = cfg.solver;
    if (cfg.solver_tolerance.has_value()) solver.tolerance = *cfg.solver_tolerance;
    if (cfg.solver_max_iterations.has_value()) solver.max_iterations = *cfg.solver_max_iterations;
    const VerificationSummary summary =
        randomized_verification(cfg.seed, cfg.trials, caps, solver);
    std::string human;
    human += "trials:     " + std::to_string(summary.trials) + "\n";
    human += "agreements: " + std::to_string(summary.agreements) + "\n";
    human += "rate:       " + fmt6(summary.agreement_rate) + "\n";

    // one replayable dump per disagreeing instance
    std::filesystem::path dir =
        cfg.out_path.empty() ? std::filesystem::path(".")
                             : std::filesystem::path(cfg.out_path).parent_path();
    if (dir.empty()) dir = ".";
    for (std::size_t i = 0; i < summary.disagreeing_instances.size(); ++i) {
        const auto path = dir / ("disagreement-" +
                                 std::to_string(summary.disagreeing_instances[i].trial) + ".json");
        std::ofstream f(path);
        f << io::instance_to_json(summary.disagreeing_instances[i]).dump(2) << "\n";
        human += "dumped " + path.string() + "\n";
    }
    const json doc{{"command", "verify"},
                   {"inputs", json{{"seed", cfg.seed}, {"trials", cfg.trials}}},
                   {"results", io::summary_to_json(summary)}};
    emit(cfg, out, human, doc);
    return summary.disagreeing_instances.empty() ? kExitOk : kExitDisagreement;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
    const Loaded in = load_inputs(cfg, true, true);
    const BruteForceResult oracle = brute_force_optimal(in.market, in.priors, in.utility, in.x);
    const OptimalPlan plan = solve_robust(in.market, in.priors, in.utility, in.x, in.solver);
    std::string human;
    human += "solver value: " + fmt6(plan.value) + "\n";
    human += "oracle value: " + fmt6(oracle.value) + "\n";
    human += "delta:        " + fmt6(plan.value - oracle.value) + "\n";
    const json doc{{"command", "oracle"},
                   {"inputs", inputs_json(cfg, in)},
                   {"results", json{{"solver_value", plan.value},
                                    {"oracle_value", oracle.value},
                                    {"oracle_holdings", oracle.holdings},
                                    {"delta", plan.value - oracle.value}}}};
    emit(cfg, out, human, doc);
    return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.command == "solve") return cmd_solve(config, out);
        if (config.command == "dual") return cmd_dual(config, out);
        if (config.command == "check") return cmd_check(config, out);
        if (config.command == "no-betting") return cmd_no_betting(config, out);
        if (config.command == "verify") return cmd_verify(config, out);
        if (config.command == "oracle") return cmd_oracle(config, out);
        err << "unknown command '" << config.command << "'\n";
        return kExitDomain;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return is_solver_failure(e.kind()) ? kExitSolver : kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

}  // namespace robustfolio::cli
