#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "robustfolio/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"robustfolio: multi-prior (minimax) expected-utility portfolio solver"};
    app.require_subcommand(1);

    robustfolio::cli::RunConfig cfg;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub, bool needs_market) {
        if (needs_market) {
            sub->add_option("--market", cfg.market_path, "market file (JSON)");
            sub->add_option("--priors", cfg.priors_path, "prior vertices file (JSON)");
            sub->add_option("--utility", cfg.utility_spec,
                            "utility spec, inline JSON or a file path");
            sub->add_option("--x", cfg.x, "initial wealth");
        }
        sub->add_option("--tol", cfg.tol, "riskless detector tolerance");
        sub->add_option("--seed", cfg.seed, "random seed")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--format", cfg.format, "human | machine")
            ->check(CLI::IsMember({"human", "machine"}));
        sub->add_option("--out", cfg.out_path, "write the report to this file");
        sub->add_option("--solver-tol", [&cfg](const std::vector<std::string>& vals) {
            cfg.solver_tolerance = std::stod(vals.front());
            return true;
        }, "numerical kernel tolerance");
        sub->add_option("--max-iterations", [&cfg](const std::vector<std::string>& vals) {
            cfg.solver_max_iterations = std::stoi(vals.front());
            return true;
        }, "kernel iteration cap");
    };

    auto* solve = app.add_subcommand("solve", "robust optimal portfolio");
    add_common(solve, true);
    auto* dual = app.add_subcommand("dual", "dual problem and duality reconciliation");
    add_common(dual, true);
    dual->add_option("--y", [&cfg](const std::vector<std::string>& vals) {
        cfg.y = std::stod(vals.front());
        return true;
    }, "dual argument y (defaults to y*)");
    auto* check = app.add_subcommand("check", "riskless detector vs measure membership");
    add_common(check, true);
    auto* nb = app.add_subcommand("no-betting", "no-betting set of a one-period market");
    add_common(nb, true);
    auto* verify = app.add_subcommand("verify", "randomized theorem verification");
    add_common(verify, false);
    verify->add_option("--trials", cfg.trials, "number of random instances");
    auto* oracle = app.add_subcommand("oracle", "brute-force value vs solver value");
    add_common(oracle, true);

    CLI11_PARSE(app, argc, argv);

    if (!seed_given) {
        if (const char* env = std::getenv("ROBUSTFOLIO_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
    }
    cfg.solver.seed = cfg.seed;

    for (auto* sub : {solve, dual, check, nb, verify, oracle}) {
        if (sub->parsed()) {
            cfg.command = sub->get_name();
            break;
        }
    }
    return robustfolio::cli::run(cfg, std::cout, std::cerr);
}
