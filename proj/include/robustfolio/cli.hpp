#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "robustfolio/numerics.hpp"

namespace robustfolio::cli {

// Exit codes: 0 success, 1 domain/input errors, 2 solver failures,
// 3 verification disagreement.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitDisagreement = 3;

struct RunConfig {
    std::string command;       // solve | dual | check | no-betting | verify | oracle
    std::string market_path;
    std::string priors_path;
    std::string utility_spec;  // inline JSON or a file path; empty = {"family":"log"}
    double x = 1.0;
    std::optional<double> y;
    double tol = 1e-6;         // riskless detector tolerance
    std::uint64_t seed = 0;
    int trials = 500;
    std::string format = "human";  // human | machine
    std::string out_path;          // empty = stdout
    // explicit flag overrides; unset fields fall back to the input document's
    // "solver" section, then to the defaults
    std::optional<double> solver_tolerance;
    std::optional<int> solver_max_iterations;
    SolverConfig solver;
};

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace robustfolio::cli
