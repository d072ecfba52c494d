#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustfolio/market.hpp"
#include "robustfolio/measures.hpp"
#include "robustfolio/solver.hpp"
#include "robustfolio/utility.hpp"

namespace robustfolio {

// Side-by-side outcome of solver-based riskless detection and the LP
// measure-membership tests.
struct VerificationReport {
    std::string market_id;
    bool detector_riskless = false;
    bool smm_in_priors = false;
    bool emm_in_priors = false;
    bool agreement = false;  // all three answers coincide
    double value = 0.0;      // robust optimal value
    double u_of_x = 0.0;     // U(x)
    double wealth_spread = 0.0;  // max - min terminal wealth of the plan
    std::vector<double> terminal_wealth;
    std::optional<PriorCertificate> emm_certificate;
    std::optional<PriorCertificate> smm_certificate;
    std::vector<double> worst_case_mixture;
};

// True iff the robust plan is flat (spread <= tol * x) AND its value reaches
// U(x) - tol. The value test is the discriminator when holdings are not
// identified; flatness confirms it.
bool detect_riskless_optimal(const FiniteMarket& market, const PriorSet& priors,
                             const UtilityFunction& u, double x, double tol = 1e-6,
                             const SolverConfig& cfg = {});

// Same predicate evaluated on an existing plan.
bool detect_riskless_optimal(const OptimalPlan& plan, const UtilityFunction& u, double x,
                             double tol = 1e-6);

// Runs detector + both membership LPs; records disagreement, never throws on it.
VerificationReport theorem_check(const FiniteMarket& market, const PriorSet& priors,
                                 const UtilityFunction& u, double x, const SolverConfig& cfg = {},
                                 const std::string& market_id = "", double detector_tol = 1e-6);

struct NoBettingSet {
    std::vector<std::vector<double>> points;  // E_v[A] per prior vertex
    // single-asset case: [min, max] of the vertex expectations
    std::optional<std::pair<double, double>> interval;
};

// The convex set of prices at which the robust investor holds no risky
// position: expectations of the payoff under each prior vertex. One period.
NoBettingSet no_betting_set(const PriorSet& priors,
                            const std::vector<std::vector<double>>& payoffs);

// Two-outcome capacity core: returns (pi H + (1-pi) L, (1-pi') H + pi' L).
// EmptyCore when pi + pi' > 1.
std::pair<double, double> dow_werlang_interval(double pi, double pi_prime, double high,
                                               double low);

struct VerificationCaps {
    int max_leaves = 6;
    int max_assets = 3;
    int max_vertices = 5;
    int max_depth = 2;
    bool singleton_priors = false;  // restrict to one vertex per instance
};

// A generated instance, replayable through the file interfaces.
struct TrialInstance {
    MarketSpec market;
    PriorSet priors;
    UtilityFunction utility;
    double x = 1.0;
    std::uint64_t trial = 0;
};

struct VerificationSummary {
    int trials = 0;
    int agreements = 0;
    double agreement_rate = 1.0;
    std::vector<TrialInstance> disagreeing_instances;
    std::vector<VerificationReport> disagreeing_reports;
};

// Generates random arbitrage-free markets and prior polytopes (planting an
// EMM inside the hull with probability one half), runs theorem_check on each,
// and aggregates. Deterministic per (seed, trial index).
VerificationSummary randomized_verification(std::uint64_t seed, int trials,
                                            const VerificationCaps& caps = {},
                                            const SolverConfig& cfg = {});

// Deterministic instance generator used by the harness (exposed for replay
// and for seeding acceptance checks).
TrialInstance generate_instance(std::uint64_t seed, std::uint64_t trial,
                                const VerificationCaps& caps);

}  // namespace robustfolio
