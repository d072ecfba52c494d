#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "robustfolio/market.hpp"
#include "robustfolio/measures.hpp"
#include "robustfolio/utility.hpp"

namespace robustfolio {

// Ground truth by exhaustive search. Shares market and utility evaluation
// with the solvers but none of the optimization machinery.

struct GridSpec {
    std::vector<std::pair<double, double>> bounds;  // per holdings variable
    int points_per_dim = 0;          // 0 = derive from the guard
    int refinement_levels = 2;
    std::size_t max_points = 10'000'000;
};

// Bounds implied by admissibility: |H| <= x / min positive |price change|
// per asset, padded 10%.
GridSpec default_grid(const FiniteMarket& market, double x);

struct BruteForceResult {
    std::vector<double> holdings;  // flattened per (non-terminal node, asset)
    double value = 0.0;            // certified achievable robust value
};

// Exhaustive max over admissible holdings grids of the min-over-vertices
// expected utility, with local refinement passes around the best cell.
BruteForceResult brute_force_optimal(const FiniteMarket& market, const PriorSet& priors,
                                     const UtilityFunction& u, double x, GridSpec grid = {});

struct NoBettingScan {
    std::vector<double> prices;
    std::vector<bool> no_betting;  // robust grid value <= U(x) + 1e-6
    std::optional<std::pair<double, double>> interval;  // first/last marked price
};

// Sweeps one-period single-asset prices over [lo, hi] with the given step and
// marks the prices at which betting adds nothing.
NoBettingScan brute_force_no_betting(const PriorSet& priors,
                                     const std::vector<double>& payoffs, double price_lo,
                                     double price_hi, double step, const UtilityFunction& u,
                                     double x);

// All basic feasible solutions of the one-period martingale system
// intersected with the simplex, deduplicated and validated.
std::vector<MeasureVector> enumerate_emm_vertices(const FiniteMarket& market);

}  // namespace robustfolio
