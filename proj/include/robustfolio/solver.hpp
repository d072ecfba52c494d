#pragma once

#include <optional>
#include <vector>

#include "robustfolio/market.hpp"
#include "robustfolio/measures.hpp"
#include "robustfolio/numerics.hpp"
#include "robustfolio/utility.hpp"

namespace robustfolio {

struct OptimalPlan {
    Portfolio portfolio;
    std::vector<double> terminal_wealth;      // in terminal_states order
    double value = 0.0;                       // min over prior vertices of E[U(X_T)]
    MeasureVector worst_case_prior;           // minimizing vertex mixture
    std::vector<double> worst_case_mixture;   // simplex weights over the vertices
    std::optional<MeasureVector> dual_measure;
    std::optional<double> dual_value;
    std::optional<double> y;
};

// sup E_P[U(X_T)] over admissible portfolios with initial wealth x.
// Requires P with full support, validated utility assumptions, and an
// arbitrage-free market (ArbitrageDetected otherwise).
OptimalPlan solve_single_prior(const FiniteMarket& market, const MeasureVector& prior,
                               const UtilityFunction& u, double x, const SolverConfig& cfg = {});

struct DualSolution {
    MeasureVector q_star;
    double value = 0.0;  // v(y) = E_P[ V(y dQ*/dP) ]
    double gap = 0.0;    // Frank-Wolfe certificate
};

// inf over equivalent martingale measures Q of E_P[V(y dQ/dP)], attained on
// finite spaces, computed by Frank-Wolfe over the martingale polytope.
DualSolution solve_dual(const FiniteMarket& market, const MeasureVector& prior,
                        const UtilityFunction& u, double y, const SolverConfig& cfg = {});

struct DualityReport {
    double primal_value = 0.0;              // u(x)
    double y_star = 0.0;                    // argmin_y v(y) + x y
    double dual_bound = 0.0;                // v(y*) + x y*
    double duality_gap = 0.0;               // |u - dual_bound| / (1 + |u|)
    std::vector<double> terminal_wealth;    // X_T from the primal
    std::vector<double> dual_terminal_wealth;  // I(y* dQ*/dP)
    double wealth_identity_error = 0.0;     // max |X - I| / x
    double product_expectation = 0.0;       // E_P[X_T Y_T]
    double product_identity_error = 0.0;    // |E - x y*| / (x y*)
    double martingale_identity_error = 0.0; // max over nodes, relative to x y*
    MeasureVector dual_measure;
    bool pass = false;
};

// Checks u(x) = min_y [v(y) + x y], X_T = I(Y_T), and the martingale property
// of X Y node by node. Throws DualityGapExceeded when the value gap fails.
DualityReport reconcile_duality(const FiniteMarket& market, const MeasureVector& prior,
                                const UtilityFunction& u, double x, const SolverConfig& cfg = {});

// sup_H min over prior vertices of E[U(X_T)]: supergradient ascent on the
// minimax objective followed by an active-set saddle refinement.
OptimalPlan solve_robust(const FiniteMarket& market, const PriorSet& priors,
                         const UtilityFunction& u, double x, const SolverConfig& cfg = {});

// inf over prior mixtures of the single-prior optimal value, minus plan.value.
// Near zero certifies the saddle point numerically.
double saddle_gap(const FiniteMarket& market, const PriorSet& priors, const UtilityFunction& u,
                  double x, const OptimalPlan& plan, const SolverConfig& cfg = {});

}  // namespace robustfolio
