#pragma once

#include <optional>
#include <vector>

#include "robustfolio/market.hpp"
#include "robustfolio/numerics.hpp"

namespace robustfolio {

// Weights below this are treated as zero when reading off a support.
inline constexpr double kSupportEps = 1e-12;
// A measure counts as equivalent when the LP certifies weights above this.
inline constexpr double kEquivalenceSlack = 1e-9;
// Absolute tolerance on conditional expectations in the martingale test.
inline constexpr double kMartingaleTol = 1e-9;

// Probability vector over the terminal states of a market, in leaf order.
struct MeasureVector {
    std::vector<double> weights;

    std::vector<int> support() const;
    int num_states() const { return static_cast<int>(weights.size()); }
};

// Throws DomainError unless weights are nonnegative and sum to 1 within 1e-12.
void validate_measure(const MeasureVector& q);

// Convex polytope of priors given by its vertices.
struct PriorSet {
    std::vector<MeasureVector> vertices;
};

void validate_priors(const PriorSet& priors);

// Common support of all vertices; SupportMismatch if they disagree.
std::vector<int> common_support(const PriorSet& priors);

// One linear equality on terminal weights per (non-terminal node, asset):
// sum over leaves below the node of q_leaf * (S(child on path) - S(node)) = 0,
// the unconditional form of E_q[S_{t+1} | node] = S_t(node).
struct MartingaleConstraints {
    std::vector<std::vector<double>> rows;       // coefficient per leaf position
    std::vector<std::pair<int, int>> row_meta;   // (node id, asset)
};

MartingaleConstraints martingale_constraints(const FiniteMarket& market);

// Conditional martingale test at every node carrying positive q-mass.
bool is_martingale_measure(const MeasureVector& q, const FiniteMarket& market);

// Interior point of the martingale polytope restricted to `support`
// (positions into terminal_states): maximizes the minimum weight delta on the
// support; returns the measure when delta exceeds kEquivalenceSlack.
std::optional<MeasureVector> find_emm(const FiniteMarket& market,
                                      const std::vector<int>& support,
                                      const SolverConfig& cfg = {});

struct PriorCertificate {
    MeasureVector measure;          // Sum of mixture[i] * vertex i
    std::vector<double> mixture;    // simplex weights over the vertices
};

// Searches the prior hull for an equivalent martingale measure.
std::optional<PriorCertificate> priors_contain_emm(const PriorSet& priors,
                                                   const FiniteMarket& market,
                                                   const SolverConfig& cfg = {});

// Supermartingale-measure test for the admissible class with initial wealth
// x > 0, via per-node inequalities E_q[H.dS] <= 0 over the generating cone of
// one-step positions (+/- each asset).
bool is_supermartingale_measure(const MeasureVector& q, const FiniteMarket& market, double x);

// Hull search with the supermartingale cone inequalities instead of the
// martingale equalities.
std::optional<PriorCertificate> priors_contain_supermartingale(const PriorSet& priors,
                                                               const FiniteMarket& market,
                                                               double x,
                                                               const SolverConfig& cfg = {});

}  // namespace robustfolio
