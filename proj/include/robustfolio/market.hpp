#pragma once

#include <string>
#include <vector>

#include "robustfolio/errors.hpp"

namespace robustfolio {

// Wealth may dip to exactly zero on admissible paths; this slack absorbs
// floating-point noise around that boundary.
inline constexpr double kAdmissibilityTol = 1e-12;

// Finite filtration realized as an event tree. Node ids are contiguous
// 0..n-1, there is exactly one root, and every leaf sits at the same depth.
struct EventTree {
    struct Node {
        int id = 0;
        int parent = -1;  // -1 at the root
        int depth = 0;
        std::vector<int> children;
    };

    std::vector<Node> nodes;
    std::vector<int> terminal_states;  // leaf ids, ascending
    int steps = 0;                     // common depth of all leaves
    int root = 0;

    bool is_leaf(int node) const { return nodes[node].children.empty(); }
    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_leaves() const { return static_cast<int>(terminal_states.size()); }
};

// Risky asset prices on an event tree, already discounted (riskless rate 0;
// the riskless asset is the implicit constant 1).
struct FiniteMarket {
    EventTree tree;
    int num_assets = 0;
    std::vector<std::vector<double>> prices;  // per node, num_assets entries

    double price(int node, int asset) const { return prices[node][asset]; }
    // S^i(child) - S^i(parent of child)
    double price_change(int child, int asset) const {
        return prices[child][asset] - prices[tree.nodes[child].parent][asset];
    }
};

// Raw description of a market file before validation.
struct MarketNodeSpec {
    int id = 0;
    int parent = -1;
    std::vector<double> prices;
};

struct MarketSpec {
    int steps = 0;
    int assets = 0;
    std::vector<MarketNodeSpec> nodes;
};

// Initial wealth plus predictable holdings: one vector of num_assets reals
// per non-terminal node (entries at leaves must stay empty).
struct Portfolio {
    double initial_wealth = 0.0;
    std::vector<std::vector<double>> holdings;  // indexed by node id
};

struct WealthProcess {
    std::vector<double> values;  // per node

    double min_value() const;
};

FiniteMarket build_market(const MarketSpec& spec);

Portfolio zero_portfolio(const FiniteMarket& market, double initial_wealth);

// Self-financing wealth at every node: root = x, child = parent + H.(dS).
WealthProcess wealth_process(const FiniteMarket& market, const Portfolio& portfolio);

// True iff wealth >= 0 (within kAdmissibilityTol) at every node.
bool is_admissible(const FiniteMarket& market, const Portfolio& portfolio);

// Terminal wealth in terminal_states order.
std::vector<double> terminal_wealth(const FiniteMarket& market, const WealthProcess& process);

// True when prices never move along any edge (no risky exposure possible).
bool is_degenerate_market(const FiniteMarket& market);

}  // namespace robustfolio
