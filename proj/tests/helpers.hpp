#pragma once

#include <random>
#include <vector>

#include "robustfolio/market.hpp"
#include "robustfolio/measures.hpp"

namespace robustfolio::testing {

// One-period market: root prices, then one price vector per leaf.
inline FiniteMarket one_period(const std::vector<double>& root,
                               const std::vector<std::vector<double>>& leaves) {
    MarketSpec spec;
    spec.steps = 1;
    spec.assets = static_cast<int>(root.size());
    spec.nodes.push_back({0, -1, root});
    for (std::size_t i = 0; i < leaves.size(); ++i)
        spec.nodes.push_back({static_cast<int>(i) + 1, 0, leaves[i]});
    return build_market(spec);
}

// Single asset, S0 = 1, terminal prices {2, 0}: price change +1 / -1.
inline FiniteMarket binary_market() { return one_period({1.0}, {{2.0}, {0.0}}); }

// Portfolio holding `h` at every non-terminal node of a market.
inline Portfolio flat_portfolio(const FiniteMarket& market, double x,
                                const std::vector<double>& h) {
    Portfolio p = zero_portfolio(market, x);
    for (int i = 0; i < market.tree.num_nodes(); ++i)
        if (!market.tree.is_leaf(i)) p.holdings[i] = h;
    return p;
}

inline MeasureVector measure(std::vector<double> w) { return MeasureVector{std::move(w)}; }

inline PriorSet priors(std::vector<std::vector<double>> vertices) {
    PriorSet p;
    for (auto& v : vertices) p.vertices.push_back(measure(std::move(v)));
    return p;
}

struct TestRng {
    std::mt19937_64 eng;

    explicit TestRng(std::uint64_t seed) : eng(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }

    // Interior point of the simplex with a floor on every weight.
    std::vector<double> simplex_point(int n, double floor = 0.05) {
        std::vector<double> w(n);
        double total = 0.0;
        for (double& v : w) {
            v = -std::log(uniform(1e-12, 1.0));
            total += v;
        }
        for (double& v : w) v = floor / n + (1.0 - floor) * v / total;
        double sum = 0.0;
        for (double v : w) sum += v;
        for (double& v : w) v /= sum;
        return w;
    }
};

}  // namespace robustfolio::testing
