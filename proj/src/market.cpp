#include "robustfolio/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustfolio {

namespace {

std::string node_label(int id) { return "node " + std::to_string(id); }

}  // namespace

double WealthProcess::min_value() const {
    double lo = std::numeric_limits<double>::infinity();
    for (double v : values) lo = std::min(lo, v);
    return lo;
}

FiniteMarket build_market(const MarketSpec& spec) {
    const int n = static_cast<int>(spec.nodes.size());
    if (n == 0) raise(ErrorKind::CyclicNodeGraph, "empty node list");
    if (spec.assets < 0) raise(ErrorKind::DomainError, "negative asset count");

    EventTree tree;
    tree.nodes.resize(n);
    std::vector<bool> seen(n, false);
    for (const auto& ns : spec.nodes) {
        if (ns.id < 0 || ns.id >= n)
            raise(ErrorKind::CyclicNodeGraph,
                  node_label(ns.id) + " outside the contiguous id range 0.." + std::to_string(n - 1));
        if (seen[ns.id]) raise(ErrorKind::CyclicNodeGraph, "duplicate id at " + node_label(ns.id));
        seen[ns.id] = true;
        tree.nodes[ns.id].id = ns.id;
        tree.nodes[ns.id].parent = ns.parent;
    }

    int root = -1;
    for (int i = 0; i < n; ++i) {
        int p = tree.nodes[i].parent;
        if (p == -1) {
            if (root != -1)
                raise(ErrorKind::CyclicNodeGraph, "second root at " + node_label(i));
            root = i;
        } else if (p < 0 || p >= n || p == i) {
            raise(ErrorKind::CyclicNodeGraph, node_label(i) + " has invalid parent " + std::to_string(p));
        }
    }
    if (root == -1) raise(ErrorKind::CyclicNodeGraph, "no root node");
    tree.root = root;

    // Depth via parent chains; a chain longer than n nodes means a cycle.
    for (int i = 0; i < n; ++i) {
        int depth = 0;
        int cur = i;
        while (tree.nodes[cur].parent != -1) {
            cur = tree.nodes[cur].parent;
            if (++depth > n) raise(ErrorKind::CyclicNodeGraph, "cycle through " + node_label(i));
        }
        if (cur != root) raise(ErrorKind::CyclicNodeGraph, node_label(i) + " not connected to the root");
        tree.nodes[i].depth = depth;
    }

    for (int i = 0; i < n; ++i) {
        int p = tree.nodes[i].parent;
        if (p != -1) tree.nodes[p].children.push_back(i);
    }
    for (int i = 0; i < n; ++i) std::sort(tree.nodes[i].children.begin(), tree.nodes[i].children.end());

    for (int i = 0; i < n; ++i) {
        if (tree.nodes[i].children.empty()) {
            tree.terminal_states.push_back(i);
            if (tree.nodes[i].depth != spec.steps)
                raise(ErrorKind::UnevenLeafDepth,
                      node_label(i) + " is a leaf at depth " + std::to_string(tree.nodes[i].depth) +
                          ", expected " + std::to_string(spec.steps));
        }
    }
    tree.steps = spec.steps;

    FiniteMarket market;
    market.num_assets = spec.assets;
    market.prices.assign(n, {});
    std::vector<bool> priced(n, false);
    for (const auto& ns : spec.nodes) {
        if (static_cast<int>(ns.prices.size()) != spec.assets)
            raise(ErrorKind::MissingPrice,
                  node_label(ns.id) + " carries " + std::to_string(ns.prices.size()) +
                      " prices, expected " + std::to_string(spec.assets));
        for (double p : ns.prices) {
            if (!std::isfinite(p)) raise(ErrorKind::MissingPrice, "non-finite price at " + node_label(ns.id));
            if (p < 0.0) raise(ErrorKind::DomainError, "negative price at " + node_label(ns.id));
        }
        market.prices[ns.id] = ns.prices;
        priced[ns.id] = true;
    }
    for (int i = 0; i < n; ++i)
        if (!priced[i]) raise(ErrorKind::MissingPrice, "no price vector at " + node_label(i));

    market.tree = std::move(tree);
    return market;
}

Portfolio zero_portfolio(const FiniteMarket& market, double initial_wealth) {
    Portfolio p;
    p.initial_wealth = initial_wealth;
    p.holdings.assign(market.tree.num_nodes(), {});
    for (int i = 0; i < market.tree.num_nodes(); ++i)
        if (!market.tree.is_leaf(i)) p.holdings[i].assign(market.num_assets, 0.0);
    return p;
}

WealthProcess wealth_process(const FiniteMarket& market, const Portfolio& portfolio) {
    const auto& tree = market.tree;
    const int n = tree.num_nodes();
    if (static_cast<int>(portfolio.holdings.size()) != n)
        raise(ErrorKind::DimensionMismatch,
              "holdings cover " + std::to_string(portfolio.holdings.size()) + " nodes, market has " +
                  std::to_string(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t want = tree.is_leaf(i) ? 0u : static_cast<std::size_t>(market.num_assets);
        if (portfolio.holdings[i].size() != want)
            raise(ErrorKind::DimensionMismatch,
                  "holdings at node " + std::to_string(i) + " have " +
                      std::to_string(portfolio.holdings[i].size()) + " entries, expected " +
                      std::to_string(want));
    }
    if (!(portfolio.initial_wealth > 0.0))
        raise(ErrorKind::DomainError, "initial wealth must be positive");

    WealthProcess wp;
    wp.values.assign(n, 0.0);
    wp.values[tree.root] = portfolio.initial_wealth;
    // Parents always precede children in depth order.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return tree.nodes[a].depth < tree.nodes[b].depth; });
    for (int node : order) {
        if (node == tree.root) continue;
        const int parent = tree.nodes[node].parent;
        double gain = 0.0;
        for (int a = 0; a < market.num_assets; ++a)
            gain += portfolio.holdings[parent][a] * market.price_change(node, a);
        wp.values[node] = wp.values[parent] + gain;
    }
    return wp;
}

bool is_admissible(const FiniteMarket& market, const Portfolio& portfolio) {
    return wealth_process(market, portfolio).min_value() >= -kAdmissibilityTol;
}

std::vector<double> terminal_wealth(const FiniteMarket& market, const WealthProcess& process) {
    std::vector<double> out;
    out.reserve(market.tree.terminal_states.size());
    for (int leaf : market.tree.terminal_states) out.push_back(process.values[leaf]);
    return out;
}

bool is_degenerate_market(const FiniteMarket& market) {
    for (int i = 0; i < market.tree.num_nodes(); ++i) {
        if (i == market.tree.root) continue;
        for (int a = 0; a < market.num_assets; ++a)
            if (market.price_change(i, a) != 0.0) return false;
    }
    return true;
}

}  // namespace robustfolio
