#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "robustfolio/market.hpp"

using namespace robustfolio;
using namespace robustfolio::testing;

namespace {

// Independent wealth evaluation: walk the root->leaf path and accumulate the
// per-step gains directly.
double path_sum_wealth(const FiniteMarket& m, const Portfolio& p, int leaf) {
    std::vector<int> path;
    for (int n = leaf; n != -1; n = m.tree.nodes[n].parent) path.push_back(n);
    double w = p.initial_wealth;
    for (std::size_t i = path.size() - 1; i > 0; --i) {
        const int parent = path[i], child = path[i - 1];
        for (int a = 0; a < m.num_assets; ++a)
            w += p.holdings[parent][a] * (m.price(child, a) - m.price(parent, a));
    }
    return w;
}

MarketSpec two_period_spec() {
    // Root 0 -> {1, 2}; 1 -> {3, 4}; 2 -> {5, 6}. Single asset.
    MarketSpec spec;
    spec.steps = 2;
    spec.assets = 1;
    spec.nodes = {
        {0, -1, {1.0}}, {1, 0, {1.5}}, {2, 0, {0.5}},
        {3, 1, {2.0}},  {4, 1, {1.0}}, {5, 2, {1.0}},  {6, 2, {0.25}},
    };
    return spec;
}

}  // namespace

TEST_CASE("build_market accepts well-formed trees") {
    const FiniteMarket binary = binary_market();
    CHECK(binary.tree.steps == 1);
    CHECK(binary.tree.num_leaves() == 2);
    CHECK(binary.tree.terminal_states == std::vector<int>{1, 2});
    CHECK(binary.price(0, 0) == 1.0);

    const FiniteMarket deep = build_market(two_period_spec());
    CHECK(deep.tree.num_leaves() == 4);
    CHECK(deep.tree.nodes[3].depth == 2);
    CHECK(deep.tree.nodes[0].children == std::vector<int>{1, 2});
}

TEST_CASE("build_market rejects malformed input") {
    SUBCASE("uneven leaf depth") {
        MarketSpec spec;
        spec.steps = 1;
        spec.assets = 1;
        spec.nodes = {{0, -1, {1.0}}, {1, 0, {2.0}}, {2, 1, {0.0}}};
        // node 1 gains a child, so node 1 is no longer a leaf but node 2 sits
        // at depth 2 while steps say 1
        CHECK_THROWS_AS(build_market(spec), Error);
        try {
            build_market(spec);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnevenLeafDepth);
            CHECK(std::string(e.what()).find("node 2") != std::string::npos);
        }
    }
    SUBCASE("cycle") {
        MarketSpec spec;
        spec.steps = 1;
        spec.assets = 1;
        spec.nodes = {{0, -1, {1.0}}, {1, 2, {2.0}}, {2, 1, {0.0}}};
        try {
            build_market(spec);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::CyclicNodeGraph);
        }
    }
    SUBCASE("two roots") {
        MarketSpec spec;
        spec.steps = 0;
        spec.assets = 1;
        spec.nodes = {{0, -1, {1.0}}, {1, -1, {2.0}}};
        CHECK_THROWS_AS(build_market(spec), Error);
    }
    SUBCASE("missing price entry") {
        MarketSpec spec;
        spec.steps = 1;
        spec.assets = 2;
        spec.nodes = {{0, -1, {1.0, 1.0}}, {1, 0, {2.0}}, {2, 0, {0.5, 0.5}}};
        try {
            build_market(spec);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MissingPrice);
            CHECK(std::string(e.what()).find("node 1") != std::string::npos);
        }
    }
    SUBCASE("duplicate ids") {
        MarketSpec spec;
        spec.steps = 1;
        spec.assets = 1;
        spec.nodes = {{0, -1, {1.0}}, {1, 0, {2.0}}, {1, 0, {0.0}}};
        CHECK_THROWS_AS(build_market(spec), Error);
    }
}

TEST_CASE("wealth_process follows the self-financing identity") {
    const FiniteMarket m = binary_market();

    SUBCASE("zero holdings give constant wealth") {
        const auto wp = wealth_process(m, zero_portfolio(m, 1.0));
        for (double v : wp.values) CHECK(v == 1.0);
    }
    SUBCASE("half a unit in the binary market") {
        const auto wp = wealth_process(m, flat_portfolio(m, 1.0, {0.5}));
        CHECK(wp.values[0] == doctest::Approx(1.0));
        CHECK(wp.values[1] == doctest::Approx(1.5));  // 1 + 0.5 * (+1)
        CHECK(wp.values[2] == doctest::Approx(0.5));  // 1 + 0.5 * (-1)
    }
    SUBCASE("two-period wealth equals the telescoped path sum") {
        const FiniteMarket deep = build_market(two_period_spec());
        Portfolio p = zero_portfolio(deep, 2.0);
        p.holdings[0] = {0.7};
        p.holdings[1] = {-0.3};
        p.holdings[2] = {1.1};
        const auto wp = wealth_process(deep, p);
        for (int leaf : deep.tree.terminal_states)
            CHECK(wp.values[leaf] == doctest::Approx(path_sum_wealth(deep, p, leaf)).epsilon(1e-15));
    }
    SUBCASE("dimension mismatch") {
        Portfolio p = zero_portfolio(m, 1.0);
        p.holdings[0] = {0.5, 0.5};
        CHECK_THROWS_AS(wealth_process(m, p), Error);
    }
}

TEST_CASE("is_admissible checks every node inclusively") {
    const FiniteMarket m = binary_market();
    CHECK(is_admissible(m, zero_portfolio(m, 1.0)));
    CHECK(is_admissible(m, zero_portfolio(m, 0.01)));
    // H = 2 drops wealth to -1 on the down leaf.
    CHECK_FALSE(is_admissible(m, flat_portfolio(m, 1.0, {2.0})));
    // H = 1 touches zero exactly; the boundary belongs to the admissible set.
    CHECK(is_admissible(m, flat_portfolio(m, 1.0, {1.0})));
}

TEST_CASE("self-financing holds edge by edge for random portfolios") {
    TestRng rng(7);
    const FiniteMarket deep = build_market(two_period_spec());
    for (int trial = 0; trial < 200; ++trial) {
        Portfolio p = zero_portfolio(deep, rng.uniform(0.1, 3.0));
        for (int n = 0; n < deep.tree.num_nodes(); ++n)
            if (!deep.tree.is_leaf(n)) p.holdings[n] = {rng.uniform(-2.0, 2.0)};
        const auto wp = wealth_process(deep, p);
        for (int n = 0; n < deep.tree.num_nodes(); ++n) {
            const int parent = deep.tree.nodes[n].parent;
            if (parent == -1) continue;
            const double gain = p.holdings[parent][0] * deep.price_change(n, 0);
            CHECK(wp.values[n] - wp.values[parent] == doctest::Approx(gain).epsilon(1e-14));
        }
    }
}

TEST_CASE("gain map is positively homogeneous") {
    TestRng rng(11);
    const FiniteMarket deep = build_market(two_period_spec());
    for (int trial = 0; trial < 100; ++trial) {
        const double lambda = rng.uniform(0.1, 5.0);
        Portfolio p = zero_portfolio(deep, rng.uniform(0.5, 2.0));
        Portfolio scaled = zero_portfolio(deep, lambda * p.initial_wealth);
        for (int n = 0; n < deep.tree.num_nodes(); ++n) {
            if (deep.tree.is_leaf(n)) continue;
            const double h = rng.uniform(-1.0, 1.0);
            p.holdings[n] = {h};
            scaled.holdings[n] = {lambda * h};
        }
        const auto base = wealth_process(deep, p);
        const auto big = wealth_process(deep, scaled);
        for (int n = 0; n < deep.tree.num_nodes(); ++n)
            CHECK(big.values[n] == doctest::Approx(lambda * base.values[n]).epsilon(1e-13));
    }
}

TEST_CASE("degenerate market detection") {
    CHECK(is_degenerate_market(one_period({1.0}, {{1.0}, {1.0}})));
    CHECK_FALSE(is_degenerate_market(binary_market()));
}
