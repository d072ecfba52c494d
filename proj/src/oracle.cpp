#include "robustfolio/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace robustfolio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattened holdings variables in node-id order, mirroring Portfolio layout.
struct VarLayout {
    std::vector<int> var_base;  // node -> first variable, -1 at leaves
    int n_vars = 0;
};

VarLayout layout_of(const FiniteMarket& market) {
    VarLayout lay;
    lay.var_base.assign(market.tree.num_nodes(), -1);
    for (int n = 0; n < market.tree.num_nodes(); ++n) {
        if (market.tree.is_leaf(n)) continue;
        lay.var_base[n] = lay.n_vars;
        lay.n_vars += market.num_assets;
    }
    return lay;
}

// Plain top-down wealth evaluation into a reusable buffer.
struct WealthEvaluator {
    const FiniteMarket* market;
    VarLayout lay;
    std::vector<int> order;  // nodes, parents first
    std::vector<double> wealth;

    explicit WealthEvaluator(const FiniteMarket& m) : market(&m), lay(layout_of(m)) {
        order.resize(m.tree.num_nodes());
        for (int i = 0; i < m.tree.num_nodes(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return m.tree.nodes[a].depth < m.tree.nodes[b].depth;
        });
        wealth.assign(m.tree.num_nodes(), 0.0);
    }

    // Returns min wealth across nodes.
    double evaluate(const std::vector<double>& h, double x) {
        double lo = kInf;
        for (int node : order) {
            const int parent = market->tree.nodes[node].parent;
            if (parent == -1) {
                wealth[node] = x;
            } else {
                double gain = 0.0;
                const int base = lay.var_base[parent];
                for (int a = 0; a < market->num_assets; ++a)
                    gain += h[base + a] * market->price_change(node, a);
                wealth[node] = wealth[parent] + gain;
            }
            lo = std::min(lo, wealth[node]);
        }
        return lo;
    }
};

}  // namespace

GridSpec default_grid(const FiniteMarket& market, double x) {
    const VarLayout lay = layout_of(market);
    GridSpec grid;
    grid.bounds.assign(lay.n_vars, {0.0, 0.0});
    for (int a = 0; a < market.num_assets; ++a) {
        double min_move = kInf;
        for (int node = 0; node < market.tree.num_nodes(); ++node) {
            if (node == market.tree.root) continue;
            const double move = std::abs(market.price_change(node, a));
            if (move > 1e-12) min_move = std::min(min_move, move);
        }
        const double bound = std::isfinite(min_move) ? 1.1 * x / min_move : 0.0;
        for (int node = 0; node < market.tree.num_nodes(); ++node)
            if (lay.var_base[node] >= 0)
                grid.bounds[lay.var_base[node] + a] = {-bound, bound};
    }
    return grid;
}

BruteForceResult brute_force_optimal(const FiniteMarket& market, const PriorSet& priors,
                                     const UtilityFunction& u, double x, GridSpec grid) {
    validate_priors(priors);
    if (priors.vertices.front().num_states() != market.tree.num_leaves())
        raise(ErrorKind::DimensionMismatch, "prior length != market leaves");
    if (!(x > 0.0)) raise(ErrorKind::DomainError, "initial wealth must be positive");

    WealthEvaluator eval(market);
    const int dims = eval.lay.n_vars;
    if (grid.bounds.empty()) grid = default_grid(market, x);
    if (static_cast<int>(grid.bounds.size()) != dims)
        raise(ErrorKind::DimensionMismatch, "grid bounds do not match the holdings variables");

    int active_dims = 0;
    for (const auto& [lo, hi] : grid.bounds) {
        if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi)
            raise(ErrorKind::DomainError, "bad grid bounds");
        if (hi > lo) ++active_dims;
    }

    int pts = grid.points_per_dim;
    if (pts <= 0) {
        pts = active_dims <= 1 ? 2001
                               : static_cast<int>(
                                     std::pow(static_cast<double>(grid.max_points), 1.0 / active_dims));
        pts = std::clamp(pts, 9, active_dims <= 1 ? 2001 : 801);
        if (pts % 2 == 0) --pts;  // keep H = 0 on symmetric grids
    }
    double total = 1.0;
    for (const auto& [lo, hi] : grid.bounds)
        if (hi > lo) total *= pts;
    if (total > static_cast<double>(grid.max_points))
        raise(ErrorKind::GridGuardExceeded,
              "grid would hold " + std::to_string(total) + " points");

    const int m = static_cast<int>(priors.vertices.size());
    const int leaves = market.tree.num_leaves();
    std::vector<double> leaf_utility(leaves);

    auto objective = [&](const std::vector<double>& h) {
        if (eval.evaluate(h, x) < -kAdmissibilityTol) return -kInf;
        for (int pos = 0; pos < leaves; ++pos) {
            const double w = std::max(eval.wealth[market.tree.terminal_states[pos]], 0.0);
            leaf_utility[pos] = evaluate(u, w);
        }
        double worst = kInf;
        for (int j = 0; j < m; ++j) {
            double e = 0.0;
            for (int pos = 0; pos < leaves; ++pos) {
                if (priors.vertices[j].weights[pos] == 0.0) continue;
                if (leaf_utility[pos] == -kInf) return -kInf;
                e += priors.vertices[j].weights[pos] * leaf_utility[pos];
            }
            worst = std::min(worst, e);
        }
        return worst;
    };

    BruteForceResult best;
    best.holdings.assign(dims, 0.0);
    best.value = objective(best.holdings);  // H = 0 is always admissible

    std::vector<std::pair<double, double>> bounds = grid.bounds;
    int shrinks = 0;
    int expansions = 0;
    while (true) {
        std::vector<double> cell(dims, 0.0);
        std::vector<int> idx(dims, 0);
        std::vector<double> h(dims, 0.0);
        for (int d = 0; d < dims; ++d)
            cell[d] = bounds[d].second > bounds[d].first
                          ? (bounds[d].second - bounds[d].first) / (pts - 1)
                          : 0.0;
        std::vector<double> pass_best = best.holdings;
        bool done = false;
        while (!done) {
            for (int d = 0; d < dims; ++d)
                h[d] = cell[d] == 0.0 ? bounds[d].first : bounds[d].first + idx[d] * cell[d];
            const double v = objective(h);
            if (v > best.value) {
                best.value = v;
                best.holdings = h;
                pass_best = h;
            }
            done = true;
            for (int d = 0; d < dims; ++d) {
                if (cell[d] == 0.0) continue;
                if (++idx[d] < pts) {
                    done = false;
                    break;
                }
                idx[d] = 0;
            }
        }
        // An incumbent pinned to the window edge means the admissible optimum
        // may lie outside: widen those dimensions instead of shrinking. The
        // per-asset bound derived from admissibility is not a valid box once
        // assets can offset each other or wealth compounds across periods.
        std::vector<int> pinned;
        for (int d = 0; d < dims; ++d) {
            if (cell[d] == 0.0) continue;
            if (pass_best[d] <= bounds[d].first + 1.51 * cell[d] ||
                pass_best[d] >= bounds[d].second - 1.51 * cell[d])
                pinned.push_back(d);
        }
        if (!pinned.empty() && expansions < 12) {
            ++expansions;
            for (int d : pinned) {
                const double half = bounds[d].second - bounds[d].first;
                bounds[d].first = pass_best[d] - half;
                bounds[d].second = pass_best[d] + half;
            }
            continue;
        }
        if (shrinks >= grid.refinement_levels) break;
        ++shrinks;
        for (int d = 0; d < dims; ++d) {
            if (cell[d] == 0.0) continue;
            const double half = 2.5 * cell[d];
            bounds[d].first = pass_best[d] - half;
            bounds[d].second = pass_best[d] + half;
        }
    }
    return best;
}

NoBettingScan brute_force_no_betting(const PriorSet& priors, const std::vector<double>& payoffs,
                                     double price_lo, double price_hi, double step,
                                     const UtilityFunction& u, double x) {
    validate_priors(priors);
    if (priors.vertices.front().num_states() != static_cast<int>(payoffs.size()))
        raise(ErrorKind::DimensionMismatch, "prior length != payoff states");
    if (!(step > 0.0) || !(price_hi >= price_lo)) raise(ErrorKind::DomainError, "bad price grid");

    NoBettingScan scan;
    const double u_x = evaluate(u, x);
    const int n = static_cast<int>(std::round((price_hi - price_lo) / step));
    for (int k = 0; k <= n; ++k) {
        const double p = price_lo + k * step;
        std::vector<std::vector<double>> leaf_prices;
        leaf_prices.reserve(payoffs.size());
        for (double a : payoffs) leaf_prices.push_back({a});
        MarketSpec spec;
        spec.steps = 1;
        spec.assets = 1;
        spec.nodes.push_back({0, -1, {p}});
        for (std::size_t i = 0; i < leaf_prices.size(); ++i)
            spec.nodes.push_back({static_cast<int>(i) + 1, 0, leaf_prices[i]});
        const FiniteMarket market = build_market(spec);
        const auto res = brute_force_optimal(market, priors, u, x);
        scan.prices.push_back(p);
        scan.no_betting.push_back(res.value <= u_x + 1e-6);
    }
    for (std::size_t k = 0; k < scan.prices.size(); ++k) {
        if (!scan.no_betting[k]) continue;
        if (!scan.interval.has_value())
            scan.interval = {scan.prices[k], scan.prices[k]};
        else
            scan.interval->second = scan.prices[k];
    }
    return scan;
}

std::vector<MeasureVector> enumerate_emm_vertices(const FiniteMarket& market) {
    const int leaves = market.tree.num_leaves();
    if (market.tree.steps != 1) raise(ErrorKind::TooLarge, "vertex enumeration is one-period only");
    if (leaves > 6) raise(ErrorKind::TooLarge, "vertex enumeration caps at 6 leaves");

    // system rows: total mass one, plus E_q[dS^a] = 0 per asset
    const int rows = 1 + market.num_assets;
    Eigen::MatrixXd sys(rows, leaves);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    rhs[0] = 1.0;
    for (int pos = 0; pos < leaves; ++pos) {
        sys(0, pos) = 1.0;
        const int leaf = market.tree.terminal_states[pos];
        for (int a = 0; a < market.num_assets; ++a) sys(1 + a, pos) = market.price_change(leaf, a);
    }

    std::vector<MeasureVector> found;
    auto consider = [&](const std::vector<int>& cols) {
        Eigen::MatrixXd sub(rows, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) sub.col(j) = sys.col(cols[j]);
        const Eigen::VectorXd qs =
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(sub).solve(rhs);
        if (!qs.allFinite()) return;
        if ((sub * qs - rhs).cwiseAbs().maxCoeff() > 1e-9) return;
        std::vector<double> w(leaves, 0.0);
        double total = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (qs[j] < -1e-10) return;
            w[cols[j]] = std::max(qs[j], 0.0);
            total += w[cols[j]];
        }
        if (std::abs(total - 1.0) > 1e-9) return;
        for (double& v : w) v /= total;
        MeasureVector q{w};
        if (!is_martingale_measure(q, market)) return;
        for (const auto& other : found) {
            double dist = 0.0;
            for (int i = 0; i < leaves; ++i)
                dist = std::max(dist, std::abs(other.weights[i] - q.weights[i]));
            if (dist < 1e-10) return;
        }
        found.push_back(std::move(q));
    };

    const int max_size = std::min(leaves, rows);
    std::vector<int> cols;
    auto recurse = [&](auto&& self, int from, int want) -> void {
        if (want == 0) {
            consider(cols);
            return;
        }
        for (int c = from; c + want <= leaves; ++c) {
            cols.push_back(c);
            self(self, c + 1, want - 1);
            cols.pop_back();
        }
    };
    for (int size = 1; size <= max_size; ++size) recurse(recurse, 0, size);
    return found;
}

}  // namespace robustfolio
