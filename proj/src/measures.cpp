#include "robustfolio/measures.hpp"

#include <algorithm>
#include <cmath>

namespace robustfolio {

namespace {

// Ancestor-of-leaf bookkeeping: for leaf position l and node n on its path,
// the child of n on the way to l.
struct PathTable {
    // child_on_path[node][leaf position] = child id, or -1 if leaf not below node
    std::vector<std::vector<int>> child_on_path;
    std::vector<int> leaf_position;  // node id -> terminal position (-1 if inner)
};

PathTable build_paths(const FiniteMarket& market) {
    const auto& tree = market.tree;
    PathTable table;
    table.child_on_path.assign(tree.num_nodes(), std::vector<int>(tree.num_leaves(), -1));
    table.leaf_position.assign(tree.num_nodes(), -1);
    for (int pos = 0; pos < tree.num_leaves(); ++pos) {
        const int leaf = tree.terminal_states[pos];
        table.leaf_position[leaf] = pos;
        int child = leaf;
        int node = tree.nodes[leaf].parent;
        while (node != -1) {
            table.child_on_path[node][pos] = child;
            child = node;
            node = tree.nodes[node].parent;
        }
    }
    return table;
}

void check_dimensions(const MeasureVector& q, const FiniteMarket& market) {
    if (q.num_states() != market.tree.num_leaves())
        raise(ErrorKind::DimensionMismatch,
              "measure has " + std::to_string(q.num_states()) + " states, market has " +
                  std::to_string(market.tree.num_leaves()) + " leaves");
}

// Subtree mass under q for every node.
std::vector<double> subtree_mass(const MeasureVector& q, const FiniteMarket& market) {
    const auto& tree = market.tree;
    std::vector<double> mass(tree.num_nodes(), 0.0);
    std::vector<int> order(tree.num_nodes());
    for (int i = 0; i < tree.num_nodes(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return tree.nodes[a].depth > tree.nodes[b].depth; });
    for (int pos = 0; pos < tree.num_leaves(); ++pos) mass[tree.terminal_states[pos]] = q.weights[pos];
    for (int node : order)
        if (!tree.is_leaf(node))
            for (int c : tree.nodes[node].children) mass[node] += mass[c];
    return mass;
}

}  // namespace

std::vector<int> MeasureVector::support() const {
    std::vector<int> s;
    for (int i = 0; i < num_states(); ++i)
        if (weights[i] > kSupportEps) s.push_back(i);
    return s;
}

void validate_measure(const MeasureVector& q) {
    double sum = 0.0;
    for (double w : q.weights) {
        if (!(w >= 0.0)) raise(ErrorKind::DomainError, "measure weight must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        raise(ErrorKind::DomainError, "measure weights sum to " + std::to_string(sum));
}

void validate_priors(const PriorSet& priors) {
    if (priors.vertices.empty()) raise(ErrorKind::DomainError, "prior set has no vertices");
    const int states = priors.vertices.front().num_states();
    for (const auto& v : priors.vertices) {
        if (v.num_states() != states)
            raise(ErrorKind::DimensionMismatch, "prior vertices have mixed lengths");
        validate_measure(v);
    }
}

std::vector<int> common_support(const PriorSet& priors) {
    validate_priors(priors);
    const std::vector<int> base = priors.vertices.front().support();
    for (std::size_t i = 1; i < priors.vertices.size(); ++i)
        if (priors.vertices[i].support() != base)
            raise(ErrorKind::SupportMismatch,
                  "vertex " + std::to_string(i) + " disagrees with vertex 0 on support");
    return base;
}

MartingaleConstraints martingale_constraints(const FiniteMarket& market) {
    const auto& tree = market.tree;
    const PathTable paths = build_paths(market);
    MartingaleConstraints out;
    for (int node = 0; node < tree.num_nodes(); ++node) {
        if (tree.is_leaf(node)) continue;
        for (int a = 0; a < market.num_assets; ++a) {
            std::vector<double> row(tree.num_leaves(), 0.0);
            for (int pos = 0; pos < tree.num_leaves(); ++pos) {
                const int child = paths.child_on_path[node][pos];
                if (child >= 0) row[pos] = market.price(child, a) - market.price(node, a);
            }
            out.rows.push_back(std::move(row));
            out.row_meta.emplace_back(node, a);
        }
    }
    return out;
}

bool is_martingale_measure(const MeasureVector& q, const FiniteMarket& market) {
    check_dimensions(q, market);
    const auto& tree = market.tree;
    const PathTable paths = build_paths(market);
    const std::vector<double> mass = subtree_mass(q, market);
    for (int node = 0; node < tree.num_nodes(); ++node) {
        if (tree.is_leaf(node) || mass[node] <= kSupportEps) continue;
        for (int a = 0; a < market.num_assets; ++a) {
            double expectation = 0.0;
            for (int c : tree.nodes[node].children) expectation += mass[c] * market.price(c, a);
            expectation /= mass[node];
            if (std::abs(expectation - market.price(node, a)) > kMartingaleTol) return false;
        }
    }
    return true;
}

std::optional<MeasureVector> find_emm(const FiniteMarket& market, const std::vector<int>& support,
                                      const SolverConfig& cfg) {
    if (support.empty()) raise(ErrorKind::DomainError, "empty support");
    const int leaves = market.tree.num_leaves();
    for (int pos : support)
        if (pos < 0 || pos >= leaves) raise(ErrorKind::DimensionMismatch, "support index out of range");

    // Variables: q on the support, plus delta. Maximize delta subject to the
    // martingale equalities, total mass one, and q >= delta on the support.
    const int s = static_cast<int>(support.size());
    LinearProgram lp;
    lp.objective.assign(s + 1, 0.0);
    lp.objective[s] = 1.0;

    const MartingaleConstraints mc = martingale_constraints(market);
    for (const auto& row : mc.rows) {
        std::vector<double> coef(s + 1, 0.0);
        bool nonzero = false;
        for (int j = 0; j < s; ++j) {
            coef[j] = row[support[j]];
            if (coef[j] != 0.0) nonzero = true;
        }
        if (!nonzero) continue;
        lp.eq_matrix.push_back(std::move(coef));
        lp.eq_rhs.push_back(0.0);
    }
    std::vector<double> ones(s + 1, 1.0);
    ones[s] = 0.0;
    lp.eq_matrix.push_back(std::move(ones));
    lp.eq_rhs.push_back(1.0);
    for (int j = 0; j < s; ++j) {
        std::vector<double> coef(s + 1, 0.0);
        coef[j] = -1.0;
        coef[s] = 1.0;  // delta - q_j <= 0
        lp.ineq_matrix.push_back(std::move(coef));
        lp.ineq_rhs.push_back(0.0);
    }

    LPResult res;
    try {
        res = solve_lp(lp, cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IterationCapExceeded)
            raise(ErrorKind::LPNumericalFailure, "EMM feasibility LP hit the iteration cap");
        throw;
    }
    if (res.status != LPStatus::optimal || res.objective <= kEquivalenceSlack) return std::nullopt;

    MeasureVector q;
    q.weights.assign(leaves, 0.0);
    double total = 0.0;
    for (int j = 0; j < s; ++j) {
        q.weights[support[j]] = std::max(res.solution[j], 0.0);
        total += q.weights[support[j]];
    }
    for (double& w : q.weights) w /= total;
    return q;
}

namespace {

// Shared hull-search LP: maximize delta over simplex mixtures of the prior
// vertices subject to the given martingale rows (as equalities or as the
// paired cone inequalities) and mixture weights >= delta on the support.
std::optional<PriorCertificate> hull_search(const PriorSet& priors, const FiniteMarket& market,
                                            bool as_inequalities, const SolverConfig& cfg) {
    validate_priors(priors);
    const int leaves = market.tree.num_leaves();
    if (priors.vertices.front().num_states() != leaves)
        raise(ErrorKind::DimensionMismatch, "prior length does not match market leaves");
    const std::vector<int> support = common_support(priors);

    const int m = static_cast<int>(priors.vertices.size());
    LinearProgram lp;
    lp.objective.assign(m + 1, 0.0);
    lp.objective[m] = 1.0;

    const MartingaleConstraints mc = martingale_constraints(market);
    for (const auto& row : mc.rows) {
        std::vector<double> coef(m + 1, 0.0);
        bool nonzero = false;
        for (int j = 0; j < m; ++j) {
            double c = 0.0;
            for (int pos = 0; pos < leaves; ++pos) c += row[pos] * priors.vertices[j].weights[pos];
            coef[j] = c;
            if (std::abs(c) > 0.0) nonzero = true;
        }
        if (!nonzero) continue;
        if (as_inequalities) {
            std::vector<double> neg(coef);
            for (double& v : neg) v = -v;
            lp.ineq_matrix.push_back(std::move(coef));
            lp.ineq_rhs.push_back(0.0);
            lp.ineq_matrix.push_back(std::move(neg));
            lp.ineq_rhs.push_back(0.0);
        } else {
            lp.eq_matrix.push_back(std::move(coef));
            lp.eq_rhs.push_back(0.0);
        }
    }

    std::vector<double> ones(m + 1, 1.0);
    ones[m] = 0.0;
    lp.eq_matrix.push_back(std::move(ones));
    lp.eq_rhs.push_back(1.0);

    for (int pos : support) {
        std::vector<double> coef(m + 1, 0.0);
        for (int j = 0; j < m; ++j) coef[j] = -priors.vertices[j].weights[pos];
        coef[m] = 1.0;  // delta - q_pos(lambda) <= 0
        lp.ineq_matrix.push_back(std::move(coef));
        lp.ineq_rhs.push_back(0.0);
    }

    LPResult res;
    try {
        res = solve_lp(lp, cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IterationCapExceeded)
            raise(ErrorKind::LPNumericalFailure, "prior hull LP hit the iteration cap");
        throw;
    }
    if (res.status != LPStatus::optimal || res.objective <= kEquivalenceSlack) return std::nullopt;

    PriorCertificate cert;
    cert.mixture.assign(m, 0.0);
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        cert.mixture[j] = std::max(res.solution[j], 0.0);
        total += cert.mixture[j];
    }
    for (double& l : cert.mixture) l /= total;
    cert.measure.weights.assign(leaves, 0.0);
    for (int j = 0; j < m; ++j)
        for (int pos = 0; pos < leaves; ++pos)
            cert.measure.weights[pos] += cert.mixture[j] * priors.vertices[j].weights[pos];
    return cert;
}

}  // namespace

std::optional<PriorCertificate> priors_contain_emm(const PriorSet& priors,
                                                   const FiniteMarket& market,
                                                   const SolverConfig& cfg) {
    return hull_search(priors, market, /*as_inequalities=*/false, cfg);
}

bool is_supermartingale_measure(const MeasureVector& q, const FiniteMarket& market, double x) {
    check_dimensions(q, market);
    if (!(x > 0.0)) raise(ErrorKind::DomainError, "initial wealth must be positive");
    // With x > 0 both +h and -h are admissible one-step positions at small
    // scale, so the cone conditions E_q[(S(child)-S(node)) 1_node] <= 0 must
    // hold with both signs, i.e. vanish.
    const MartingaleConstraints mc = martingale_constraints(market);
    for (const auto& row : mc.rows) {
        double g = 0.0;
        for (int pos = 0; pos < q.num_states(); ++pos) g += row[pos] * q.weights[pos];
        if (std::abs(g) > kMartingaleTol) return false;
    }
    return true;
}

std::optional<PriorCertificate> priors_contain_supermartingale(const PriorSet& priors,
                                                               const FiniteMarket& market,
                                                               double x, const SolverConfig& cfg) {
    if (!(x > 0.0)) raise(ErrorKind::DomainError, "initial wealth must be positive");
    return hull_search(priors, market, /*as_inequalities=*/true, cfg);
}

}  // namespace robustfolio
