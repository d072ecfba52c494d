#include "robustfolio/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace robustfolio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double second_derivative(const UtilityFunction& u, double x) {
    switch (u.family) {
        case UtilityFamily::power:
            return (u.alpha - 1.0) * std::pow(x, u.alpha - 2.0);
        case UtilityFamily::log:
            return -1.0 / (x * x);
        case UtilityFamily::custom: {
            const double h = 1e-6 * std::max(x, 1e-6);
            return (u.custom_marginal(x + h) - u.custom_marginal(x - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

// Linearization of the wealth map: wealth(node) = x + node_gain.row(node) . h
// with one holdings variable per (non-terminal node, asset).
struct Geometry {
    const FiniteMarket* market = nullptr;
    int n_vars = 0;
    std::vector<int> var_base;   // node id -> first variable index (-1 at leaves)
    Eigen::MatrixXd node_gain;   // num_nodes x n_vars
    Eigen::MatrixXd leaf_gain;   // num_leaves x n_vars

    Portfolio portfolio_from(const Eigen::VectorXd& h, double x) const {
        Portfolio p = zero_portfolio(*market, x);
        for (int n = 0; n < market->tree.num_nodes(); ++n) {
            if (market->tree.is_leaf(n)) continue;
            for (int a = 0; a < market->num_assets; ++a) p.holdings[n][a] = h[var_base[n] + a];
        }
        return p;
    }

    Eigen::VectorXd leaf_wealth(const Eigen::VectorXd& h, double x) const {
        return (leaf_gain * h).array() + x;
    }
    Eigen::VectorXd all_wealth(const Eigen::VectorXd& h, double x) const {
        return (node_gain * h).array() + x;
    }
};

Geometry build_geometry(const FiniteMarket& market) {
    const auto& tree = market.tree;
    Geometry g;
    g.market = &market;
    g.var_base.assign(tree.num_nodes(), -1);
    for (int n = 0; n < tree.num_nodes(); ++n) {
        if (tree.is_leaf(n)) continue;
        g.var_base[n] = g.n_vars;
        g.n_vars += market.num_assets;
    }
    g.node_gain = Eigen::MatrixXd::Zero(tree.num_nodes(), g.n_vars);
    for (int node = 0; node < tree.num_nodes(); ++node) {
        int child = node;
        for (int anc = tree.nodes[node].parent; anc != -1; anc = tree.nodes[anc].parent) {
            for (int a = 0; a < market.num_assets; ++a)
                g.node_gain(node, g.var_base[anc] + a) +=
                    market.price(child, a) - market.price(anc, a);
            child = anc;
        }
    }
    g.leaf_gain = Eigen::MatrixXd::Zero(tree.num_leaves(), g.n_vars);
    for (int pos = 0; pos < tree.num_leaves(); ++pos)
        g.leaf_gain.row(pos) = g.node_gain.row(tree.terminal_states[pos]);
    return g;
}

// Expected utility, gradient and Hessian in the holdings variables for a
// fixed probability vector over the leaves.
struct Objective {
    const Geometry* geom;
    const UtilityFunction* u;
    Eigen::VectorXd p;
    double x;

    double value(const Eigen::VectorXd& h) const {
        const Eigen::VectorXd w = geom->leaf_wealth(h, x);
        double v = 0.0;
        for (int l = 0; l < w.size(); ++l) {
            if (p[l] == 0.0) continue;
            if (w[l] <= 0.0) {
                const double boundary = evaluate(*u, std::max(w[l], 0.0));
                if (boundary == -kInf) return -kInf;
                v += p[l] * boundary;
                continue;
            }
            v += p[l] * evaluate(*u, w[l]);
        }
        return v;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& h) const {
        const Eigen::VectorXd w = geom->leaf_wealth(h, x);
        Eigen::VectorXd scale(w.size());
        for (int l = 0; l < w.size(); ++l) scale[l] = p[l] == 0.0 ? 0.0 : p[l] * marginal(*u, w[l]);
        return geom->leaf_gain.transpose() * scale;
    }
    Eigen::MatrixXd hessian(const Eigen::VectorXd& h) const {
        const Eigen::VectorXd w = geom->leaf_wealth(h, x);
        Eigen::VectorXd scale(w.size());
        for (int l = 0; l < w.size(); ++l)
            scale[l] = p[l] == 0.0 ? 0.0 : p[l] * second_derivative(*u, w[l]);
        return geom->leaf_gain.transpose() * scale.asDiagonal() * geom->leaf_gain;
    }
};

struct NewtonOutcome {
    Eigen::VectorXd h;
    double value = -kInf;
    double grad_norm = kInf;
    bool converged = false;
};

// Damped Newton ascent of a smooth strictly concave objective over the open
// region where every node wealth stays positive. The Inada conditions push
// the optimum strictly inside, so the interior barrier never binds at the
// solution.
NewtonOutcome newton_max(const Objective& obj, Eigen::VectorXd h0, double x) {
    const double floor = 1e-13 * x;
    auto interior = [&](const Eigen::VectorXd& h) {
        return obj.geom->all_wealth(h, x).minCoeff() > floor;
    };
    NewtonOutcome out;
    out.h = std::move(h0);
    if (!interior(out.h)) raise(ErrorKind::InfeasibleStart, "Newton start not strictly admissible");
    out.value = obj.value(out.h);

    const double gtol = 1e-12 * std::max(1.0, marginal(*obj.u, x));
    for (int iter = 0; iter < 120; ++iter) {
        const Eigen::VectorXd g = obj.gradient(out.h);
        out.grad_norm = g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
        if (out.grad_norm <= gtol) {
            out.converged = true;
            return out;
        }
        Eigen::MatrixXd a = -obj.hessian(out.h);
        const double ridge = 1e-12 * std::max(1.0, a.trace() / std::max(1, (int)a.rows()));
        Eigen::VectorXd step;
        for (double mu = ridge;; mu *= 100.0) {
            Eigen::MatrixXd reg = a + mu * Eigen::MatrixXd::Identity(a.rows(), a.cols());
            Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
            step = ldlt.solve(g);
            if (ldlt.info() == Eigen::Success && step.allFinite() && g.dot(step) > 0.0) break;
            if (mu > 1e12) {
                step = g;  // steepest ascent fallback
                break;
            }
        }
        double t = 1.0;
        bool moved = false;
        for (int back = 0; back < 70; ++back) {
            const Eigen::VectorXd trial = out.h + t * step;
            if (interior(trial)) {
                const double v = obj.value(trial);
                if (v > out.value + 1e-4 * t * g.dot(step) || v > out.value) {
                    out.h = trial;
                    out.value = v;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!moved) {
            out.converged = out.grad_norm <= 1e-7 * std::max(1.0, marginal(*obj.u, x));
            return out;
        }
    }
    out.converged = out.grad_norm <= 1e-7 * std::max(1.0, marginal(*obj.u, x));
    return out;
}

// Minimal-norm holdings that reproduce the same terminal wealth profile;
// keeps the reported portfolio identified when assets are redundant.
Eigen::VectorXd min_norm_holdings(const Geometry& geom, const Eigen::VectorXd& h) {
    if (h.size() == 0) return h;
    const Eigen::VectorXd target = geom.leaf_gain * h;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(geom.leaf_gain);
    const Eigen::VectorXd h_mn = cod.solve(target);
    if (!h_mn.allFinite()) return h;
    if ((geom.leaf_gain * h_mn - target).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + target.cwiseAbs().maxCoeff()))
        return h;
    return h_mn;
}

std::vector<int> full_support(const FiniteMarket& market) {
    std::vector<int> s(market.tree.num_leaves());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<int>(i);
    return s;
}

void require_full_support(const MeasureVector& prior, const FiniteMarket& market,
                          const char* where) {
    if (prior.num_states() != market.tree.num_leaves())
        raise(ErrorKind::DimensionMismatch, std::string(where) + ": prior length != leaves");
    for (double w : prior.weights)
        if (w <= kSupportEps)
            raise(ErrorKind::DomainError, std::string(where) + " requires a full-support prior");
}

void arbitrage_gate(const FiniteMarket& market, const SolverConfig& cfg, const std::string& who) {
    if (!find_emm(market, full_support(market), cfg).has_value())
        raise(ErrorKind::ArbitrageDetected, who + ": no equivalent martingale measure exists");
}

OptimalPlan riskless_plan(const FiniteMarket& market, const PriorSet& priors,
                          const UtilityFunction& u, double x) {
    OptimalPlan plan;
    plan.portfolio = zero_portfolio(market, x);
    plan.terminal_wealth.assign(market.tree.num_leaves(), x);
    plan.value = evaluate(u, x);
    const int m = static_cast<int>(priors.vertices.size());
    plan.worst_case_mixture.assign(m, 1.0 / m);
    plan.worst_case_prior.weights.assign(market.tree.num_leaves(), 0.0);
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < market.tree.num_leaves(); ++l)
            plan.worst_case_prior.weights[l] += plan.worst_case_mixture[j] * priors.vertices[j].weights[l];
    return plan;
}

OptimalPlan assemble_plan(const Geometry& geom, const std::vector<Objective>& pieces,
                          const PriorSet& priors, const UtilityFunction& u, double x,
                          Eigen::VectorXd h, std::vector<double> mixture) {
    const FiniteMarket& market = *geom.market;
    // the min-norm projection keeps the terminal profile; it must also keep
    // the intermediate nodes admissible, otherwise stay with the raw holdings
    const Eigen::VectorXd projected = min_norm_holdings(geom, h);
    if (geom.all_wealth(projected, x).minCoeff() >= -kAdmissibilityTol) h = projected;
    OptimalPlan plan;
    plan.portfolio = geom.portfolio_from(h, x);
    const Eigen::VectorXd w = geom.leaf_wealth(h, x);
    plan.terminal_wealth.assign(w.data(), w.data() + w.size());

    double value = kInf;
    for (const auto& piece : pieces) value = std::min(value, piece.value(h));
    plan.value = value;

    const int m = static_cast<int>(priors.vertices.size());
    if (static_cast<int>(mixture.size()) != m) mixture.assign(m, 1.0 / m);
    double lsum = 0.0;
    for (double& l : mixture) {
        l = std::max(l, 0.0);
        lsum += l;
    }
    if (lsum <= 0.0) {
        mixture.assign(m, 1.0 / m);
        lsum = 1.0;
    }
    for (double& l : mixture) l /= lsum;
    plan.worst_case_mixture = mixture;
    plan.worst_case_prior.weights.assign(market.tree.num_leaves(), 0.0);
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < market.tree.num_leaves(); ++l)
            plan.worst_case_prior.weights[l] += mixture[j] * priors.vertices[j].weights[l];
    (void)u;
    return plan;
}

// Active-set refinement of the saddle point: solve the balanced system
//   sum_i lambda_i grad f_i(h) = 0,  f_i(h) = t (i active),  sum lambda = 1
// by damped Newton, adjusting the active set on sign violations.
struct SaddleOutcome {
    Eigen::VectorXd h;
    std::vector<double> mixture;
    double value = -kInf;
    bool converged = false;
};

SaddleOutcome saddle_refine(const Geometry& geom, const std::vector<Objective>& pieces, double x,
                            const Eigen::VectorXd& start) {
    const int m = static_cast<int>(pieces.size());
    const int nh = geom.n_vars;
    const double floor = 1e-13 * x;
    auto interior = [&](const Eigen::VectorXd& h) {
        return geom.all_wealth(h, x).minCoeff() > floor;
    };

    SaddleOutcome out;
    out.h = start;
    std::vector<double> f0(m);
    double fmin = kInf;
    for (int i = 0; i < m; ++i) {
        f0[i] = pieces[i].value(start);
        fmin = std::min(fmin, f0[i]);
    }
    const double band = 1e-3 * (1.0 + std::abs(fmin));
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
        if (f0[i] <= fmin + band) active.push_back(i);

    for (int round = 0; round < 2 * m + 4; ++round) {
        const int k = static_cast<int>(active.size());
        Eigen::VectorXd h = start;

        // least-squares mixture start: minimize |sum lambda_i grad f_i|^2 on the affine slice
        Eigen::MatrixXd grads(nh, k);
        for (int j = 0; j < k; ++j) grads.col(j) = pieces[active[j]].gradient(h);
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        kkt.topLeftCorner(k, k) = grads.transpose() * grads;
        kkt.topRightCorner(k, 1).setOnes();
        kkt.bottomLeftCorner(1, k).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
        rhs[k] = 1.0;
        Eigen::VectorXd lam0 =
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(kkt).solve(rhs).head(k);
        double lsum = 0.0;
        for (int j = 0; j < k; ++j) {
            lam0[j] = std::max(lam0[j], 1e-6);
            lsum += lam0[j];
        }
        lam0 /= lsum;

        Eigen::VectorXd lam = lam0;
        double t = kInf;
        for (int j = 0; j < k; ++j) t = std::min(t, pieces[active[j]].value(h));

        auto residual = [&](const Eigen::VectorXd& hh, const Eigen::VectorXd& ll, double tt) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(nh + k + 1);
            for (int j = 0; j < k; ++j) r.head(nh) += ll[j] * pieces[active[j]].gradient(hh);
            for (int j = 0; j < k; ++j) r[nh + j] = pieces[active[j]].value(hh) - tt;
            r[nh + k] = ll.sum() - 1.0;
            return r;
        };

        bool newton_ok = false;
        Eigen::VectorXd r = residual(h, lam, t);
        for (int iter = 0; iter < 80; ++iter) {
            const double rnorm = r.cwiseAbs().maxCoeff();
            if (rnorm <= 1e-12 * (1.0 + std::abs(t))) {
                newton_ok = true;
                break;
            }
            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nh + k + 1, nh + k + 1);
            Eigen::MatrixXd hmix = Eigen::MatrixXd::Zero(nh, nh);
            for (int j = 0; j < k; ++j) hmix += lam[j] * pieces[active[j]].hessian(h);
            jac.topLeftCorner(nh, nh) = hmix;
            for (int j = 0; j < k; ++j) {
                const Eigen::VectorXd gj = pieces[active[j]].gradient(h);
                jac.block(0, nh + j, nh, 1) = gj;
                jac.block(nh + j, 0, 1, nh) = gj.transpose();
                jac(nh + j, nh + k) = -1.0;
            }
            jac.block(nh + k, nh, 1, k).setOnes();
            Eigen::VectorXd dz =
                Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(jac).solve(-r);
            if (!dz.allFinite()) break;

            double step = 1.0;
            bool accepted = false;
            for (int back = 0; back < 60; ++back) {
                const Eigen::VectorXd h2 = h + step * dz.head(nh);
                const Eigen::VectorXd lam2 = lam + step * dz.segment(nh, k);
                const double t2 = t + step * dz[nh + k];
                if (interior(h2)) {
                    const Eigen::VectorXd r2 = residual(h2, lam2, t2);
                    if (r2.norm() < (1.0 - 1e-4 * step) * r.norm()) {
                        h = h2;
                        lam = lam2;
                        t = t2;
                        r = r2;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        if (!newton_ok) return out;  // caller keeps the supergradient iterate

        // KKT screening: active multipliers nonnegative, inactive pieces above t.
        int drop = -1;
        double worst_lambda = -1e-9;
        for (int j = 0; j < k; ++j) {
            if (lam[j] < worst_lambda) {
                worst_lambda = lam[j];
                drop = j;
            }
        }
        if (drop >= 0 && k > 1) {
            active.erase(active.begin() + drop);
            continue;
        }
        int add = -1;
        double worst_violation = -1e-9;
        for (int i = 0; i < m; ++i) {
            if (std::find(active.begin(), active.end(), i) != active.end()) continue;
            const double slack = pieces[i].value(h) - t;
            if (slack < worst_violation) {
                worst_violation = slack;
                add = i;
            }
        }
        if (add >= 0) {
            active.push_back(add);
            std::sort(active.begin(), active.end());
            continue;
        }

        out.h = h;
        out.converged = true;
        out.value = t;
        out.mixture.assign(m, 0.0);
        for (int j = 0; j < k; ++j) out.mixture[active[j]] = std::max(lam[j], 0.0);
        double norm = 0.0;
        for (double l : out.mixture) norm += l;
        for (double& l : out.mixture) l /= norm;
        return out;
    }
    return out;
}

// Mixture-side certification: minimize g(lambda) = sup_H E_{P_lambda}[U(X_T)]
// over the vertex simplex (convex, Danskin gradient = per-vertex expected
// utilities at the inner optimum). The Frank-Wolfe gap here equals
// g(lambda) - min_i f_i(H(lambda)), so the inner optimum H(lambda) achieves
// the robust value within the gap.
struct LambdaPolish {
    Eigen::VectorXd h;
    std::vector<double> mixture;
    double lower = -kInf;  // min_i f_i(h), achieved
    double upper = kInf;   // g(lambda), bound on the robust value
};

LambdaPolish lambda_polish(const Geometry& geom, const std::vector<Objective>& pieces, double x,
                           std::vector<double> start_mixture, const SolverConfig& cfg) {
    const int m = static_cast<int>(pieces.size());
    const int leaves = geom.market->tree.num_leaves();
    Eigen::VectorXd h_warm = Eigen::VectorXd::Zero(geom.n_vars);
    Eigen::VectorXd h_last = h_warm;
    auto inner = [&](const std::vector<double>& lambda) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(leaves);
        for (int j = 0; j < m; ++j) p += lambda[j] * pieces[j].p;
        Objective mixed{&geom, pieces.front().u, p, x};
        auto res = newton_max(mixed, h_warm, x);
        if (!res.converged) res = newton_max(mixed, Eigen::VectorXd::Zero(geom.n_vars), x);
        h_warm = res.h;
        h_last = res.h;
        return res;
    };
    auto value = [&](const std::vector<double>& lambda) { return inner(lambda).value; };
    auto gradient = [&](const std::vector<double>& lambda) {
        const auto res = inner(lambda);
        std::vector<double> g(m);
        for (int j = 0; j < m; ++j) g[j] = pieces[j].value(res.h);
        return g;
    };
    auto lmo = [&](const std::vector<double>& g) {
        int best = 0;
        for (int j = 1; j < m; ++j)
            if (g[j] < g[best]) best = j;
        std::vector<double> v(m, 0.0);
        v[best] = 1.0;
        return v;
    };
    if (static_cast<int>(start_mixture.size()) != m) start_mixture.assign(m, 1.0 / m);

    SolverConfig fw_cfg = cfg;
    fw_cfg.tolerance = 1e-10;
    fw_cfg.max_iterations = 400;
    const auto fw = frank_wolfe(value, gradient, lmo, start_mixture, fw_cfg);

    LambdaPolish out;
    out.mixture = fw.point;
    inner(fw.point);
    out.h = h_last;
    out.upper = fw.value;
    double lo = kInf;
    for (const auto& piece : pieces) lo = std::min(lo, piece.value(out.h));
    out.lower = lo;
    return out;
}

}  // namespace

OptimalPlan solve_single_prior(const FiniteMarket& market, const MeasureVector& prior,
                               const UtilityFunction& u, double x, const SolverConfig& cfg) {
    cfg.validate();
    validate_measure(prior);
    require_full_support(prior, market, "solve_single_prior");
    if (!(x > 0.0)) raise(ErrorKind::DomainError, "initial wealth must be positive");
    if (!validate_assumptions(u).assumptions_hold)
        raise(ErrorKind::DomainError, "utility fails the standing assumptions");
    arbitrage_gate(market, cfg, "solve_single_prior");

    PriorSet singleton;
    singleton.vertices.push_back(prior);
    if (is_degenerate_market(market)) return riskless_plan(market, singleton, u, x);

    const Geometry geom = build_geometry(market);
    Objective obj{&geom, &u, Eigen::Map<const Eigen::VectorXd>(prior.weights.data(),
                                                               prior.weights.size()),
                  x};
    const auto newton = newton_max(obj, Eigen::VectorXd::Zero(geom.n_vars), x);
    if (!newton.converged)
        raise(ErrorKind::SolverFailure, "first-order conditions not met in solve_single_prior");
    return assemble_plan(geom, {obj}, singleton, u, x, newton.h, {1.0});
}

namespace {

DualSolution dual_impl(const FiniteMarket& market, const MeasureVector& prior,
                       const UtilityFunction& u, double y, const SolverConfig& cfg,
                       const MeasureVector* warm_start, double gap_target) {
    const int leaves = market.tree.num_leaves();
    const auto support = full_support(market);
    const auto q0 = warm_start != nullptr
                        ? std::optional<MeasureVector>(*warm_start)
                        : find_emm(market, support, cfg);
    if (!q0.has_value())
        raise(ErrorKind::ArbitrageDetected, "solve_dual: no equivalent martingale measure exists");

    const MartingaleConstraints mc = martingale_constraints(market);
    auto value = [&](const std::vector<double>& q) {
        double v = 0.0;
        for (int l = 0; l < leaves; ++l) {
            const double z = y * q[l] / prior.weights[l];
            if (z <= 0.0) {
                // closure of the objective along the boundary
                if (u.family == UtilityFamily::power && u.alpha < 0.0) continue;
                return kInf;
            }
            v += prior.weights[l] * conjugate(u, z);
        }
        return v;
    };
    auto gradient = [&](const std::vector<double>& q) {
        std::vector<double> g(leaves);
        for (int l = 0; l < leaves; ++l) {
            const double z = std::max(y * q[l] / prior.weights[l], 1e-300);
            g[l] = -y * inverse_marginal(u, z);  // V'(z) = -I(z)
        }
        return g;
    };
    auto lmo = [&](const std::vector<double>& g) {
        LinearProgram lp;
        lp.objective.assign(g.begin(), g.end());
        for (double& c : lp.objective) c = -c;  // solve_lp maximizes
        for (const auto& row : mc.rows) {
            lp.eq_matrix.push_back(row);
            lp.eq_rhs.push_back(0.0);
        }
        lp.eq_matrix.push_back(std::vector<double>(leaves, 1.0));
        lp.eq_rhs.push_back(1.0);
        const auto res = solve_lp(lp, cfg);
        if (res.status != LPStatus::optimal)
            raise(ErrorKind::LPNumericalFailure, "martingale polytope oracle failed");
        return res.solution;
    };

    SolverConfig fw_cfg = cfg;
    // Absolute gap target, relaxed proportionally when the objective scale is
    // far from unity (an absolute 1e-8 is unrepresentable against 1e6 values).
    const double scale = std::max(1.0, std::abs(value(q0->weights)) / 100.0);
    fw_cfg.tolerance = std::min(cfg.tolerance, gap_target) * scale;
    const auto fw = frank_wolfe(value, gradient, lmo, q0->weights, fw_cfg);
    if (!fw.converged) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "dual Frank-Wolfe gap %.3e above tolerance %.3e", fw.gap,
                      fw_cfg.tolerance);
        raise(ErrorKind::IterationCapExceeded, msg);
    }

    DualSolution out;
    out.q_star.weights = fw.point;
    out.value = fw.value;
    out.gap = fw.gap;
    return out;
}

}  // namespace

DualSolution solve_dual(const FiniteMarket& market, const MeasureVector& prior,
                        const UtilityFunction& u, double y, const SolverConfig& cfg) {
    cfg.validate();
    validate_measure(prior);
    require_full_support(prior, market, "solve_dual");
    if (!(y > 0.0)) raise(ErrorKind::DomainError, "dual argument y must be positive");
    return dual_impl(market, prior, u, y, cfg, nullptr, 1e-8);
}

DualityReport reconcile_duality(const FiniteMarket& market, const MeasureVector& prior,
                                const UtilityFunction& u, double x, const SolverConfig& cfg) {
    const OptimalPlan plan = solve_single_prior(market, prior, u, x, cfg);

    // wide Inada bracket around the stationary y
    const double y_lo = 1e-6 * marginal(u, x * 1e3);
    const double y_hi = 1e6 * marginal(u, x * 1e-3);
    MeasureVector warm;
    bool have_warm = false;
    auto dual_at = [&](double y) {
        const DualSolution d =
            dual_impl(market, prior, u, y, cfg, have_warm ? &warm : nullptr, 1e-13);
        warm = d.q_star;
        have_warm = true;
        return d;
    };
    SolverConfig golden_cfg = cfg;
    golden_cfg.tolerance = 1e-10;
    const auto scalar = minimize_scalar_convex(
        [&](double y) { return dual_at(y).value + x * y; }, y_lo, y_hi, golden_cfg);

    DualityReport report;
    report.primal_value = plan.value;
    report.y_star = scalar.x;
    const DualSolution dual = dual_at(scalar.x);
    report.dual_bound = dual.value + x * scalar.x;
    report.duality_gap = std::abs(report.primal_value - report.dual_bound) /
                         (1.0 + std::abs(report.primal_value));
    report.dual_measure = dual.q_star;
    report.terminal_wealth = plan.terminal_wealth;

    const int leaves = market.tree.num_leaves();
    report.dual_terminal_wealth.resize(leaves);
    report.wealth_identity_error = 0.0;
    for (int l = 0; l < leaves; ++l) {
        const double density = dual.q_star.weights[l] / prior.weights[l];
        report.dual_terminal_wealth[l] =
            inverse_marginal(u, std::max(report.y_star * density, 1e-300));
        report.wealth_identity_error =
            std::max(report.wealth_identity_error,
                     std::abs(report.terminal_wealth[l] - report.dual_terminal_wealth[l]) / x);
    }

    // E_P[X_T Y_T] and the node-by-node martingale identity for X Y, with
    // Y_t = y* Q*(subtree)/P(subtree) and X_t the primal wealth.
    const auto wp = wealth_process(market, plan.portfolio);
    const auto& tree = market.tree;
    std::vector<double> pmass(tree.num_nodes(), 0.0), qmass(tree.num_nodes(), 0.0),
        xy_expect(tree.num_nodes(), 0.0);
    std::vector<int> order(tree.num_nodes());
    for (int i = 0; i < tree.num_nodes(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return tree.nodes[a].depth > tree.nodes[b].depth; });
    for (int pos = 0; pos < leaves; ++pos) {
        const int leaf = tree.terminal_states[pos];
        pmass[leaf] = prior.weights[pos];
        qmass[leaf] = dual.q_star.weights[pos];
        xy_expect[leaf] =
            prior.weights[pos] * wp.values[leaf] * report.y_star * qmass[leaf] / pmass[leaf];
    }
    for (int node : order) {
        if (tree.is_leaf(node)) continue;
        for (int c : tree.nodes[node].children) {
            pmass[node] += pmass[c];
            qmass[node] += qmass[c];
            xy_expect[node] += xy_expect[c];
        }
    }
    report.product_expectation = xy_expect[tree.root];
    const double xy = x * report.y_star;
    report.product_identity_error = std::abs(report.product_expectation - xy) / xy;
    report.martingale_identity_error = 0.0;
    for (int node = 0; node < tree.num_nodes(); ++node) {
        if (pmass[node] <= kSupportEps) continue;
        const double y_node = report.y_star * qmass[node] / pmass[node];
        const double lhs = xy_expect[node] / pmass[node];
        report.martingale_identity_error = std::max(
            report.martingale_identity_error, std::abs(lhs - wp.values[node] * y_node) / xy);
    }

    report.pass = report.duality_gap <= 1e-5 && report.wealth_identity_error <= 1e-5 &&
                  report.product_identity_error <= 1e-6;
    if (report.duality_gap > 1e-5)
        raise(ErrorKind::DualityGapExceeded,
              "u(x) = " + std::to_string(report.primal_value) +
                  " vs min_y[v(y)+xy] = " + std::to_string(report.dual_bound));
    return report;
}

OptimalPlan solve_robust(const FiniteMarket& market, const PriorSet& priors,
                         const UtilityFunction& u, double x, const SolverConfig& cfg) {
    cfg.validate();
    validate_priors(priors);
    const auto support = common_support(priors);
    if (static_cast<int>(support.size()) != market.tree.num_leaves())
        raise(ErrorKind::DomainError, "solve_robust requires full-support priors");
    if (priors.vertices.front().num_states() != market.tree.num_leaves())
        raise(ErrorKind::DimensionMismatch, "prior length != market leaves");
    if (!(x > 0.0)) raise(ErrorKind::DomainError, "initial wealth must be positive");
    if (!validate_assumptions(u).assumptions_hold)
        raise(ErrorKind::DomainError, "utility fails the standing assumptions");
    try {
        arbitrage_gate(market, cfg, "solve_robust");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ArbitrageDetected)
            raise(ErrorKind::ArbitrageDetected,
                  "solve_robust: assumption M_P != {} fails for every prior vertex");
        throw;
    }

    if (is_degenerate_market(market)) return riskless_plan(market, priors, u, x);
    if (priors.vertices.size() == 1) {
        OptimalPlan plan = solve_single_prior(market, priors.vertices.front(), u, x, cfg);
        return plan;
    }

    const Geometry geom = build_geometry(market);
    const int m = static_cast<int>(priors.vertices.size());
    std::vector<Objective> pieces;
    pieces.reserve(m);
    for (const auto& v : priors.vertices)
        pieces.push_back(Objective{&geom, &u,
                                   Eigen::Map<const Eigen::VectorXd>(v.weights.data(),
                                                                     v.weights.size()),
                                   x});

    // Stage 1: supergradient ascent on min_i f_i.
    std::vector<ConcavePiece> kernel_pieces;
    kernel_pieces.reserve(m);
    for (const auto& piece : pieces) {
        kernel_pieces.push_back(ConcavePiece{
            [&piece](const std::vector<double>& h) {
                return piece.value(Eigen::Map<const Eigen::VectorXd>(h.data(), h.size()));
            },
            [&piece](const std::vector<double>& h) {
                const Eigen::VectorXd g =
                    piece.gradient(Eigen::Map<const Eigen::VectorXd>(h.data(), h.size()));
                return std::vector<double>(g.data(), g.data() + g.size());
            }});
    }
    const double floor = 1e-13 * x;
    auto feasible = [&](const std::vector<double>& h) {
        return geom.all_wealth(Eigen::Map<const Eigen::VectorXd>(h.data(), h.size()), x)
                   .minCoeff() > floor;
    };
    const auto sg = supergradient_minimax(kernel_pieces, feasible,
                                          std::vector<double>(geom.n_vars, 0.0), cfg);
    Eigen::VectorXd h_best = Eigen::Map<const Eigen::VectorXd>(sg.point.data(), sg.point.size());
    double best_value = sg.value;
    std::vector<double> mixture;

    // Stage 2: active-set saddle refinement from the supergradient iterate.
    const auto refined = saddle_refine(geom, pieces, x, h_best);
    if (refined.converged) {
        double v = kInf;
        for (const auto& piece : pieces) v = std::min(v, piece.value(refined.h));
        if (v >= best_value) {
            h_best = refined.h;
            best_value = v;
            mixture = refined.mixture;
        }
    }

    // Stage 3: mixture-side certification. When the certified bound shows the
    // incumbent is short, adopt the certified point and refine once more.
    const auto certified = lambda_polish(geom, pieces, x, mixture, cfg);
    if (certified.lower > best_value + 1e-12) {
        h_best = certified.h;
        best_value = certified.lower;
        mixture = certified.mixture;
        const auto again = saddle_refine(geom, pieces, x, h_best);
        if (again.converged) {
            double v = kInf;
            for (const auto& piece : pieces) v = std::min(v, piece.value(again.h));
            if (v >= best_value) {
                h_best = again.h;
                best_value = v;
                mixture = again.mixture;
            }
        }
    }
    return assemble_plan(geom, pieces, priors, u, x, h_best, mixture);
}

double saddle_gap(const FiniteMarket& market, const PriorSet& priors, const UtilityFunction& u,
                  double x, const OptimalPlan& plan, const SolverConfig& cfg) {
    cfg.validate();
    validate_priors(priors);
    const int m = static_cast<int>(priors.vertices.size());
    const int leaves = market.tree.num_leaves();
    if (is_degenerate_market(market)) return 0.0;

    const Geometry geom = build_geometry(market);
    std::vector<Objective> pieces;
    for (const auto& v : priors.vertices)
        pieces.push_back(Objective{&geom, &u,
                                   Eigen::Map<const Eigen::VectorXd>(v.weights.data(),
                                                                     v.weights.size()),
                                   x});

    // g(lambda) = sup_H E_{P_lambda}[U(X_T)], convex in lambda with Danskin
    // gradient (E_{v_i}[U(X̂)])_i; minimized over the simplex by Frank-Wolfe.
    Eigen::VectorXd h_warm = Eigen::VectorXd::Zero(geom.n_vars);
    auto inner = [&](const std::vector<double>& lambda) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(leaves);
        for (int j = 0; j < m; ++j)
            p += lambda[j] *
                 Eigen::Map<const Eigen::VectorXd>(priors.vertices[j].weights.data(), leaves);
        Objective mixed{&geom, &u, p, x};
        auto res = newton_max(mixed, h_warm, x);
        if (!res.converged) res = newton_max(mixed, Eigen::VectorXd::Zero(geom.n_vars), x);
        h_warm = res.h;
        return res;
    };
    auto value = [&](const std::vector<double>& lambda) { return inner(lambda).value; };
    auto gradient = [&](const std::vector<double>& lambda) {
        const auto res = inner(lambda);
        std::vector<double> g(m);
        for (int j = 0; j < m; ++j) g[j] = pieces[j].value(res.h);
        return g;
    };
    auto lmo = [&](const std::vector<double>& g) {
        int best = 0;
        for (int j = 1; j < m; ++j)
            if (g[j] < g[best]) best = j;
        std::vector<double> v(m, 0.0);
        v[best] = 1.0;
        return v;
    };

    std::vector<double> start = plan.worst_case_mixture;
    if (static_cast<int>(start.size()) != m) start.assign(m, 1.0 / m);
    SolverConfig fw_cfg = cfg;
    fw_cfg.tolerance = std::min(cfg.tolerance, 1e-7);
    fw_cfg.max_iterations = std::min(cfg.max_iterations, 400);
    const auto fw = frank_wolfe(value, gradient, lmo, start, fw_cfg);
    return std::max(0.0, fw.value - plan.value);
}

}  // namespace robustfolio
