#include "robustfolio/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace robustfolio {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Gen {
    std::mt19937_64 eng;

    Gen(std::uint64_t seed, std::uint64_t trial)
        : eng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (trial + 1)))) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<double> simplex_interior(int n, double floor) {
        std::vector<double> w(n);
        double total = 0.0;
        for (double& v : w) {
            v = -std::log(uniform(1e-12, 1.0));
            total += v;
        }
        for (double& v : w) v = floor + (1.0 - n * floor) * v / total;
        double sum = 0.0;
        for (double v : w) sum += v;
        for (double& v : w) v /= sum;
        return w;
    }
};

UtilityFunction random_utility(Gen& gen) {
    switch (gen.integer(0, 3)) {
        case 0: return UtilityFunction::log();
        case 1: return UtilityFunction::power(0.5);
        case 2: return UtilityFunction::power(0.3);
        default: return UtilityFunction::power(-1.0);
    }
}

}  // namespace

bool detect_riskless_optimal(const OptimalPlan& plan, const UtilityFunction& u, double x,
                             double tol) {
    const auto [lo, hi] =
        std::minmax_element(plan.terminal_wealth.begin(), plan.terminal_wealth.end());
    const double spread = *hi - *lo;
    return spread <= tol * x && plan.value >= evaluate(u, x) - tol;
}

bool detect_riskless_optimal(const FiniteMarket& market, const PriorSet& priors,
                             const UtilityFunction& u, double x, double tol,
                             const SolverConfig& cfg) {
    return detect_riskless_optimal(solve_robust(market, priors, u, x, cfg), u, x, tol);
}

VerificationReport theorem_check(const FiniteMarket& market, const PriorSet& priors,
                                 const UtilityFunction& u, double x, const SolverConfig& cfg,
                                 const std::string& market_id, double detector_tol) {
    VerificationReport rep;
    rep.market_id = market_id;
    const OptimalPlan plan = solve_robust(market, priors, u, x, cfg);
    rep.value = plan.value;
    rep.u_of_x = evaluate(u, x);
    rep.terminal_wealth = plan.terminal_wealth;
    rep.worst_case_mixture = plan.worst_case_mixture;
    const auto [lo, hi] =
        std::minmax_element(plan.terminal_wealth.begin(), plan.terminal_wealth.end());
    rep.wealth_spread = *hi - *lo;
    rep.detector_riskless = detect_riskless_optimal(plan, u, x, detector_tol);

    rep.emm_certificate = priors_contain_emm(priors, market, cfg);
    rep.emm_in_priors = rep.emm_certificate.has_value();
    rep.smm_certificate = priors_contain_supermartingale(priors, market, x, cfg);
    rep.smm_in_priors = rep.smm_certificate.has_value();

    rep.agreement = rep.detector_riskless == rep.emm_in_priors &&
                    rep.emm_in_priors == rep.smm_in_priors;
    return rep;
}

NoBettingSet no_betting_set(const PriorSet& priors,
                            const std::vector<std::vector<double>>& payoffs) {
    validate_priors(priors);
    const int states = priors.vertices.front().num_states();
    if (static_cast<int>(payoffs.size()) != states)
        raise(ErrorKind::DimensionMismatch, "payoff states do not match the prior length");
    if (payoffs.empty()) raise(ErrorKind::DimensionMismatch, "no payoff states");
    const std::size_t n_assets = payoffs.front().size();
    for (const auto& row : payoffs)
        if (row.size() != n_assets)
            raise(ErrorKind::DimensionMismatch, "payoff rows have mixed asset counts");

    NoBettingSet out;
    for (const auto& v : priors.vertices) {
        std::vector<double> point(n_assets, 0.0);
        for (int l = 0; l < states; ++l)
            for (std::size_t a = 0; a < n_assets; ++a) point[a] += v.weights[l] * payoffs[l][a];
        out.points.push_back(std::move(point));
    }
    if (n_assets == 1) {
        double lo = out.points.front()[0], hi = lo;
        for (const auto& point : out.points) {
            lo = std::min(lo, point[0]);
            hi = std::max(hi, point[0]);
        }
        out.interval = {lo, hi};
    }
    return out;
}

std::pair<double, double> dow_werlang_interval(double pi, double pi_prime, double high,
                                               double low) {
    if (!(pi >= 0.0 && pi <= 1.0) || !(pi_prime >= 0.0 && pi_prime <= 1.0))
        raise(ErrorKind::DomainError, "capacities must lie in [0, 1]");
    if (!(high > low)) raise(ErrorKind::DomainError, "requires H > L");
    if (pi + pi_prime > 1.0)
        raise(ErrorKind::EmptyCore, "pi + pi' > 1 leaves no additive core");
    return {pi * high + (1.0 - pi) * low, (1.0 - pi_prime) * high + pi_prime * low};
}

TrialInstance generate_instance(std::uint64_t seed, std::uint64_t trial,
                                const VerificationCaps& caps) {
    Gen gen(seed, trial);
    TrialInstance inst;
    inst.trial = trial;

    const int assets = gen.integer(1, std::max(1, caps.max_assets));
    const int depth = caps.max_depth >= 2 && gen.coin() ? 2 : 1;

    // tree shape
    std::vector<int> leaves_per_child;  // depth 2 only
    int total_leaves = 0;
    if (depth == 1) {
        total_leaves = gen.integer(2, std::max(2, caps.max_leaves));
    } else {
        const int k1 = gen.integer(2, std::min(3, caps.max_leaves / 2));
        leaves_per_child.assign(k1, 1);
        total_leaves = k1;
        while (total_leaves < caps.max_leaves && gen.coin()) {
            ++leaves_per_child[gen.integer(0, k1 - 1)];
            ++total_leaves;
        }
    }

    // interior reference measure; prices are its conditional expectations, so
    // the market is arbitrage-free by construction
    const std::vector<double> mu = gen.simplex_interior(total_leaves, 0.04);
    std::vector<std::vector<double>> leaf_prices(total_leaves, std::vector<double>(assets));
    for (auto& row : leaf_prices)
        for (double& p : row) p = gen.uniform(0.2, 2.5);

    MarketSpec spec;
    spec.steps = depth;
    spec.assets = assets;
    if (depth == 1) {
        std::vector<double> root(assets, 0.0);
        for (int l = 0; l < total_leaves; ++l)
            for (int a = 0; a < assets; ++a) root[a] += mu[l] * leaf_prices[l][a];
        spec.nodes.push_back({0, -1, root});
        for (int l = 0; l < total_leaves; ++l) spec.nodes.push_back({l + 1, 0, leaf_prices[l]});
    } else {
        const int k1 = static_cast<int>(leaves_per_child.size());
        // id 0 = root, 1..k1 = mid nodes, then leaves
        std::vector<std::vector<double>> mid(k1, std::vector<double>(assets, 0.0));
        std::vector<double> mid_mass(k1, 0.0);
        std::vector<double> root(assets, 0.0);
        int leaf_at = 0;
        for (int c = 0; c < k1; ++c) {
            for (int j = 0; j < leaves_per_child[c]; ++j, ++leaf_at) {
                mid_mass[c] += mu[leaf_at];
                for (int a = 0; a < assets; ++a) mid[c][a] += mu[leaf_at] * leaf_prices[leaf_at][a];
            }
        }
        for (int c = 0; c < k1; ++c) {
            for (int a = 0; a < assets; ++a) {
                mid[c][a] /= mid_mass[c];
                root[a] += mid_mass[c] * mid[c][a];
            }
        }
        spec.nodes.push_back({0, -1, root});
        for (int c = 0; c < k1; ++c) spec.nodes.push_back({1 + c, 0, mid[c]});
        int id = 1 + k1;
        leaf_at = 0;
        for (int c = 0; c < k1; ++c)
            for (int j = 0; j < leaves_per_child[c]; ++j, ++leaf_at)
                spec.nodes.push_back({id++, 1 + c, leaf_prices[leaf_at]});
    }

    inst.market = spec;
    inst.utility = random_utility(gen);
    inst.x = gen.uniform(0.5, 2.0);

    const FiniteMarket market = build_market(spec);
    const MartingaleConstraints mc = martingale_constraints(market);
    const int m = caps.singleton_priors ? 1 : gen.integer(1, std::max(1, caps.max_vertices));

    bool plant_emm = gen.coin();
    // pick the betting direction with the widest coefficient spread; if all
    // rows vanish the market is degenerate and only the riskless branch exists
    int best_row = -1;
    double best_spread = 1e-9;
    for (std::size_t r = 0; r < mc.rows.size(); ++r) {
        const auto [lo, hi] = std::minmax_element(mc.rows[r].begin(), mc.rows[r].end());
        if (*hi - *lo > best_spread) {
            best_spread = *hi - *lo;
            best_row = static_cast<int>(r);
        }
    }
    if (best_row < 0) plant_emm = true;

    std::vector<std::vector<double>> vertices;
    if (plant_emm) {
        // vertex cloud recentered on mu, shrunk toward mu to keep a floor
        for (int v = 0; v < m; ++v) vertices.push_back(gen.simplex_interior(total_leaves, 0.03));
        std::vector<double> mean(total_leaves, 0.0);
        for (const auto& v : vertices)
            for (int l = 0; l < total_leaves; ++l) mean[l] += v[l] / m;
        double theta = 1.0;
        for (const auto& v : vertices)
            for (int l = 0; l < total_leaves; ++l) {
                const double shifted = v[l] + mu[l] - mean[l];
                if (shifted < 0.02)
                    theta = std::min(theta, (mu[l] - 0.02) / std::max(mu[l] - shifted, 1e-12));
            }
        for (auto& v : vertices)
            for (int l = 0; l < total_leaves; ++l)
                v[l] = mu[l] + theta * (v[l] + mu[l] - mean[l] - mu[l]);
    } else {
        const auto& w = mc.rows[best_row];
        const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
        const double sign = (*hi_it >= -*lo_it) ? 1.0 : -1.0;
        const double peak = std::max(*hi_it, -*lo_it);
        const double margin = gen.uniform(0.05, 0.25) * peak;
        const int target =
            static_cast<int>((sign > 0 ? hi_it : lo_it) - w.begin());
        for (int v = 0; v < m; ++v) {
            std::vector<double> cand;
            bool ok = false;
            for (int attempt = 0; attempt < 300 && !ok; ++attempt) {
                cand = gen.simplex_interior(total_leaves, 0.03);
                double phi = 0.0;
                for (int l = 0; l < total_leaves; ++l) phi += w[l] * cand[l];
                ok = sign * phi >= margin;
            }
            if (!ok) {
                // push mass onto the extreme state
                cand = gen.simplex_interior(total_leaves, 0.02);
                for (int l = 0; l < total_leaves; ++l)
                    cand[l] = 0.15 * cand[l] + (l == target ? 0.85 : 0.0);
            }
            vertices.push_back(cand);
        }
    }
    for (auto& v : vertices) {
        double sum = 0.0;
        for (double z : v) sum += z;
        for (double& z : v) z /= sum;
        inst.priors.vertices.push_back(MeasureVector{v});
    }
    return inst;
}

VerificationSummary randomized_verification(std::uint64_t seed, int trials,
                                            const VerificationCaps& caps,
                                            const SolverConfig& cfg) {
    if (trials < 0) raise(ErrorKind::DomainError, "negative trial count");
    VerificationSummary summary;
    summary.trials = trials;
    for (int k = 0; k < trials; ++k) {
        const TrialInstance inst = generate_instance(seed, static_cast<std::uint64_t>(k), caps);
        const FiniteMarket market = build_market(inst.market);
        const VerificationReport rep = theorem_check(market, inst.priors, inst.utility, inst.x,
                                                     cfg, "trial-" + std::to_string(k));
        if (rep.agreement) {
            ++summary.agreements;
        } else {
            summary.disagreeing_instances.push_back(inst);
            summary.disagreeing_reports.push_back(rep);
        }
    }
    summary.agreement_rate =
        trials == 0 ? 1.0 : static_cast<double>(summary.agreements) / trials;
    return summary;
}

}  // namespace robustfolio
