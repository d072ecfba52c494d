#include "robustfolio/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustfolio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotEps = 1e-11;

// Simplex tableau in canonical minimization form. Row 0 holds reduced costs,
// column 0 of `rhs` the objective value (negated).
struct Tableau {
    int rows = 0;  // constraint rows
    int cols = 0;  // structural columns
    std::vector<std::vector<double>> a;  // rows x cols
    std::vector<double> rhs;             // rows
    std::vector<double> cost;            // reduced costs, cols
    double obj_shift = 0.0;
    std::vector<int> basis;  // column basic in each row

    void pivot(int row, int col) {
        const double piv = a[row][col];
        for (int j = 0; j < cols; ++j) a[row][j] /= piv;
        rhs[row] /= piv;
        for (int r = 0; r < rows; ++r) {
            if (r == row) continue;
            const double factor = a[r][col];
            if (factor == 0.0) continue;
            for (int j = 0; j < cols; ++j) a[r][j] -= factor * a[row][j];
            rhs[r] -= factor * rhs[row];
            a[r][col] = 0.0;
        }
        const double cfac = cost[col];
        if (cfac != 0.0) {
            for (int j = 0; j < cols; ++j) cost[j] -= cfac * a[row][j];
            obj_shift -= cfac * rhs[row];
            cost[col] = 0.0;
        }
        basis[row] = col;
    }

    // Bland: entering = lowest-index column with negative reduced cost,
    // leaving = ratio test with lowest basic column as tie break.
    // Returns optimal / unbounded / cap.
    enum class Step { optimal, unbounded, pivoted };
    Step step(const std::vector<bool>& allowed, double tol) {
        int enter = -1;
        for (int j = 0; j < cols; ++j) {
            if (!allowed[j]) continue;
            if (cost[j] < -tol) {
                enter = j;
                break;
            }
        }
        if (enter == -1) return Step::optimal;
        int leave = -1;
        double best_ratio = kInf;
        for (int r = 0; r < rows; ++r) {
            if (a[r][enter] > kPivotEps) {
                const double ratio = rhs[r] / a[r][enter];
                if (ratio < best_ratio - kPivotEps ||
                    (ratio < best_ratio + kPivotEps && (leave == -1 || basis[r] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
        }
        if (leave == -1) return Step::unbounded;
        pivot(leave, enter);
        return Step::pivoted;
    }
};

struct VarMap {
    int col_pos = -1;
    int col_neg = -1;  // set when the variable is free below
    double shift = 0.0;
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp, const SolverConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(lp.num_vars());
    const auto dims_ok = [&](const std::vector<std::vector<double>>& m, const std::vector<double>& b) {
        if (m.size() != b.size()) return false;
        for (const auto& row : m)
            if (static_cast<int>(row.size()) != n) return false;
        return true;
    };
    if (!dims_ok(lp.eq_matrix, lp.eq_rhs) || !dims_ok(lp.ineq_matrix, lp.ineq_rhs))
        raise(ErrorKind::DimensionMismatch, "LP matrix and rhs sizes disagree");
    if (!lp.lower.empty() && static_cast<int>(lp.lower.size()) != n)
        raise(ErrorKind::DimensionMismatch, "LP lower bound size");
    if (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != n)
        raise(ErrorKind::DimensionMismatch, "LP upper bound size");
    auto finite_rows = [](const std::vector<std::vector<double>>& m) {
        for (const auto& row : m)
            for (double v : row)
                if (!std::isfinite(v)) return false;
        return true;
    };
    if (!finite_rows(lp.eq_matrix) || !finite_rows(lp.ineq_matrix))
        raise(ErrorKind::DomainError, "non-finite LP entry");
    for (double v : lp.objective)
        if (!std::isfinite(v)) raise(ErrorKind::DomainError, "non-finite LP objective entry");

    // Shift every bounded-below variable to zero; split free ones.
    std::vector<VarMap> vmap(n);
    int cols = 0;
    for (int j = 0; j < n; ++j) {
        const double lb = lp.lower.empty() ? 0.0 : lp.lower[j];
        if (lb == -kInf) {
            vmap[j].col_pos = cols++;
            vmap[j].col_neg = cols++;
        } else {
            vmap[j].col_pos = cols++;
            vmap[j].shift = lb;
        }
    }

    struct Row {
        std::vector<double> coef;
        double rhs = 0.0;
        bool equality = false;
    };
    std::vector<Row> rows;
    auto add_row = [&](const std::vector<double>& coef_x, double rhs_x, bool equality) {
        Row row;
        row.coef.assign(cols, 0.0);
        row.rhs = rhs_x;
        row.equality = equality;
        for (int j = 0; j < n; ++j) {
            const double c = coef_x[j];
            if (c == 0.0) continue;
            row.coef[vmap[j].col_pos] += c;
            if (vmap[j].col_neg >= 0) row.coef[vmap[j].col_neg] -= c;
            row.rhs -= c * vmap[j].shift;
        }
        rows.push_back(std::move(row));
    };
    for (std::size_t r = 0; r < lp.eq_matrix.size(); ++r) add_row(lp.eq_matrix[r], lp.eq_rhs[r], true);
    for (std::size_t r = 0; r < lp.ineq_matrix.size(); ++r) add_row(lp.ineq_matrix[r], lp.ineq_rhs[r], false);
    if (!lp.upper.empty()) {
        for (int j = 0; j < n; ++j) {
            if (lp.upper[j] == kInf) continue;
            std::vector<double> coef(n, 0.0);
            coef[j] = 1.0;
            add_row(coef, lp.upper[j], false);
        }
    }

    const int m = static_cast<int>(rows.size());
    int slack = 0;
    for (const auto& row : rows)
        if (!row.equality) ++slack;

    Tableau t;
    t.rows = m;
    t.cols = cols + slack + m;  // structural + slack + artificial
    t.a.assign(m, std::vector<double>(t.cols, 0.0));
    t.rhs.assign(m, 0.0);
    t.basis.assign(m, -1);
    int next_slack = cols;
    for (int r = 0; r < m; ++r) {
        for (int j = 0; j < cols; ++j) t.a[r][j] = rows[r].coef[j];
        t.rhs[r] = rows[r].rhs;
        if (!rows[r].equality) t.a[r][next_slack++] = 1.0;
        if (t.rhs[r] < 0.0) {
            for (int j = 0; j < t.cols; ++j) t.a[r][j] = -t.a[r][j];
            t.rhs[r] = -t.rhs[r];
        }
        const int art = cols + slack + r;
        t.a[r][art] = 1.0;
        t.basis[r] = art;
    }

    const int iter_cap = std::max(cfg.max_iterations, 50 * (t.cols + m));

    // Phase 1: minimize the sum of artificials.
    t.cost.assign(t.cols, 0.0);
    for (int r = 0; r < m; ++r) t.cost[cols + slack + r] = 1.0;
    t.obj_shift = 0.0;
    for (int r = 0; r < m; ++r) {  // canonicalize: eliminate basic columns
        for (int j = 0; j < t.cols; ++j) t.cost[j] -= t.a[r][j];
        t.obj_shift -= t.rhs[r];
    }
    std::vector<bool> allowed(t.cols, true);
    int iters = 0;
    while (true) {
        if (++iters > iter_cap) raise(ErrorKind::IterationCapExceeded, "simplex phase 1");
        const auto s = t.step(allowed, cfg.tolerance);
        if (s == Tableau::Step::optimal) break;
        if (s == Tableau::Step::unbounded)
            raise(ErrorKind::IterationCapExceeded, "phase 1 unbounded (numerical breakdown)");
    }
    double scale = 1.0;
    for (int r = 0; r < m; ++r) scale = std::max(scale, std::abs(t.rhs[r]));
    if (-t.obj_shift > 1e-8 * scale) {
        LPResult res;
        res.status = LPStatus::infeasible;
        return res;
    }

    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are redundant and harmless (their artificial stays at zero).
    for (int r = 0; r < m; ++r) {
        if (t.basis[r] < cols + slack) continue;
        int col = -1;
        for (int j = 0; j < cols + slack; ++j) {
            if (std::abs(t.a[r][j]) > 1e-9) {
                col = j;
                break;
            }
        }
        if (col >= 0) t.pivot(r, col);
    }
    for (int j = cols + slack; j < t.cols; ++j) allowed[j] = false;

    // Phase 2: minimize -objective in the transformed variables.
    t.cost.assign(t.cols, 0.0);
    t.obj_shift = 0.0;
    for (int j = 0; j < n; ++j) {
        const double c = -lp.objective[j];
        t.cost[vmap[j].col_pos] += c;
        if (vmap[j].col_neg >= 0) t.cost[vmap[j].col_neg] -= c;
        t.obj_shift += c * vmap[j].shift;
    }
    for (int r = 0; r < m; ++r) {
        const int b = t.basis[r];
        const double cb = t.cost[b];
        if (cb == 0.0) continue;
        for (int j = 0; j < t.cols; ++j) t.cost[j] -= cb * t.a[r][j];
        t.obj_shift -= cb * t.rhs[r];
        t.cost[b] = 0.0;
    }
    while (true) {
        if (++iters > iter_cap) raise(ErrorKind::IterationCapExceeded, "simplex phase 2");
        const auto s = t.step(allowed, cfg.tolerance);
        if (s == Tableau::Step::optimal) break;
        if (s == Tableau::Step::unbounded) {
            LPResult res;
            res.status = LPStatus::unbounded;
            return res;
        }
    }

    std::vector<double> z(t.cols, 0.0);
    for (int r = 0; r < m; ++r) z[t.basis[r]] = t.rhs[r];
    LPResult res;
    res.status = LPStatus::optimal;
    res.solution.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double v = vmap[j].shift + z[vmap[j].col_pos];
        if (vmap[j].col_neg >= 0) v -= z[vmap[j].col_neg];
        res.solution[j] = v;
    }
    res.objective = 0.0;
    for (int j = 0; j < n; ++j) res.objective += lp.objective[j] * res.solution[j];
    return res;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

FrankWolfeResult frank_wolfe(
    const std::function<double(const std::vector<double>&)>& value,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
    const std::function<std::vector<double>(const std::vector<double>&)>& linear_minimizer,
    std::vector<double> start, const SolverConfig& cfg) {
    cfg.validate();
    FrankWolfeResult out;
    out.point = std::move(start);
    out.value = value(out.point);
    if (!std::isfinite(out.value))
        raise(ErrorKind::InfeasibleStart, "Frank-Wolfe start has non-finite objective");
    out.gap = kInf;

    const std::size_t dim = out.point.size();
    for (int k = 0; k < cfg.max_iterations; ++k) {
        out.iterations = k + 1;
        const std::vector<double> g = gradient(out.point);
        const std::vector<double> s = linear_minimizer(g);
        std::vector<double> dir(dim);
        for (std::size_t i = 0; i < dim; ++i) dir[i] = s[i] - out.point[i];
        const double gap = -dot(g, dir);
        out.gap = std::min(out.gap, std::max(gap, 0.0));
        out.gap_trace.push_back(out.gap);
        if (out.gap <= cfg.tolerance) {
            out.converged = true;
            break;
        }

        // Exact line search on [0, gamma_hi]; back off from regions where the
        // objective is infinite (barrier at relative-boundary points).
        auto at = [&](double gamma) {
            std::vector<double> p(dim);
            for (std::size_t i = 0; i < dim; ++i) p[i] = out.point[i] + gamma * dir[i];
            return p;
        };
        auto finite_at = [&](double gamma) {
            const auto p = at(gamma);
            return std::isfinite(value(p)) && std::isfinite(dot(gradient(p), dir));
        };
        double gamma_hi = 1.0;
        for (int back = 0; back < 60 && !finite_at(gamma_hi); ++back) gamma_hi *= 0.5;
        double lo = 0.0, hi = gamma_hi;
        if (dot(gradient(at(gamma_hi)), dir) <= 0.0) {
            lo = hi = gamma_hi;
        } else {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (dot(gradient(at(mid)), dir) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
        }
        const double gamma = 0.5 * (lo + hi);
        if (gamma <= 0.0) break;
        out.point = at(gamma);
        out.value = value(out.point);
    }
    return out;
}

MinimaxResult supergradient_minimax(const std::vector<ConcavePiece>& pieces,
                                    const std::function<bool(const std::vector<double>&)>& feasible,
                                    std::vector<double> start, const SolverConfig& cfg) {
    cfg.validate();
    if (pieces.empty()) raise(ErrorKind::DomainError, "no objective pieces");
    if (!feasible(start)) raise(ErrorKind::InfeasibleStart, "supergradient start infeasible");

    const std::size_t dim = start.size();
    auto min_piece = [&](const std::vector<double>& h) {
        double best = kInf;
        int idx = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const double v = pieces[i].value(h);
            if (v < best) {
                best = v;
                idx = static_cast<int>(i);
            }
        }
        return std::pair<double, int>(best, idx);
    };

    std::vector<double> h = std::move(start);
    auto [best_value, active] = min_piece(h);
    std::vector<double> best_point = h;

    MinimaxResult out;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        out.iterations = k;
        const std::vector<double> g = pieces[active].gradient(h);
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm < 1e-15) break;

        const double step = cfg.step_a / (k + cfg.step_b);
        double t = 1.0;
        std::vector<double> next(dim);
        bool moved = false;
        for (int back = 0; back < 60; ++back) {
            for (std::size_t i = 0; i < dim; ++i) next[i] = h[i] + t * step * g[i];
            if (feasible(next)) {
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
        h = next;
        const auto [v, idx] = min_piece(h);
        active = idx;
        if (v > best_value) {
            best_value = v;
            best_point = h;
        }
    }
    out.point = std::move(best_point);
    out.value = best_value;
    return out;
}

ScalarMinResult minimize_scalar_convex(const std::function<double(double)>& f, double lo,
                                       double hi, const SolverConfig& cfg) {
    cfg.validate();
    if (!(lo < hi)) raise(ErrorKind::DomainError, "empty bracket");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    const double fa = f(a), fb = f(b);
    // A convex function cannot drop away from the bracket at both ends.
    if (f1 > fa && f2 > fb)
        raise(ErrorKind::BracketNotConvex, "function decreases outward at both bracket ends");

    const double eps = std::numeric_limits<double>::epsilon();
    while (b - a > cfg.tolerance * std::max(1.0, std::abs(a) + std::abs(b)) &&
           b - a > 8.0 * eps * (std::abs(a) + std::abs(b))) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    ScalarMinResult out;
    out.x = 0.5 * (a + b);
    out.value = f(out.x);
    // Boundary minima: golden section already contracts toward them, but the
    // original endpoints may still be the true minimizers.
    if (fa < out.value) {
        out.x = lo;
        out.value = fa;
    }
    if (fb < out.value) {
        out.x = hi;
        out.value = fb;
    }
    return out;
}

}  // namespace robustfolio
