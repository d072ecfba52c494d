#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "robustfolio/errors.hpp"

namespace robustfolio {

struct SolverConfig {
    double tolerance = 1e-9;
    int max_iterations = 10000;
    double step_a = 1.0;   // supergradient step a/(k+b)
    double step_b = 10.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(tolerance > 0.0)) raise(ErrorKind::DomainError, "tolerance must be positive");
        if (max_iterations < 1) raise(ErrorKind::DomainError, "max_iterations must be >= 1");
    }
};

// maximize objective . x
// subject to  eq_matrix x == eq_rhs
//             ineq_matrix x <= ineq_rhs
//             lower <= x <= upper   (defaults 0 and +inf; -inf lower = free)
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_matrix;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> ineq_matrix;
    std::vector<double> ineq_rhs;
    std::vector<double> lower;  // empty = all zero
    std::vector<double> upper;  // empty = all +inf

    std::size_t num_vars() const { return objective.size(); }
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPResult {
    LPStatus status = LPStatus::infeasible;
    std::vector<double> solution;
    double objective = 0.0;
};

// Dense two-phase simplex with Bland's rule (anti-cycling).
LPResult solve_lp(const LinearProgram& lp, const SolverConfig& cfg = {});

struct FrankWolfeResult {
    std::vector<double> point;
    double value = 0.0;
    double gap = 0.0;  // best duality gap seen; bounds value - optimum
    int iterations = 0;
    bool converged = false;
    std::vector<double> gap_trace;  // running minimum per iteration
};

// Conditional-gradient minimization of a convex objective over a polytope
// given through its linear minimization oracle. Exact line search keeps the
// objective monotone, so the smallest logged gap certifies the last iterate.
FrankWolfeResult frank_wolfe(
    const std::function<double(const std::vector<double>&)>& value,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
    const std::function<std::vector<double>(const std::vector<double>&)>& linear_minimizer,
    std::vector<double> start, const SolverConfig& cfg = {});

// One concave piece of a minimax objective.
struct ConcavePiece {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

struct MinimaxResult {
    std::vector<double> point;
    double value = 0.0;
    int iterations = 0;
};

// Maximizes min_i f_i over the region where `feasible` holds, by diminishing
// step supergradient ascent (step a/(k+b)) with interior backtracking and
// best-iterate tracking.
MinimaxResult supergradient_minimax(const std::vector<ConcavePiece>& pieces,
                                    const std::function<bool(const std::vector<double>&)>& feasible,
                                    std::vector<double> start, const SolverConfig& cfg = {});

struct ScalarMinResult {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section minimization of a convex function on [lo, hi].
ScalarMinResult minimize_scalar_convex(const std::function<double(double)>& f, double lo,
                                       double hi, const SolverConfig& cfg = {});

}  // namespace robustfolio
