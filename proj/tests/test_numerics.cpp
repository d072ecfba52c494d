#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "robustfolio/numerics.hpp"

using namespace robustfolio;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("solve_lp basics") {
    SUBCASE("max x subject to x <= 1") {
        LinearProgram lp;
        lp.objective = {1.0};
        lp.ineq_matrix = {{1.0}};
        lp.ineq_rhs = {1.0};
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        CHECK(res.solution[0] == doctest::Approx(1.0));
        CHECK(res.objective == doctest::Approx(1.0));
    }
    SUBCASE("max x with x >= 0 only is unbounded") {
        LinearProgram lp;
        lp.objective = {1.0};
        CHECK(solve_lp(lp).status == LPStatus::unbounded);
    }
    SUBCASE("infeasible bounds") {
        LinearProgram lp;
        lp.objective = {1.0};
        lp.ineq_matrix = {{1.0}};
        lp.ineq_rhs = {-1.0};  // x <= -1 with x >= 0
        CHECK(solve_lp(lp).status == LPStatus::infeasible);
    }
    SUBCASE("EMM slack LP") {
        // max delta s.t. q1 - q2 = 0, q1 + q2 = 1, q >= delta
        LinearProgram lp;
        lp.objective = {0.0, 0.0, 1.0};
        lp.eq_matrix = {{1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}};
        lp.eq_rhs = {0.0, 1.0};
        lp.ineq_matrix = {{-1.0, 0.0, 1.0}, {0.0, -1.0, 1.0}};
        lp.ineq_rhs = {0.0, 0.0};
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        CHECK(res.objective == doctest::Approx(0.5));
        CHECK(res.solution[0] == doctest::Approx(0.5));
        CHECK(res.solution[1] == doctest::Approx(0.5));
    }
    SUBCASE("free variables") {
        // max -|shift|: minimize x^2 is not linear, so instead check a free
        // variable can go negative: max -x with x free, x >= -3 via row.
        LinearProgram lp;
        lp.objective = {-1.0};
        lp.lower = {-kInf};
        lp.ineq_matrix = {{-1.0}};
        lp.ineq_rhs = {3.0};  // -x <= 3  =>  x >= -3
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        CHECK(res.solution[0] == doctest::Approx(-3.0));
    }
    SUBCASE("upper bounds and shifted lower bounds") {
        LinearProgram lp;
        lp.objective = {1.0, 1.0};
        lp.lower = {0.5, 1.0};
        lp.upper = {2.0, 1.5};
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        CHECK(res.solution[0] == doctest::Approx(2.0));
        CHECK(res.solution[1] == doctest::Approx(1.5));
    }
    SUBCASE("degenerate vertices terminate under Bland") {
        // Beale's cycling example (cycles under most-negative-cost pivoting).
        LinearProgram lp;
        lp.objective = {0.75, -150.0, 0.02, -6.0};
        lp.ineq_matrix = {{0.25, -60.0, -1.0 / 25.0, 9.0},
                          {0.5, -90.0, -1.0 / 50.0, 3.0},
                          {0.0, 0.0, 1.0, 0.0}};
        lp.ineq_rhs = {0.0, 0.0, 1.0};
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        CHECK(res.objective == doctest::Approx(0.05));
    }
}

TEST_CASE("solve_lp solutions satisfy their constraints") {
    std::mt19937_64 eng(123);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 4);
        const int m = 1 + static_cast<int>(eng() % 3);
        LinearProgram lp;
        lp.objective.resize(n);
        for (double& c : lp.objective) c = coef(eng);
        lp.ineq_matrix.assign(m, std::vector<double>(n));
        lp.ineq_rhs.assign(m, 0.0);
        for (int r = 0; r < m; ++r) {
            for (double& a : lp.ineq_matrix[r]) a = std::abs(coef(eng));
            lp.ineq_rhs[r] = pos(eng);
        }
        lp.upper.assign(n, 5.0);  // keep everything bounded
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        for (int r = 0; r < m; ++r) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) lhs += lp.ineq_matrix[r][j] * res.solution[j];
            CHECK(lhs <= lp.ineq_rhs[r] + 1e-7);
        }
        for (int j = 0; j < n; ++j) {
            CHECK(res.solution[j] >= -1e-9);
            CHECK(res.solution[j] <= 5.0 + 1e-9);
        }
    }
}

TEST_CASE("weak duality on constructed instances") {
    // max c.x s.t. Ax <= b, x >= 0; any y >= 0 with A^T y >= c gives the
    // bound c.x* <= b.y. Build instances where y is dual feasible by design.
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> unit(0.1, 1.5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 3);
        const int m = 2 + static_cast<int>(eng() % 3);
        std::vector<std::vector<double>> A(m, std::vector<double>(n));
        std::vector<double> b(m), y(m);
        for (int r = 0; r < m; ++r) {
            for (double& a : A[r]) a = unit(eng);
            b[r] = unit(eng);
            y[r] = unit(eng);
        }
        LinearProgram lp;
        lp.objective.assign(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double aty = 0.0;
            for (int r = 0; r < m; ++r) aty += A[r][j] * y[r];
            lp.objective[j] = aty - 0.05;  // strictly dual feasible
        }
        lp.ineq_matrix = A;
        lp.ineq_rhs = b;
        const auto res = solve_lp(lp);
        REQUIRE(res.status == LPStatus::optimal);
        double by = 0.0;
        for (int r = 0; r < m; ++r) by += b[r] * y[r];
        CHECK(res.objective <= by + 1e-9);
    }
}

namespace {

// LMO of the probability simplex: all mass on the smallest gradient entry.
std::vector<double> simplex_lmo(const std::vector<double>& grad) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grad.size(); ++i)
        if (grad[i] < grad[best]) best = i;
    std::vector<double> v(grad.size(), 0.0);
    v[best] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("frank_wolfe") {
    SUBCASE("projects onto an interior point of the simplex") {
        const std::vector<double> c = {0.5, 0.3, 0.2};
        auto value = [&](const std::vector<double>& q) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - c[i]) * (q[i] - c[i]);
            return s;
        };
        auto grad = [&](const std::vector<double>& q) {
            std::vector<double> g(q.size());
            for (std::size_t i = 0; i < q.size(); ++i) g[i] = 2.0 * (q[i] - c[i]);
            return g;
        };
        SolverConfig cfg;
        cfg.tolerance = 1e-10;
        const auto res = frank_wolfe(value, grad, simplex_lmo, {1.0 / 3, 1.0 / 3, 1.0 / 3}, cfg);
        for (std::size_t i = 0; i < c.size(); ++i)
            CHECK(res.point[i] == doctest::Approx(c[i]).epsilon(1e-6));
        CHECK(res.converged);
    }
    SUBCASE("linear objective needs a single oracle call") {
        auto value = [](const std::vector<double>& q) { return q[0] + 2.0 * q[1] + 3.0 * q[2]; };
        auto grad = [](const std::vector<double>&) { return std::vector<double>{1.0, 2.0, 3.0}; };
        const auto res = frank_wolfe(value, grad, simplex_lmo, {0.0, 0.0, 1.0});
        CHECK(res.point[0] == doctest::Approx(1.0));
        CHECK(res.gap <= 1e-12);
        CHECK(res.converged);
    }
    SUBCASE("singleton feasible set converges immediately") {
        const std::vector<double> only = {0.25, 0.5, 0.25};
        auto value = [](const std::vector<double>& q) { return q[0] * q[0] + q[1]; };
        auto grad = [](const std::vector<double>& q) {
            return std::vector<double>{2.0 * q[0], 1.0, 0.0};
        };
        auto lmo = [&](const std::vector<double>&) { return only; };
        const auto res = frank_wolfe(value, grad, lmo, only);
        CHECK(res.converged);
        CHECK(res.iterations == 1);
    }
    SUBCASE("gap trace is nonnegative and non-increasing") {
        const std::vector<double> c = {0.7, 0.1, 0.2};
        auto value = [&](const std::vector<double>& q) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - c[i]) * (q[i] - c[i]);
            return s;
        };
        auto grad = [&](const std::vector<double>& q) {
            std::vector<double> g(q.size());
            for (std::size_t i = 0; i < q.size(); ++i) g[i] = 2.0 * (q[i] - c[i]);
            return g;
        };
        const auto res = frank_wolfe(value, grad, simplex_lmo, {1.0, 0.0, 0.0});
        for (std::size_t i = 0; i < res.gap_trace.size(); ++i) {
            CHECK(res.gap_trace[i] >= 0.0);
            if (i > 0) CHECK(res.gap_trace[i] <= res.gap_trace[i - 1] + 1e-15);
        }
    }
}

TEST_CASE("supergradient_minimax") {
    auto feasible = [](const std::vector<double>& h) { return std::abs(h[0]) < 1.0; };

    SUBCASE("smooth single piece attains the closed-form optimum") {
        // f(H) = 0.6 ln(1+H) + 0.4 ln(1-H); FOC at H = 0.2.
        ConcavePiece piece{
            [](const std::vector<double>& h) {
                return 0.6 * std::log(1.0 + h[0]) + 0.4 * std::log(1.0 - h[0]);
            },
            [](const std::vector<double>& h) {
                return std::vector<double>{0.6 / (1.0 + h[0]) - 0.4 / (1.0 - h[0])};
            }};
        const double expected_value = 0.6 * std::log(1.2) + 0.4 * std::log(0.8);
        const auto res = supergradient_minimax({piece}, feasible, {0.0});
        CHECK(res.point[0] == doctest::Approx(0.2).epsilon(1e-3));
        CHECK(res.value == doctest::Approx(expected_value).epsilon(1e-7));
    }
    SUBCASE("symmetric pair pins the minimax at zero") {
        ConcavePiece up{[](const std::vector<double>& h) {
                            return 0.6 * std::log(1.0 + h[0]) + 0.4 * std::log(1.0 - h[0]);
                        },
                        [](const std::vector<double>& h) {
                            return std::vector<double>{0.6 / (1.0 + h[0]) - 0.4 / (1.0 - h[0])};
                        }};
        ConcavePiece down{[](const std::vector<double>& h) {
                              return 0.6 * std::log(1.0 - h[0]) + 0.4 * std::log(1.0 + h[0]);
                          },
                          [](const std::vector<double>& h) {
                              return std::vector<double>{-0.6 / (1.0 - h[0]) + 0.4 / (1.0 + h[0])};
                          }};
        const auto res = supergradient_minimax({up, down}, feasible, {0.3});
        CHECK(std::abs(res.point[0]) < 2e-3);
        CHECK(res.value == doctest::Approx(0.0).epsilon(1e-4));
    }
    SUBCASE("negative quadratic") {
        ConcavePiece piece{[](const std::vector<double>& h) { return -h[0] * h[0]; },
                           [](const std::vector<double>& h) {
                               return std::vector<double>{-2.0 * h[0]};
                           }};
        const auto res = supergradient_minimax({piece}, feasible, {0.9});
        CHECK(std::abs(res.point[0]) < 1e-3);
        CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("infeasible start throws") {
        ConcavePiece piece{[](const std::vector<double>& h) { return -h[0]; },
                           [](const std::vector<double>&) {
                               return std::vector<double>{-1.0};
                           }};
        CHECK_THROWS_AS(supergradient_minimax({piece}, feasible, {2.0}), Error);
    }
}

TEST_CASE("minimize_scalar_convex") {
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    SUBCASE("stationary interior point") {
        const auto res = minimize_scalar_convex([](double y) { return -std::log(y) + y; }, 0.1,
                                                10.0, cfg);
        CHECK(res.x == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(res.value == doctest::Approx(1.0));
    }
    SUBCASE("quadratic") {
        const auto res =
            minimize_scalar_convex([](double y) { return (y - 2.0) * (y - 2.0); }, -5.0, 8.0, cfg);
        CHECK(res.x == doctest::Approx(2.0).epsilon(1e-7));
    }
    SUBCASE("boundary minimum") {
        const auto res = minimize_scalar_convex([](double y) { return y; }, 1.0, 2.0, cfg);
        CHECK(res.x == doctest::Approx(1.0));
        CHECK(res.value == doctest::Approx(1.0));
    }
    SUBCASE("concave hill is rejected") {
        CHECK_THROWS_AS(
            minimize_scalar_convex([](double y) { return -(y - 1.5) * (y - 1.5); }, 1.0, 2.0, cfg),
            Error);
    }
}
