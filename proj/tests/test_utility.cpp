#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "robustfolio/utility.hpp"

using namespace robustfolio;

namespace {

// Independent conjugate: maximize U(x) - y x over x > 0 by bracketed golden
// section on a wide log bracket. Never touches the closed-form V.
double conjugate_by_search(const UtilityFunction& u, double y) {
    double lo = 1e-18, hi = 1e18;
    auto f = [&](double x) { return evaluate(u, x) - y * x; };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    // search over log x for scale robustness
    double a = std::log(lo), b = std::log(hi);
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    for (int i = 0; i < 300; ++i) {
        if (f1 >= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(std::exp(x1));
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(std::exp(x2));
        }
    }
    return f(std::exp(0.5 * (a + b)));
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
        xs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return xs;
}

}  // namespace

TEST_CASE("family construction guards") {
    CHECK_THROWS_AS(UtilityFunction::power(1.0), Error);
    CHECK_THROWS_AS(UtilityFunction::power(1.5), Error);
    CHECK_THROWS_AS(UtilityFunction::power(0.0), Error);
    CHECK(UtilityFunction::power(-3.0).alpha == -3.0);
}

TEST_CASE("evaluate") {
    const auto half = UtilityFunction::power(0.5);
    CHECK(evaluate(half, 4.0) == doctest::Approx(4.0));  // (1/0.5) * 2
    CHECK(evaluate(UtilityFunction::log(), 1.0) == 0.0);
    CHECK(evaluate(half, 0.0) == 0.0);
    CHECK(evaluate(UtilityFunction::log(), 0.0) == -std::numeric_limits<double>::infinity());
    CHECK(evaluate(UtilityFunction::power(-1.0), 0.0) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(evaluate(half, -1.0), Error);
}

TEST_CASE("marginal and inverse marginal") {
    const auto half = UtilityFunction::power(0.5);
    CHECK(marginal(half, 4.0) == doctest::Approx(0.5));
    CHECK(inverse_marginal(half, 0.5) == doctest::Approx(4.0));
    CHECK(inverse_marginal(half, marginal(half, 9.0)) == doctest::Approx(9.0).epsilon(1e-12));

    const auto lg = UtilityFunction::log();
    CHECK(marginal(lg, 3.0) == doctest::Approx(1.0 / 3.0));
    CHECK(inverse_marginal(lg, marginal(lg, 3.0)) == doctest::Approx(3.0).epsilon(1e-12));

    const auto inv = UtilityFunction::power(-1.0);
    CHECK(marginal(inv, 2.0) == doctest::Approx(0.25));
    CHECK(inverse_marginal(inv, marginal(inv, 2.0)) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(marginal(half, 0.0), Error);
    CHECK_THROWS_AS(inverse_marginal(half, -1.0), Error);
}

TEST_CASE("conjugate closed forms match the search oracle") {
    const auto half = UtilityFunction::power(0.5);  // nu = -1, V(y) = 1/y
    CHECK(conjugate(half, 2.0) == doctest::Approx(0.5));
    CHECK(conjugate_exponent(half) == doctest::Approx(-1.0));

    const auto lg = UtilityFunction::log();
    CHECK(conjugate(lg, 1.0) == doctest::Approx(-1.0));

    const auto inv = UtilityFunction::power(-1.0);  // nu = 0.5, V(y) = -2 sqrt(y)
    CHECK(conjugate(inv, 4.0) == doctest::Approx(-4.0));
    CHECK(conjugate_exponent(inv) == doctest::Approx(0.5));

    for (const auto& u : {half, lg, inv, UtilityFunction::power(0.3), UtilityFunction::power(0.9)}) {
        for (double y : {0.05, 0.3, 1.0, 2.5, 17.0}) {
            const double closed = conjugate(u, y);
            const double searched = conjugate_by_search(u, y);
            CHECK(closed == doctest::Approx(searched).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(conjugate(half, 0.0), Error);
    CHECK_THROWS_AS(conjugate(half, -2.0), Error);
}

TEST_CASE("validate_assumptions") {
    const auto r1 = validate_assumptions(UtilityFunction::power(0.5));
    CHECK(r1.ae_value == doctest::Approx(0.5));
    CHECK(r1.ae_pass);
    CHECK(r1.assumptions_hold);
    CHECK(r1.concavity_pass);
    CHECK(r1.inada_small_pass);
    CHECK(r1.inada_large_pass);

    const auto r2 = validate_assumptions(UtilityFunction::log());
    CHECK(r2.ae_value == doctest::Approx(0.0));
    CHECK(r2.assumptions_hold);
    CHECK(r2.inada_small_pass);
    CHECK(r2.inada_large_pass);

    const auto r3 = validate_assumptions(UtilityFunction::power(0.99));
    CHECK(r3.ae_value == doctest::Approx(0.99));
    CHECK(r3.ae_pass);
    CHECK(r3.assumptions_hold);

    const auto r4 = validate_assumptions(UtilityFunction::power(-1.0));
    CHECK(r4.ae_value == doctest::Approx(-1.0));
    CHECK(r4.assumptions_hold);
}

TEST_CASE("custom utility hook validates numerically") {
    // A disguised log family goes through the numeric path.
    auto u = UtilityFunction::custom(
        [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; },
        [](double y) { return 1.0 / y; }, [](double y) { return -std::log(y) - 1.0; });
    const auto rep = validate_assumptions(u);
    CHECK(rep.ae_pass);
    CHECK(rep.concavity_pass);
    CHECK(rep.assumptions_hold);
    CHECK(evaluate(u, 2.0) == doctest::Approx(std::log(2.0)));

    // A convex "utility" must fail.
    auto bad = UtilityFunction::custom(
        [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
        [](double y) { return y / 2.0; }, [](double) { return 0.0; });
    CHECK_FALSE(validate_assumptions(bad).assumptions_hold);
}

TEST_CASE("Fenchel-Young inequality with equality on the marginal curve") {
    for (const auto& u : {UtilityFunction::power(0.5), UtilityFunction::log(),
                          UtilityFunction::power(-1.0), UtilityFunction::power(0.3)}) {
        for (double x : log_grid(1e-2, 1e2, 25)) {
            for (double y : log_grid(1e-2, 1e2, 25)) {
                const double lhs = evaluate(u, x);
                const double rhs = conjugate(u, y) + x * y;
                const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
                CHECK(lhs <= rhs + 1e-10 * scale);
            }
            const double y_star = marginal(u, x);
            const double residual = conjugate(u, y_star) + x * y_star - evaluate(u, x);
            const double scale = std::max(1.0, std::abs(evaluate(u, x)));
            CHECK(std::abs(residual) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("conjugate is strictly convex and V' = -I on grids") {
    for (const auto& u : {UtilityFunction::power(0.5), UtilityFunction::log(),
                          UtilityFunction::power(-1.0)}) {
        const auto ys = log_grid(1e-2, 1e2, 60);
        for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
            const double left = (conjugate(u, ys[i]) - conjugate(u, ys[i - 1])) / (ys[i] - ys[i - 1]);
            const double right =
                (conjugate(u, ys[i + 1]) - conjugate(u, ys[i])) / (ys[i + 1] - ys[i]);
            CHECK(right > left);  // increasing slopes = strict convexity
        }
        for (double y : log_grid(1e-1, 10.0, 17)) {
            const double h = 1e-5 * y;
            const double dv = (conjugate(u, y + h) - conjugate(u, y - h)) / (2.0 * h);
            CHECK(dv == doctest::Approx(-inverse_marginal(u, y)).epsilon(1e-8));
        }
    }
}
