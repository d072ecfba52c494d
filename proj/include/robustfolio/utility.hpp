#pragma once

#include <functional>
#include <string>

#include "robustfolio/errors.hpp"

namespace robustfolio {

enum class UtilityFamily { power, log, custom };

// Utility on (0, inf): strictly increasing, strictly concave, Inada at both
// ends, asymptotic elasticity below one. Two closed-form families plus a
// callable hook for experiments.
struct UtilityFunction {
    UtilityFamily family = UtilityFamily::log;
    double alpha = 0.0;  // power family only, alpha < 1, alpha != 0

    std::function<double(double)> custom_value;
    std::function<double(double)> custom_marginal;
    std::function<double(double)> custom_inverse_marginal;
    std::function<double(double)> custom_conjugate;

    static UtilityFunction power(double alpha);
    static UtilityFunction log();
    static UtilityFunction custom(std::function<double(double)> value,
                                  std::function<double(double)> marginal,
                                  std::function<double(double)> inverse_marginal,
                                  std::function<double(double)> conjugate);
};

// alpha / (alpha - 1); only defined for the power family.
double conjugate_exponent(const UtilityFunction& u);

// U(x). Accepts x = 0 at the domain boundary: 0 for power with alpha > 0,
// -inf for log and for power with alpha < 0.
double evaluate(const UtilityFunction& u, double x);

// U'(x), x > 0.
double marginal(const UtilityFunction& u, double x);

// I(y) = (U')^{-1}(y), y > 0.
double inverse_marginal(const UtilityFunction& u, double y);

// V(y) = sup_{x>0} { U(x) - y x }, y > 0.
double conjugate(const UtilityFunction& u, double y);

struct ValidationReport {
    double ae_value = 0.0;       // limsup x U'(x)/U(x)
    bool ae_pass = false;        // AE < 1
    bool inada_small_pass = false;  // U'(1e-8) > 1e3
    bool inada_large_pass = false;  // U'(1e8) < 1e-3
    bool concavity_pass = false;    // second divided differences < 0 on a log grid
    // Gate used by the solvers. Analytic for the closed-form families (both
    // satisfy Inada exactly, so only AE < 1 matters); numeric for custom.
    bool assumptions_hold = false;
};

ValidationReport validate_assumptions(const UtilityFunction& u);

std::string family_name(UtilityFamily family);

}  // namespace robustfolio
