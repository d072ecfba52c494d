#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustfolio/io.hpp"
#include "robustfolio/oracle.hpp"

namespace py = pybind11;
using robustfolio::io::json;

namespace {

json to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (const auto& item : obj.cast<py::dict>())
            out[py::str(item.first).cast<std::string>()] = to_json(item.second);
        return out;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json out = json::array();
        for (const auto& item : obj.cast<py::sequence>()) out.push_back(to_json(item));
        return out;
    }
    throw py::type_error("unsupported value in input document");
}

py::object to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = to_py(value);
            return out;
        }
        default: return py::none();
    }
}

// Accepts a dict or a JSON string.
json parse_doc(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return json::parse(obj.cast<std::string>());
    return to_json(obj);
}

robustfolio::FiniteMarket market_arg(const py::object& obj) {
    return robustfolio::build_market(
        robustfolio::io::market_from_json(robustfolio::io::extract_section(parse_doc(obj), "market")));
}

robustfolio::PriorSet priors_arg(const py::object& obj) {
    return robustfolio::io::priors_from_json(
        robustfolio::io::extract_section(parse_doc(obj), "priors"));
}

robustfolio::UtilityFunction utility_arg(const py::object& obj) {
    if (obj.is_none()) return robustfolio::UtilityFunction::log();
    return robustfolio::io::utility_from_json(
        robustfolio::io::extract_section(parse_doc(obj), "utility"));
}

robustfolio::MeasureVector single_prior(const robustfolio::PriorSet& priors) {
    if (priors.vertices.size() != 1)
        robustfolio::raise(robustfolio::ErrorKind::DomainError,
                           "expected a single-vertex prior set");
    return priors.vertices.front();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Minimax expected-utility portfolio solver on finite-state markets";

    py::register_exception<robustfolio::Error>(m, "SolverError");

    m.def(
        "solve",
        [](const py::object& market, const py::object& priors, const py::object& utility,
           double x) {
            const auto plan = robustfolio::solve_robust(market_arg(market), priors_arg(priors),
                                                        utility_arg(utility), x);
            return to_py(robustfolio::io::plan_to_json(plan));
        },
        py::arg("market"), py::arg("priors"), py::arg("utility") = py::none(),
        py::arg("x") = 1.0, "Robust (minimax) optimal portfolio over the prior polytope.");

    m.def(
        "solve_single_prior",
        [](const py::object& market, const py::object& prior, const py::object& utility,
           double x) {
            const auto plan = robustfolio::solve_single_prior(
                market_arg(market), single_prior(priors_arg(prior)), utility_arg(utility), x);
            return to_py(robustfolio::io::plan_to_json(plan));
        },
        py::arg("market"), py::arg("prior"), py::arg("utility") = py::none(),
        py::arg("x") = 1.0);

    m.def(
        "dual",
        [](const py::object& market, const py::object& prior, const py::object& utility,
           double y) {
            const auto d = robustfolio::solve_dual(market_arg(market),
                                                   single_prior(priors_arg(prior)),
                                                   utility_arg(utility), y);
            py::dict out;
            out["q_star"] = to_py(json(d.q_star.weights));
            out["value"] = d.value;
            out["gap"] = d.gap;
            return out;
        },
        py::arg("market"), py::arg("prior"), py::arg("utility") = py::none(),
        py::arg("y") = 1.0);

    m.def(
        "reconcile",
        [](const py::object& market, const py::object& prior, const py::object& utility,
           double x) {
            const auto rep = robustfolio::reconcile_duality(
                market_arg(market), single_prior(priors_arg(prior)), utility_arg(utility), x);
            return to_py(robustfolio::io::duality_to_json(rep));
        },
        py::arg("market"), py::arg("prior"), py::arg("utility") = py::none(),
        py::arg("x") = 1.0);

    m.def(
        "check",
        [](const py::object& market, const py::object& priors, const py::object& utility,
           double x) {
            const auto rep = robustfolio::theorem_check(market_arg(market), priors_arg(priors),
                                                        utility_arg(utility), x);
            return to_py(robustfolio::io::verification_to_json(rep));
        },
        py::arg("market"), py::arg("priors"), py::arg("utility") = py::none(),
        py::arg("x") = 1.0,
        "Riskless detector vs EMM / supermartingale membership, side by side.");

    m.def(
        "no_betting_set",
        [](const py::object& priors, const std::vector<std::vector<double>>& payoffs) {
            return to_py(robustfolio::io::no_betting_to_json(
                robustfolio::no_betting_set(priors_arg(priors), payoffs)));
        },
        py::arg("priors"), py::arg("payoffs"));

    m.def(
        "dow_werlang_interval",
        [](double pi, double pi_prime, double high, double low) {
            return robustfolio::dow_werlang_interval(pi, pi_prime, high, low);
        },
        py::arg("pi"), py::arg("pi_prime"), py::arg("high"), py::arg("low"));

    m.def(
        "verify",
        [](int trials, std::uint64_t seed) {
            return to_py(robustfolio::io::summary_to_json(
                robustfolio::randomized_verification(seed, trials)));
        },
        py::arg("trials") = 100, py::arg("seed") = 42,
        "Randomized check of the riskless-iff-EMM-in-priors equivalence.");

    m.def(
        "oracle_value",
        [](const py::object& market, const py::object& priors, const py::object& utility,
           double x) {
            const auto res = robustfolio::brute_force_optimal(market_arg(market),
                                                              priors_arg(priors),
                                                              utility_arg(utility), x);
            py::dict out;
            out["value"] = res.value;
            out["holdings"] = to_py(json(res.holdings));
            return out;
        },
        py::arg("market"), py::arg("priors"), py::arg("utility") = py::none(),
        py::arg("x") = 1.0, "Brute-force grid value (independent of the solvers).");

    m.def(
        "find_emm",
        [](const py::object& market) -> py::object {
            const auto m = market_arg(market);
            std::vector<int> support(m.tree.num_leaves());
            for (std::size_t i = 0; i < support.size(); ++i) support[i] = static_cast<int>(i);
            const auto q = robustfolio::find_emm(m, support);
            if (!q.has_value()) return py::none();
            return to_py(json(q->weights));
        },
        py::arg("market"));

    m.def(
        "enumerate_emm_vertices",
        [](const py::object& market) {
            py::list out;
            for (const auto& q : robustfolio::enumerate_emm_vertices(market_arg(market)))
                out.append(to_py(json(q.weights)));
            return out;
        },
        py::arg("market"));
}
