#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "womops/config.hpp"
#include "womops/errors.hpp"
#include "womops/m1_solver.hpp"
#include "womops/m2_solver.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace womops;

namespace {

CliConfig config_from(const std::string& text) {
    return text.empty() ? CliConfig{} : parse_config(json::parse(text));
}

std::string solve_m1_json(double lambda_p, const std::string& config) {
    const CliConfig cfg = config_from(config);
    const M1Solution sol = solve_m1(cfg.market, lambda_p);
    json doc = to_json(sol);
    doc["kkt_residual"] = kkt_residual(sol.case_id, cfg.market, lambda_p, sol.policy);
    return doc.dump();
}

std::string solve_m2_json(const std::string& config, bool with_recovery) {
    const CliConfig cfg = config_from(config);
    const M2Problem pb = cfg.problem();
    const M2Solution sol = solve_m2(pb, cfg.search);
    json doc = to_json(sol);
    if (with_recovery) doc["recovery"] = to_json(recoverability(pb, sol, cfg.experiment.recovery));
    return doc.dump();
}

std::string simulate_json(const std::string& config, std::optional<double> seed, int iters,
                          double tol, bool stop_early) {
    const FeedbackSystem sys = config_from(config).system();
    return to_json(simulate(sys, seed.value_or(sys.potential()), {iters, tol, stop_early})).dump();
}

std::string closed_form_json(const std::string& config, std::optional<double> fee) {
    const M2Problem pb = config_from(config).problem();
    const ClosedFormPoint p =
        closed_form_t3(pb, fee ? FeeRegime::boundary(*fee) : FeeRegime::interior());
    return json{{"t3", p.t3}, {"fee", p.fee}}.dump();
}

double potential(const std::string& family, double a, double b, double delta, double fee) {
    FeeModel m;
    if (family == "linear") {
        m.family = FeeFamily::Linear;
    } else if (family == "logarithmic") {
        m.family = FeeFamily::Logarithmic;
    } else {
        throw InvalidParams("unknown fee family: " + family);
    }
    m.a = a;
    m.b = b;
    m.delta = delta;
    return potential_market(m, fee);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    auto base = py::register_exception<Error>(m, "WomopsError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InvalidParams>(m, "InvalidParams", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<RegimeViolation>(m, "RegimeViolation", base.ptr());
    py::register_exception<UnsupportedSignal>(m, "UnsupportedSignal", base.ptr());

    m.def("solve_m1_json", &solve_m1_json, py::arg("lambda_p"), py::arg("config") = "");
    m.def("solve_m2_json", &solve_m2_json, py::arg("config") = "", py::arg("recovery") = false);
    m.def("simulate_json", &simulate_json, py::arg("config") = "", py::arg("seed") = py::none(),
          py::arg("iters") = 10, py::arg("tol") = 1e-4, py::arg("stop_early") = false);
    m.def("closed_form_t3_json", &closed_form_json, py::arg("config") = "",
          py::arg("fee") = py::none());
    m.def("potential_market", &potential, py::arg("family"), py::arg("a"), py::arg("b"),
          py::arg("delta"), py::arg("fee"));
}
