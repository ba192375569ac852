#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jordanflow/report.hpp"

namespace py = pybind11;
using namespace jflow;
using nlohmann::json;

namespace {

CommandOptions options(double cluster_tol, double residual_tol, double sim_tol, const std::string& time,
                       const std::string& model) {
    CommandOptions o;
    o.tolerances = {cluster_tol, residual_tol, sim_tol};
    if (time != "continuous" && time != "discrete") throw ParseError("time must be 'continuous' or 'discrete'");
    if (model != "special" && model != "general") throw ParseError("model must be 'special' or 'general'");
    o.time = time == "discrete" ? TimeMode::Discrete : TimeMode::Continuous;
    o.model = model == "general" ? Model::General : Model::Special;
    return o;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

std::string dump(const AnalysisReport& r) { return to_json(r).dump(); }

Model model_of(const std::string& m) {
    if (m != "special" && m != "general") throw ParseError("model must be 'special' or 'general'");
    return m == "general" ? Model::General : Model::Special;
}

} // namespace

#define JF_OPTS                                                                                              \
    py::arg("cluster_tol") = 1e-8, py::arg("residual_tol") = 1e-9, py::arg("sim_tol") = 1e-6,                  \
        py::arg("time") = "continuous", py::arg("model") = "special"

PYBIND11_MODULE(_core, m) {
    m.doc() = "Jordan decompositions and the induced flows on projective and flag manifolds";
    m.attr("SCHEMA_VERSION") = kSchemaVersion;

    static py::exception<Error> error(m, "JordanFlowError");
    static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::set_error(parse_error, e.what());
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });
    m.def("exit_code_for", [](const std::string& kind) {
        for (int k = 0; k <= static_cast<int>(ErrorKind::NoRealLog); ++k)
            if (to_string(static_cast<ErrorKind>(k)) == kind) return exit_code(static_cast<ErrorKind>(k));
        return 1;
    });

    m.def(
        "additive_jordan",
        [](const RealMatrix& X, double cluster_tol, double residual_tol, const std::string& model) {
            const auto d = additive_jordan(X, {cluster_tol, residual_tol, 1e-6}, model_of(model));
            return py::make_tuple(d.elliptic, d.hyperbolic, d.nilpotent);
        },
        py::arg("X"), py::arg("cluster_tol") = 1e-8, py::arg("residual_tol") = 1e-9, py::arg("model") = "special",
        "(E, H, N) with X = E + H + N");
    m.def(
        "multiplicative_jordan",
        [](const RealMatrix& g, double cluster_tol, double residual_tol, const std::string& model) {
            const auto d = multiplicative_jordan(g, {cluster_tol, residual_tol, 1e-6}, model_of(model));
            return py::make_tuple(d.elliptic, d.hyperbolic, d.unipotent);
        },
        py::arg("g"), py::arg("cluster_tol") = 1e-8, py::arg("residual_tol") = 1e-9, py::arg("model") = "special",
        "(e, h, u) with g = e h u");

    m.def(
        "decompose",
        [](const std::string& input, double c, double r, double s, const std::string& t, const std::string& mo) {
            return dump(cmd_decompose(parse(input), options(c, r, s, t, mo)));
        },
        py::arg("input"), JF_OPTS);
    m.def(
        "analyze",
        [](const std::string& input, const std::string& flag, int simulate, std::uint64_t seed, double c, double r,
           double s, const std::string& t, const std::string& mo) {
            return dump(cmd_analyze(parse(input), flag, simulate, seed, options(c, r, s, t, mo)));
        },
        py::arg("input"), py::arg("flag") = "1", py::arg("simulate") = 0, py::arg("seed") = 1, JF_OPTS);
    m.def(
        "chain_oracle",
        [](const std::string& input, int resolution, double eps, double min_time, std::optional<double> radius,
           double c, double r, double s, const std::string& t, const std::string& mo) {
            return dump(cmd_chain_oracle(parse(input), resolution, eps, min_time, radius, options(c, r, s, t, mo)));
        },
        py::arg("input"), py::arg("resolution") = 500, py::arg("eps") = 0.01, py::arg("min_time") = 1.0,
        py::arg("reference_radius") = py::none(), JF_OPTS);
    m.def(
        "floquet",
        [](const std::string& input, int steps, const std::string& flag, double c, double r, double s,
           const std::string& t, const std::string& mo) {
            return dump(cmd_floquet(parse(input), steps, flag, options(c, r, s, t, mo)));
        },
        py::arg("input"), py::arg("steps") = 1024, py::arg("flag") = "1", JF_OPTS);
    m.def(
        "simulate",
        [](const std::string& input, const std::vector<double>& start, const std::vector<double>& times, double c,
           double r, double s, const std::string& t, const std::string& mo) {
            std::ostringstream csv;
            const auto rep = cmd_simulate(parse(input), start, times, &csv, options(c, r, s, t, mo));
            return py::make_tuple(dump(rep), csv.str());
        },
        py::arg("input"), py::arg("start"), py::arg("times"), JF_OPTS, "(report JSON, trajectory CSV)");
    m.def(
        "classify_flag",
        [](const std::string& input, const std::string& basis, const std::string& flag, double c, double r, double s,
           const std::string& t, const std::string& mo) {
            return dump(cmd_classify_flag(parse(input), parse(basis), flag, options(c, r, s, t, mo)));
        },
        py::arg("input"), py::arg("basis"), py::arg("flag") = "1", JF_OPTS);
}
