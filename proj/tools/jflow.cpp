#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jordanflow/report.hpp"

using namespace jflow;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void emit(const AnalysisReport& r, const std::string& out) {
    const std::string text = to_json(r).dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write '" + out + "'");
    os << text;
}

TimeMode time_mode(const std::string& s) { return s == "discrete" ? TimeMode::Discrete : TimeMode::Continuous; }
Model model(const std::string& s) { return s == "general" ? Model::General : Model::Special; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jordan-decomposition dynamics of linear flows on projective and flag manifolds"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string output, time = "continuous", model_name = "special";
    app.add_option("--cluster-tol", opts.tolerances.cluster_tol, "relative eigenvalue grouping gap")->capture_default_str();
    app.add_option("--residual-tol", opts.tolerances.residual_tol, "residual and rank threshold")->capture_default_str();
    app.add_option("--sim-tol", opts.tolerances.sim_tol, "simulation convergence threshold")->capture_default_str();
    app.add_option("-o,--output", output, "report file (default stdout)");
    app.add_option("--time", time, "continuous (X) or discrete (g)")
        ->check(CLI::IsMember({"continuous", "discrete"}))
        ->capture_default_str();
    app.add_option("--model", model_name, "special (traceless, det 1) or general")
        ->check(CLI::IsMember({"special", "general"}))
        ->capture_default_str();

    std::string input;
    std::string flag_dims = "1";

    auto* decompose = app.add_subcommand("decompose", "Jordan components with residuals");
    decompose->add_option("input", input, "matrix JSON")->required();

    int simulate = 0;
    std::uint64_t seed = 1;
    auto* analyze = app.add_subcommand("analyze", "Morse components, classification and optional simulation check");
    analyze->add_option("input", input, "matrix JSON")->required();
    analyze->add_option("--flag", flag_dims, "flag dimensions, e.g. 1,2")->capture_default_str();
    analyze->add_option("--simulate", simulate, "number of random starts to simulate")->check(CLI::NonNegativeNumber);
    analyze->add_option("--seed", seed, "random seed")->capture_default_str();

    int resolution = 500;
    double eps = 0.01, min_time = 1.0;
    std::optional<double> reference_radius;
    auto* chain = app.add_subcommand("chain-oracle", "grid approximation of the chain recurrent set");
    chain->add_option("input", input, "matrix JSON (n = 2 or 3)")->required();
    chain->add_option("--resolution", resolution, "grid resolution")->capture_default_str();
    chain->add_option("--eps", eps, "jump size")->capture_default_str();
    chain->add_option("--min-time", min_time, "leg length")->capture_default_str();
    chain->add_option("--reference-radius", reference_radius, "radius around fixed subspaces (default eps)");

    int steps = 1024;
    auto* floquet = app.add_subcommand("floquet", "monodromy, Floquet generator and skew-product census");
    floquet->add_option("input", input, "periodic coefficient JSON")->required();
    floquet->add_option("--steps", steps, "RK4 steps per period")->capture_default_str();
    floquet->add_option("--flag", flag_dims, "flag dimensions")->capture_default_str();

    std::vector<double> start, times;
    std::string csv;
    auto* sim = app.add_subcommand("simulate", "projective trajectory with distance to the limit component");
    sim->add_option("input", input, "matrix JSON")->required();
    sim->add_option("--start", start, "start vector")->required()->delimiter(',');
    sim->add_option("--times", times, "sample times")->required()->delimiter(',');
    sim->add_option("--csv", csv, "trajectory CSV path");

    std::string basis;
    auto* classify = app.add_subcommand("classify-flag", "stable and unstable cells of one flag");
    classify->add_option("input", input, "matrix JSON")->required();
    classify->add_option("--basis", basis, "basis JSON (n rows, d_k columns)")->required();
    classify->add_option("--flag", flag_dims, "flag dimensions")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    opts.time = time_mode(time);
    opts.model = model(model_name);
    try {
        AnalysisReport r;
        if (*decompose) {
            r = cmd_decompose(read_json(input), opts);
        } else if (*analyze) {
            r = cmd_analyze(read_json(input), flag_dims, simulate, seed, opts);
        } else if (*chain) {
            r = cmd_chain_oracle(read_json(input), resolution, eps, min_time, reference_radius, opts);
        } else if (*floquet) {
            r = cmd_floquet(read_json(input), steps, flag_dims, opts);
        } else if (*sim) {
            std::ofstream os;
            if (!csv.empty()) {
                os.open(csv);
                if (!os) throw std::runtime_error("cannot write '" + csv + "'");
            }
            r = cmd_simulate(read_json(input), start, times, csv.empty() ? nullptr : &os, opts);
        } else {
            r = cmd_classify_flag(read_json(input), read_json(basis), flag_dims, opts);
        }
        emit(r, output);
        if (contradicts(r)) {
            std::cerr << "simulation contradicts the predicted cells (" << r.simulation->failed << " of "
                      << r.simulation->starts << " starts)\n";
            return kExitContradiction;
        }
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
