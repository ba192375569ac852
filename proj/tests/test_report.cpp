#include <doctest.h>

#include <random>
#include <sstream>

#include "jordanflow/report.hpp"
#include "test_support.hpp"

using namespace jflow;
using namespace jflow::testing;
using nlohmann::json;

namespace {

constexpr double kPi = 3.141592653589793;

RealMatrix rows_of(const json& m) { return parse_matrix(m); }

json periodic_json(const PeriodicCoefficient& c) {
    json h = json::array();
    for (const auto& x : c.harmonics) h.push_back({{"k", x.k}, {"A", matrix_json(x.A)["rows"]}, {"B", matrix_json(x.B)["rows"]}});
    return {{"T", c.T}, {"A0", matrix_json(c.A0)["rows"]}, {"harmonics", h}};
}

} // namespace

TEST_CASE("matrix documents") {
    const json j = matrix_json(X4(1, 2));
    CHECK(parse_matrix(j) == X4(1, 2));
    CHECK_THROWS_AS(parse_matrix(json::parse(R"({"n": 2, "rows": [[1, 2]]})")), ParseError);
    CHECK_THROWS_AS(parse_matrix(json::parse(R"({"n": 2, "rows": [[1, 2], [3, "x"]]})")), ParseError);
    CHECK_THROWS_AS(parse_matrix(json::parse(R"({"rows": [[1]]})")), ParseError);
    CHECK_THROWS_AS(parse_matrix(json::parse(R"({"n": 0, "rows": []})")), ParseError);
    CHECK_THROWS_AS(parse_flag_type(3, "1,x"), ParseError);
    CHECK_THROWS_AS(parse_flag_type(3, "2,1"), ParseError);
    CHECK(parse_flag_type(3, "1,2") == FlagType::full(3));
    CHECK(number_from_json(number_json(1.0 / 0.0)) == 1.0 / 0.0);
    CHECK(number_from_json(number_json(0.1)) == 0.1);
}

TEST_CASE("input hash is FNV-1a of the compact dump") {
    // FNV-1a of the empty string and of "a".
    CHECK(input_hash(json::parse("\"\"")) != input_hash(json::parse("\"a\"")));
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : std::string("{\"n\":1}")) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    CHECK(input_hash(json::parse(R"({"n": 1})")) == buf);
}

TEST_CASE("decompose reports") {
    const CommandOptions opts;
    SUBCASE("X4 elliptic and hyperbolic parts") {
        const auto r = cmd_decompose(matrix_json(X4(1, 2)), opts);
        RealMatrix E(3, 3), H(3, 3);
        E << 0, -2, 0, 2, 0, 0, 0, 0, 0;
        H << -1, 0, 0, 0, -1, 0, 0, 0, 2;
        CHECK(max_abs_diff(rows_of(r.jordan["elliptic"]), E) < 1e-10);
        CHECK(max_abs_diff(rows_of(r.jordan["hyperbolic"]), H) < 1e-10);
        CHECK(rows_of(r.jordan["nilpotent"]).norm() < 1e-10);
        CHECK(r.jordan["conformal"].get<bool>());
    }
    SUBCASE("identity in the discrete model") {
        CommandOptions d;
        d.time = TimeMode::Discrete;
        const auto r = cmd_decompose(matrix_json(RealMatrix::Identity(3, 3)), d);
        for (const char* k : {"elliptic", "hyperbolic", "unipotent"})
            CHECK(max_abs_diff(rows_of(r.jordan[k]), RealMatrix::Identity(3, 3)) < 1e-12);
        CHECK(r.time_mode == "discrete");
    }
    SUBCASE("random SL(3) residuals") {
        std::mt19937_64 rng(17);
        CommandOptions d;
        d.time = TimeMode::Discrete;
        for (int k = 0; k < 20; ++k) {
            RealMatrix g = random_invertible(rng, 3);
            if (g.determinant() < 0) g.col(0) *= -1.0;
            g /= std::cbrt(g.determinant());
            const auto r = cmd_decompose(matrix_json(g), d);
            CHECK(r.jordan["residuals"]["product"].get<double>() < 1e-9 * std::max(1.0, g.norm()));
            CHECK(r.jordan["residuals"]["commutator"].get<double>() < 1e-9 * std::max(1.0, g.squaredNorm()));
        }
    }
    SUBCASE("a nearly defective matrix is reported as ill conditioned") {
        RealMatrix A(2, 2);
        A << 1, 1e302, 0, 1.00000002;
        CommandOptions g;
        g.model = Model::General;
        CHECK_THROWS_WITH_AS(cmd_decompose(matrix_json(A), g), doctest::Contains("IllConditioned"), Error);
        CHECK(exit_code(ErrorKind::IllConditioned) == 3);
    }
}

TEST_CASE("analyze reports") {
    const CommandOptions opts;
    SUBCASE("X5 on projective space") {
        const auto r = cmd_analyze(matrix_json(X5(1)), "1", 0, 1, opts);
        CHECK(r.components.size() == 2);
        CHECK_FALSE(r.classification["structurally_stable"].get<bool>());
        CHECK(r.components.front().attractor);
        CHECK(r.components.back().repeller);
        CHECK_FALSE(r.simulation.has_value());
    }
    SUBCASE("regular matrix on the full flag manifold") {
        const auto r = cmd_analyze(matrix_json(diag({1.0, 2.0, -3.0})), "1,2", 0, 1, opts);
        CHECK(r.components.size() == 6);
        for (const auto& c : r.components) CHECK(c.dims.component == 0);
        CHECK(r.classification["structurally_stable"].get<bool>());
    }
    SUBCASE("X4 simulation cross-check") {
        const auto r = cmd_analyze(matrix_json(X4(1, 2)), "1", 100, 7, opts);
        REQUIRE(r.simulation.has_value());
        CHECK(r.simulation->passed == 100);
        CHECK(r.simulation->failed == 0);
        CHECK_FALSE(contradicts(r));
        auto broken = r;
        broken.simulation->failed = 1;
        CHECK(contradicts(broken));
    }
    SUBCASE("determinism") {
        const auto a = to_json(cmd_analyze(matrix_json(X5(1)), "1,2", 10, 3, opts)).dump();
        const auto b = to_json(cmd_analyze(matrix_json(X5(1)), "1,2", 10, 3, opts)).dump();
        CHECK(a == b);
    }
}

TEST_CASE("report round trip") {
    const CommandOptions opts;
    std::vector<AnalysisReport> reports = {
        cmd_decompose(matrix_json(X4(1, 2)), opts),
        cmd_analyze(matrix_json(X1(1, 2)), "1,2", 5, 2, opts),
        cmd_chain_oracle(matrix_json(X5(1)), 200, 0.05, 0.5, std::nullopt, opts),
    };
    for (const auto& r : reports) {
        const json j = to_json(r);
        const AnalysisReport back = report_from_json(json::parse(j.dump()));
        CHECK(back == r);
        CHECK(to_json(back).dump() == j.dump());
        CHECK(back.schema == kSchemaVersion);
    }
    json bad = to_json(reports.front());
    bad.erase("components");
    CHECK_THROWS_AS(report_from_json(bad), ParseError);
    bad = to_json(reports.front());
    bad["schema"] = "jf-schema-0";
    CHECK_THROWS_AS(report_from_json(bad), ParseError);
}

TEST_CASE("chain oracle reports") {
    const CommandOptions opts;
    SUBCASE("unipotent plane flow marks everything") {
        RealMatrix N = RealMatrix::Zero(2, 2);
        N(0, 1) = 1.0;
        const auto r = cmd_chain_oracle(matrix_json(N), 500, 0.05, 1.0, std::nullopt, opts);
        CHECK(r.details["marked_count"].get<int>() == 500);
        CHECK(r.details["agreement"].get<double>() > 0.99);
    }
    SUBCASE("grid budget") {
        CHECK_THROWS_WITH_AS(cmd_chain_oracle(matrix_json(X5(1)), 20000, 0.01, 1.0, std::nullopt, opts),
                             doctest::Contains("GridTooLarge"), Error);
        CHECK(exit_code(ErrorKind::GridTooLarge) == 5);
    }
}

TEST_CASE("floquet reports") {
    const CommandOptions opts;
    SUBCASE("constant coefficients") {
        PeriodicCoefficient c;
        c.A0 = X4(1, 2);
        const auto r = cmd_floquet(periodic_json(c), 1024, "1", opts);
        CHECK(r.details["m"].get<int>() == 1);
        CHECK(max_abs_diff(rows_of(r.details["X"]), X4(1, 2)) < 1e-8);
        CHECK(r.details["constant_coefficients"].get<bool>());
        CHECK(r.components.size() == 2);
    }
    SUBCASE("scalar modulation averages the coefficient") {
        PeriodicCoefficient c;
        c.A0 = 0.3 * X5(1);
        c.harmonics = {{1, X5(1), RealMatrix::Zero(3, 3)}};
        const auto r = cmd_floquet(periodic_json(c), 2048, "1", opts);
        CHECK(max_abs_diff(rows_of(r.details["X"]), 0.3 * X5(1)) < 1e-8);
    }
    SUBCASE("half turn") {
        PeriodicCoefficient c;
        c.A0 = RealMatrix::Zero(3, 3);
        c.A0(1, 0) = kPi;
        c.A0(0, 1) = -kPi;
        const auto r = cmd_floquet(periodic_json(c), 1024, "1,2", opts);
        CHECK(r.details["m"].get<int>() == 2);
        CHECK(exit_code(ErrorKind::NoRealLog) == 6);
    }
    SUBCASE("malformed document") {
        CHECK_THROWS_AS(cmd_floquet(json::parse(R"({"A0": [[0]]})"), 1024, "1", opts), ParseError);
    }
}

TEST_CASE("simulate and classify-flag reports") {
    const CommandOptions opts;
    std::ostringstream csv;
    const auto r = cmd_simulate(matrix_json(X4(1, 2)), {1.0, 1.0, 1.0}, {-10.0, 0.0, 10.0}, &csv, opts);
    CHECK(csv.str().rfind("t,x1,x2,x3,distance\n", 0) == 0);
    const auto& traj = r.details["trajectory"];
    REQUIRE(traj.size() == 3);
    CHECK(traj[0]["t"].get<double>() == -10.0);
    CHECK(traj[0]["distance"].get<double>() < 1e-6);
    CHECK(traj[2]["distance"].get<double>() < 1e-6);
    CHECK(r.details["forward_component"].get<int>() == 0);
    CHECK(r.details["backward_component"].get<int>() == 1);
    CHECK_THROWS_AS(cmd_simulate(matrix_json(X4(1, 2)), {1.0}, {1.0}, nullptr, opts), ParseError);

    RealMatrix B(3, 2);
    B << 1, 0, 0, 1, 0, 0;
    const auto c = cmd_classify_flag(matrix_json(X5(1)), matrix_json(B), "1,2", opts);
    const auto comps = enumerate_morse_components(LinearFlow::continuous(X5(1)), FlagType::full(3));
    CHECK(c.details["stable_cell"].get<std::size_t>() == find_component(comps, {{0, 1}, {0, 1}, {1, 0}}));
    CHECK(c.details["recurrent"].get<bool>());
}
