#include "jordanflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace jflow {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw ParseError(what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

RealMatrix parse_rows(const json& rows, int r, int c, const std::string& what) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != r) parse_fail(what + ": expected " + std::to_string(r) + " rows");
    RealMatrix A(r, c);
    for (int i = 0; i < r; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != c)
            parse_fail(what + ": row " + std::to_string(i) + " must have " + std::to_string(c) + " entries");
        for (int k = 0; k < c; ++k) {
            const json& x = row[static_cast<std::size_t>(k)];
            if (!x.is_number()) parse_fail(what + ": entries must be numbers");
            A(i, k) = x.get<double>();
        }
    }
    return A;
}

double commutator_norm(const RealMatrix& a, const RealMatrix& b) { return (a * b - b * a).norm(); }

json spectrum_json(const SpectralData& spec) {
    json clusters = json::array();
    for (const auto& c : spec.clusters)
        clusters.push_back({{"value", {c.value.real(), c.value.imag()}},
                            {"multiplicity", c.multiplicity},
                            {"conjugate_pair", c.conjugate_pair},
                            {"real_dimension", c.real_dimension()}});
    return {{"clusters", clusters},
            {"min_gap_ratio", number_json(spec.min_gap_ratio)},
            {"max_projection_norm", number_json(spec.max_projection_norm)}};
}

json rates_json(const LinearFlow& flow) {
    json out = json::array();
    for (const auto& r : flow.rate_spaces()) out.push_back({{"rate", r.rate}, {"dimension", r.dimension}});
    return out;
}

json jordan_json(const LinearFlow& flow) {
    json j;
    if (const auto* a = flow.additive()) {
        j = {{"kind", "additive"},
             {"source", matrix_json(a->source)},
             {"elliptic", matrix_json(a->elliptic)},
             {"hyperbolic", matrix_json(a->hyperbolic)},
             {"nilpotent", matrix_json(a->nilpotent)},
             {"residuals",
              {{"sum", (a->source - a->elliptic - a->hyperbolic - a->nilpotent).norm()},
               {"commutator", std::max({commutator_norm(a->elliptic, a->hyperbolic),
                                        commutator_norm(a->elliptic, a->nilpotent),
                                        commutator_norm(a->hyperbolic, a->nilpotent)})}}},
             {"spectrum", spectrum_json(a->spectrum)}};
    } else {
        const auto* m = flow.multiplicative();
        j = {{"kind", "multiplicative"},
             {"source", matrix_json(m->source)},
             {"elliptic", matrix_json(m->elliptic)},
             {"hyperbolic", matrix_json(m->hyperbolic)},
             {"unipotent", matrix_json(m->unipotent)},
             {"log_hyperbolic", matrix_json(m->log_hyperbolic)},
             {"residuals",
              {{"product", (m->source - m->elliptic * m->hyperbolic * m->unipotent).norm()},
               {"commutator", std::max({commutator_norm(m->elliptic, m->hyperbolic),
                                        commutator_norm(m->elliptic, m->unipotent),
                                        commutator_norm(m->hyperbolic, m->unipotent)})}}},
             {"spectrum", spectrum_json(m->spectrum)}};
    }
    j["rates"] = rates_json(flow);
    j["conformal"] = flow.conformal();
    j["nilpotent_norm"] = flow.nilpotent_norm();
    return j;
}

void margin_warnings(const LinearFlow& flow, std::vector<std::string>& warnings) {
    const SpectralData& spec = flow.additive() ? flow.additive()->spectrum : flow.multiplicative()->spectrum;
    char buf[160];
    if (spec.clusters.size() > 1 && spec.min_gap_ratio < 100.0) {
        std::snprintf(buf, sizeof buf, "eigenvalue clusters separated by only %.3g cluster tolerances", spec.min_gap_ratio);
        warnings.emplace_back(buf);
    }
    if (flow.rate_spaces().size() > 1 && flow.rate_gap_ratio() < 100.0) {
        std::snprintf(buf, sizeof buf, "distinct rates separated by only %.3g cluster tolerances", flow.rate_gap_ratio());
        warnings.emplace_back(buf);
    }
}

LinearFlow make_flow(const json& input, const CommandOptions& opts) {
    opts.tolerances.validate();
    const RealMatrix A = parse_matrix(input);
    return opts.time == TimeMode::Continuous ? LinearFlow::continuous(A, opts.tolerances, opts.model)
                                             : LinearFlow::discrete(A, opts.tolerances, opts.model);
}

AnalysisReport base_report(const std::string& command, const json& input, const CommandOptions& opts) {
    AnalysisReport r;
    r.command = command;
    r.input = input;
    r.input_hash = input_hash(input);
    r.tolerances = opts.tolerances;
    r.time_mode = opts.time == TimeMode::Continuous ? "continuous" : "discrete";
    return r;
}

json classification_json(const FlowClassification& c) {
    return {{"n", c.type.n},
            {"flag_dims", c.type.dims},
            {"h_regular", c.h_regular},
            {"conformal", c.conformal},
            {"structurally_stable", c.structurally_stable},
            {"rates", c.rates},
            {"multiplicities", c.multiplicities},
            {"component_count", c.components.size()},
            {"attractor", c.attractor},
            {"repeller", c.repeller},
            {"rate_gap_ratio", number_json(c.rate_gap_ratio)},
            {"nilpotent_norm", c.nilpotent_norm},
            {"spectral_gap_ratio", number_json(c.spectral_gap_ratio)}};
}

std::vector<ComponentRow> component_rows(const FlowClassification& c) {
    std::vector<ComponentRow> rows;
    for (std::size_t i = 0; i < c.components.size(); ++i) {
        ComponentRow row;
        row.index = i;
        row.cells = c.components[i].cells;
        for (const auto& inc : row.cells) {
            double s = 0.0;
            for (std::size_t j = 0; j < inc.size(); ++j) s += inc[j] * c.rates[j];
            row.rate_sums.push_back(s);
        }
        row.dims = c.components[i].dims;
        row.attractor = i == c.attractor;
        row.repeller = i == c.repeller;
        rows.push_back(std::move(row));
    }
    return rows;
}

void add_classification(AnalysisReport& r, const LinearFlow& flow, const FlagType& type) {
    const FlowClassification c = classify_flow(flow, type);
    r.classification = classification_json(c);
    r.components = component_rows(c);
    if (!c.h_regular && c.rate_gap_ratio > 0.0 && c.rate_gap_ratio < 100.0)
        r.warnings.emplace_back("verdict near a rate coincidence");
}

double simulation_horizon(const LinearFlow& flow) {
    const auto rates = flow.rates();
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rates.size(); ++i) gap = std::min(gap, rates[i - 1] - rates[i]);
    if (!std::isfinite(gap)) return 0.0;
    double t = 1.5 * std::log(100.0 / flow.policy().sim_tol) / gap;
    if (flow.mode() == TimeMode::Discrete) t = std::ceil(t);
    return t;
}

json ridx(std::size_t i) { return static_cast<std::uint64_t>(i); }

} // namespace

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::IllConditioned: return 3;
    case ErrorKind::GridTooLarge: return 5;
    case ErrorKind::NoRealLog: return 6;
    default: return 1;
    }
}

RealMatrix parse_matrix(const json& j, std::optional<int> cols) {
    const json& nj = field(j, "n");
    if (!nj.is_number_integer() || nj.get<long long>() < 1 || nj.get<long long>() > kMaxDimension)
        parse_fail("'n' must be an integer between 1 and " + std::to_string(kMaxDimension));
    const int n = nj.get<int>();
    return parse_rows(field(j, "rows"), n, cols.value_or(n), "rows");
}

json matrix_json(const RealMatrix& A) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < A.cols(); ++k) row.push_back(A(i, k));
        rows.push_back(std::move(row));
    }
    return {{"n", A.rows()}, {"rows", rows}};
}

PeriodicCoefficient parse_periodic(const json& j) {
    PeriodicCoefficient c;
    const json& T = field(j, "T");
    if (!T.is_number()) parse_fail("'T' must be a number");
    c.T = T.get<double>();
    const json& a0 = field(j, "A0");
    if (!a0.is_array() || a0.empty()) parse_fail("'A0' must be a square array of rows");
    const int n = static_cast<int>(a0.size());
    if (n > kMaxDimension) parse_fail("dimension too large");
    c.A0 = parse_rows(a0, n, n, "A0");
    if (j.contains("harmonics")) {
        const json& hs = j.at("harmonics");
        if (!hs.is_array()) parse_fail("'harmonics' must be an array");
        for (const json& h : hs) {
            const json& k = field(h, "k");
            if (!k.is_number_integer()) parse_fail("harmonic 'k' must be an integer");
            Harmonic hm;
            hm.k = k.get<int>();
            hm.A = h.contains("A") ? parse_rows(h.at("A"), n, n, "A") : RealMatrix::Zero(n, n);
            hm.B = h.contains("B") ? parse_rows(h.at("B"), n, n, "B") : RealMatrix::Zero(n, n);
            c.harmonics.push_back(std::move(hm));
        }
    }
    return c;
}

FlagType parse_flag_type(int n, const std::string& dims) {
    std::vector<int> d;
    std::stringstream ss(dims);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            d.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            parse_fail("flag dimensions must be a comma separated list of integers, got '" + dims + "'");
        }
    }
    try {
        return FlagType(n, d);
    } catch (const Error& e) {
        parse_fail(e.what());
    }
}

std::string input_hash(const json& input) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : input.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json number_json(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    parse_fail("expected a number");
}

bool AnalysisReport::operator==(const AnalysisReport& o) const {
    return to_json(*this) == to_json(o);
}

json to_json(const AnalysisReport& r) {
    json comps = json::array();
    for (const auto& c : r.components)
        comps.push_back({{"index", ridx(c.index)},
                         {"cells", c.cells},
                         {"rate_sums", c.rate_sums},
                         {"dimension", c.dims.component},
                         {"unstable_dimension", c.dims.unstable},
                         {"stable_dimension", c.dims.stable},
                         {"attractor", c.attractor},
                         {"repeller", c.repeller}});
    json sim = nullptr;
    if (r.simulation) {
        const auto& s = *r.simulation;
        sim = {{"starts", s.starts},     {"passed", s.passed},   {"failed", s.failed},
               {"ambiguous", s.ambiguous}, {"horizon", s.horizon}, {"worst_residual", number_json(s.worst_residual)},
               {"seed", s.seed}};
    }
    return {{"schema", r.schema},
            {"command", r.command},
            {"input", r.input},
            {"input_hash", r.input_hash},
            {"tolerances",
             {{"cluster_tol", r.tolerances.cluster_tol},
              {"residual_tol", r.tolerances.residual_tol},
              {"sim_tol", r.tolerances.sim_tol}}},
            {"time_mode", r.time_mode},
            {"jordan", r.jordan},
            {"classification", r.classification},
            {"components", comps},
            {"simulation", sim},
            {"details", r.details},
            {"warnings", r.warnings}};
}

AnalysisReport report_from_json(const json& j) {
    try {
        AnalysisReport r;
        r.schema = field(j, "schema").get<std::string>();
        if (r.schema != kSchemaVersion) parse_fail("unsupported schema '" + r.schema + "'");
        r.command = field(j, "command").get<std::string>();
        r.input = field(j, "input");
        r.input_hash = field(j, "input_hash").get<std::string>();
        const json& tol = field(j, "tolerances");
        r.tolerances.cluster_tol = field(tol, "cluster_tol").get<double>();
        r.tolerances.residual_tol = field(tol, "residual_tol").get<double>();
        r.tolerances.sim_tol = field(tol, "sim_tol").get<double>();
        r.time_mode = field(j, "time_mode").get<std::string>();
        r.jordan = field(j, "jordan");
        r.classification = field(j, "classification");
        for (const json& c : field(j, "components")) {
            ComponentRow row;
            row.index = field(c, "index").get<std::size_t>();
            row.cells = field(c, "cells").get<std::vector<std::vector<int>>>();
            row.rate_sums = field(c, "rate_sums").get<std::vector<double>>();
            row.dims.component = field(c, "dimension").get<int>();
            row.dims.unstable = field(c, "unstable_dimension").get<int>();
            row.dims.stable = field(c, "stable_dimension").get<int>();
            row.attractor = field(c, "attractor").get<bool>();
            row.repeller = field(c, "repeller").get<bool>();
            r.components.push_back(std::move(row));
        }
        const json& sim = field(j, "simulation");
        if (!sim.is_null()) {
            SimulationSummary s;
            s.starts = field(sim, "starts").get<int>();
            s.passed = field(sim, "passed").get<int>();
            s.failed = field(sim, "failed").get<int>();
            s.ambiguous = field(sim, "ambiguous").get<int>();
            s.horizon = field(sim, "horizon").get<double>();
            s.worst_residual = number_from_json(field(sim, "worst_residual"));
            s.seed = field(sim, "seed").get<std::uint64_t>();
            r.simulation = s;
        }
        r.details = field(j, "details");
        r.warnings = field(j, "warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        parse_fail(std::string("malformed report: ") + e.what());
    }
}

AnalysisReport cmd_decompose(const json& input, const CommandOptions& opts) {
    const LinearFlow flow = make_flow(input, opts);
    AnalysisReport r = base_report("decompose", input, opts);
    r.jordan = jordan_json(flow);
    margin_warnings(flow, r.warnings);
    return r;
}

AnalysisReport cmd_analyze(const json& input, const std::string& flag_dims, int simulate, std::uint64_t seed,
                           const CommandOptions& opts) {
    if (simulate < 0) parse_fail("--simulate must be nonnegative");
    const LinearFlow flow = make_flow(input, opts);
    const FlagType type = parse_flag_type(flow.dimension(), flag_dims);
    AnalysisReport r = base_report("analyze", input, opts);
    r.jordan = jordan_json(flow);
    margin_warnings(flow, r.warnings);
    add_classification(r, flow, type);
    if (simulate == 0) return r;

    const auto comps = enumerate_morse_components(flow, type);
    SimulationSummary s;
    s.seed = seed;
    s.horizon = simulation_horizon(flow);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int n = type.n, k = type.dims.back();
    for (int i = 0; i < simulate; ++i) {
        RealMatrix B(n, k);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < k; ++b) B(a, b) = nd(rng);
        const Flag f = Flag::from_basis(type, B);
        ++s.starts;
        std::size_t fwd_cell = 0, bwd_cell = 0;
        try {
            fwd_cell = bruhat_cell(f, flow, comps);
            bwd_cell = unstable_cell_index(f, flow, comps);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RankAmbiguous) throw;
            ++s.ambiguous;
            continue;
        }
        const auto fwd = nearest_component(simulate_flag(flow, f, {s.horizon}).back(), flow, comps);
        const auto bwd = nearest_component(simulate_flag(flow, f, {-s.horizon}).back(), flow, comps);
        s.worst_residual = std::max({s.worst_residual, fwd.distance, bwd.distance});
        const bool ok = fwd.index == fwd_cell && bwd.index == bwd_cell && fwd.distance < opts.tolerances.sim_tol &&
                        bwd.distance < opts.tolerances.sim_tol;
        ++(ok ? s.passed : s.failed);
    }
    if (s.ambiguous > 0) r.warnings.emplace_back(std::to_string(s.ambiguous) + " random starts had ambiguous cell ranks");
    r.simulation = s;
    return r;
}

AnalysisReport cmd_chain_oracle(const json& input, int resolution, double eps, double min_time,
                                std::optional<double> reference_radius, const CommandOptions& opts) {
    const LinearFlow flow = make_flow(input, opts);
    const ChainOracleResult res = chain_oracle(flow, resolution, eps, min_time, reference_radius);
    AnalysisReport r = base_report("chain-oracle", input, opts);
    r.jordan = jordan_json(flow);
    margin_warnings(flow, r.warnings);
    json marked = json::array();
    for (std::size_t i = 0; i < res.marked.size(); ++i) {
        if (!res.marked[i]) continue;
        const RealVector& v = res.graph.grid[i].rep;
        marked.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    const auto reference_count = std::count(res.reference.begin(), res.reference.end(), true);
    std::size_t edges = 0;
    for (const auto& e : res.graph.edges) edges += e.size();
    r.details = {{"resolution", resolution},
                 {"eps", eps},
                 {"min_time", min_time},
                 {"grid_points", res.graph.grid.size()},
                 {"edges", edges},
                 {"covering_radius", res.graph.covering_radius},
                 {"reference_radius", res.reference_radius},
                 {"marked_count", res.marked_count()},
                 {"reference_count", reference_count},
                 {"agreement", res.agreement},
                 {"marked", marked}};
    return r;
}

AnalysisReport cmd_floquet(const json& input, int steps, const std::string& flag_dims, const CommandOptions& opts) {
    opts.tolerances.validate();
    const PeriodicCoefficient coef = parse_periodic(input);
    const FlagType type = parse_flag_type(coef.dimension(), flag_dims);
    FloquetData fd = floquet_analyze(integrate_fundamental(coef, steps), opts.tolerances);
    AnalysisReport r = base_report("floquet", input, opts);
    r.jordan = jordan_json(fd.flow);
    margin_warnings(fd.flow, r.warnings);
    add_classification(r, fd.flow, type);
    r.details = {{"T", fd.T},
                 {"steps", steps},
                 {"m", fd.m},
                 {"monodromy", matrix_json(fd.monodromy)},
                 {"X", matrix_json(fd.X)},
                 {"generator_residual", fd.generator_residual},
                 {"reconstruction_residual", reconstruction_residual(fd, 3.0 * fd.period())},
                 {"integration_error_estimate", fd.fundamental.error_estimate()},
                 {"det_drift", fd.fundamental.det_drift()},
                 {"constant_coefficients", coef.constant()}};
    return r;
}

AnalysisReport cmd_simulate(const json& input, const std::vector<double>& start, const std::vector<double>& times,
                            std::ostream* csv, const CommandOptions& opts) {
    const LinearFlow flow = make_flow(input, opts);
    if (static_cast<int>(start.size()) != flow.dimension())
        parse_fail("start vector must have " + std::to_string(flow.dimension()) + " entries");
    if (times.empty()) parse_fail("at least one time is required");
    RealVector v(static_cast<Eigen::Index>(start.size()));
    for (std::size_t i = 0; i < start.size(); ++i) v(static_cast<Eigen::Index>(i)) = start[i];
    const ProjectivePoint p(v);
    const auto morse = morse_components_projective(flow);
    const std::size_t fwd = stable_set_index(p, flow), bwd = unstable_set_index(p, flow);

    std::vector<double> pos, neg;
    for (double t : times) (t >= 0 ? pos : neg).push_back(t);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    std::vector<double> ts;
    std::vector<ProjectivePoint> pts;
    std::vector<double> dist;
    const auto neg_pts = simulate_projective(flow, p, neg);
    for (std::size_t i = neg.size(); i-- > 0;) {
        ts.push_back(neg[i]);
        pts.push_back(neg_pts[i]);
        dist.push_back(distance_to_subspace(neg_pts[i], morse.components[bwd].basis));
    }
    const auto pos_pts = simulate_projective(flow, p, pos);
    for (std::size_t i = 0; i < pos.size(); ++i) {
        ts.push_back(pos[i]);
        pts.push_back(pos_pts[i]);
        dist.push_back(distance_to_subspace(pos_pts[i], morse.components[fwd].basis));
    }
    if (csv) write_trajectory_csv(*csv, ts, pts, dist);

    AnalysisReport r = base_report("simulate", input, opts);
    r.jordan = jordan_json(flow);
    margin_warnings(flow, r.warnings);
    json points = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const RealVector& x = pts[i].rep;
        points.push_back({{"t", ts[i]}, {"x", std::vector<double>(x.data(), x.data() + x.size())}, {"distance", dist[i]}});
    }
    r.details = {{"start", start},
                 {"forward_component", ridx(fwd)},
                 {"backward_component", ridx(bwd)},
                 {"component_rates", [&] {
                      json rates = json::array();
                      for (const auto& c : morse.components) rates.push_back(c.rate);
                      return rates;
                  }()},
                 {"trajectory", points}};
    return r;
}

AnalysisReport cmd_classify_flag(const json& input, const json& basis, const std::string& flag_dims,
                                 const CommandOptions& opts) {
    const LinearFlow flow = make_flow(input, opts);
    const FlagType type = parse_flag_type(flow.dimension(), flag_dims);
    const RealMatrix B = parse_matrix(basis, type.dims.back());
    if (B.rows() != type.n) parse_fail("basis must have " + std::to_string(type.n) + " rows");
    bool adjusted = false;
    const Flag f = Flag::from_basis(type, B, &adjusted);
    AnalysisReport r = base_report("classify-flag", input, opts);
    r.jordan = jordan_json(flow);
    margin_warnings(flow, r.warnings);
    add_classification(r, flow, type);
    if (adjusted) r.warnings.emplace_back("basis was not orthonormal and has been orthonormalized");
    const auto comps = enumerate_morse_components(flow, type);
    const CellAssignment st = stable_cell(f, flow), un = unstable_cell(f, flow);
    r.details = {{"basis", matrix_json(f.basis)},
                 {"stable_cell", ridx(find_component(comps, st.cells))},
                 {"stable_rank_margin", number_json(st.rank_margin)},
                 {"unstable_cell", ridx(find_component(comps, un.cells))},
                 {"unstable_rank_margin", number_json(un.rank_margin)},
                 {"recurrent", flag_recurrent_membership(f, flow)}};
    return r;
}

bool contradicts(const AnalysisReport& r) { return r.simulation && r.simulation->failed > 0; }

} // namespace jflow
