#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jordanflow/floquet.hpp"

namespace jflow {

inline constexpr const char* kSchemaVersion = "jf-schema-1";

/// Malformed input document or option value (CLI exit code 2).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exit code the CLI uses for a library error kind.
int exit_code(ErrorKind kind) noexcept;
inline constexpr int kExitParse = 2;
inline constexpr int kExitContradiction = 4;

/// {"n": n, "rows": [[...], ...]}; n × n unless `cols` is given.
RealMatrix parse_matrix(const nlohmann::json& j, std::optional<int> cols = std::nullopt);
nlohmann::json matrix_json(const RealMatrix& A);
/// {"T": T, "A0": [[...]], "harmonics": [{"k": 1, "A": [[...]], "B": [[...]]}, ...]}
PeriodicCoefficient parse_periodic(const nlohmann::json& j);
/// "1,2" → FlagType(n, {1, 2}); throws ParseError.
FlagType parse_flag_type(int n, const std::string& dims);

/// FNV-1a (64 bit) of the compact dump, as 16 hex digits.
std::string input_hash(const nlohmann::json& input);

/// Finite doubles as numbers, ±inf and nan as strings.
nlohmann::json number_json(double x);
double number_from_json(const nlohmann::json& j);

struct ComponentRow {
    std::size_t index = 0;
    std::vector<std::vector<int>> cells;
    std::vector<double> rate_sums; ///< Σ_j cells[i][j]·rate_j per increment
    ComponentDimensions dims;
    bool attractor = false;
    bool repeller = false;
    bool operator==(const ComponentRow&) const = default;
};

struct SimulationSummary {
    int starts = 0;
    int passed = 0;
    int failed = 0;
    int ambiguous = 0; ///< starts whose cell could not be decided
    double horizon = 0.0;
    double worst_residual = 0.0;
    std::uint64_t seed = 0;
    bool operator==(const SimulationSummary&) const = default;
};

struct AnalysisReport {
    std::string schema = kSchemaVersion;
    std::string command;
    nlohmann::json input;
    std::string input_hash;
    TolerancePolicy tolerances;
    std::string time_mode = "continuous";
    nlohmann::json jordan;         ///< factors, residuals and spectrum (or null)
    nlohmann::json classification; ///< flow classification (or null)
    std::vector<ComponentRow> components;
    std::optional<SimulationSummary> simulation;
    nlohmann::json details = nlohmann::json::object(); ///< command specific
    std::vector<std::string> warnings;

    bool operator==(const AnalysisReport&) const;
};

nlohmann::json to_json(const AnalysisReport& r);
/// Throws ParseError when a required field is missing or has the wrong type.
AnalysisReport report_from_json(const nlohmann::json& j);

struct CommandOptions {
    TolerancePolicy tolerances;
    TimeMode time = TimeMode::Continuous;
    Model model = Model::Special;
};

AnalysisReport cmd_decompose(const nlohmann::json& input, const CommandOptions& opts);

/// Classification and component table for the flag type; with simulate > 0,
/// that many random flags are pushed forward and backward and compared with
/// the predicted cells.
AnalysisReport cmd_analyze(const nlohmann::json& input, const std::string& flag_dims, int simulate,
                           std::uint64_t seed, const CommandOptions& opts);

AnalysisReport cmd_chain_oracle(const nlohmann::json& input, int resolution, double eps, double min_time,
                                std::optional<double> reference_radius, const CommandOptions& opts);

AnalysisReport cmd_floquet(const nlohmann::json& input, int steps, const std::string& flag_dims,
                           const CommandOptions& opts);

/// Projective trajectory from `start` at `times`, with the distance to the
/// predicted limit component; the CSV is written when `csv` is non-null.
AnalysisReport cmd_simulate(const nlohmann::json& input, const std::vector<double>& start,
                            const std::vector<double>& times, std::ostream* csv, const CommandOptions& opts);

/// Stable and unstable cells of one flag given by a basis document.
AnalysisReport cmd_classify_flag(const nlohmann::json& input, const nlohmann::json& basis,
                                 const std::string& flag_dims, const CommandOptions& opts);

/// Whether the report's simulation cross-check found a contradiction.
bool contradicts(const AnalysisReport& r);

} // namespace jflow
