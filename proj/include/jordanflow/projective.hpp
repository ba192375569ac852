#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "jordanflow/flow.hpp"

namespace jflow {

/// A line in ℝⁿ stored as a unit vector whose first nonzero coordinate is
/// positive, so equal lines have equal representatives.
struct ProjectivePoint {
    RealVector rep;

    ProjectivePoint() = default;
    /// Normalizes v; throws InvalidInput for zero or non-finite vectors.
    explicit ProjectivePoint(const RealVector& v);

    int dimension() const { return static_cast<int>(rep.size()); }
    bool operator==(const ProjectivePoint& o) const { return rep == o.rep; }
};

ProjectivePoint basis_point(int n, int i);

/// Chordal distance min(‖x − y‖, ‖x + y‖) between unit representatives.
double projective_distance(const ProjectivePoint& p, const ProjectivePoint& q);
/// Same metric measured in the inner product xᵀMy (representatives rescaled
/// to M-unit length).
double projective_distance(const ProjectivePoint& p, const ProjectivePoint& q, const RealMatrix& M);

/// Distance from p to the nearest point of ℙ(span Q), Q orthonormal columns.
double distance_to_subspace(const ProjectivePoint& p, const RealMatrix& Q);

struct ProjectiveComponent {
    double rate = 0.0;
    double eigenvalue = 1.0; ///< eigenvalue of the time-one hyperbolic factor
    RealMatrix basis;        ///< orthonormal basis of the eigenspace
    RealMatrix projection;   ///< spectral projection onto it
    int dimension() const { return static_cast<int>(basis.cols()); }
};

/// Components in decreasing rate order; the first is the attractor, the
/// last the repeller.
struct ProjectiveMorseDecomposition {
    std::vector<ProjectiveComponent> components;
    std::size_t attractor_index() const { return 0; }
    std::size_t repeller_index() const { return components.empty() ? 0 : components.size() - 1; }
};

ProjectiveMorseDecomposition morse_components_projective(const LinearFlow& flow);

/// ‖P_i · rep‖ for each component, in component order.
std::vector<double> projection_profile(const ProjectivePoint& p, const ProjectiveMorseDecomposition& morse);

/// Component containing the ω-limit of p: the first index whose projection
/// norm exceeds residual_tol.
std::size_t stable_set_index(const ProjectivePoint& p, const LinearFlow& flow);
/// Component containing the ω*-limit (backward time): the last such index.
std::size_t unstable_set_index(const ProjectivePoint& p, const LinearFlow& flow);

/// [Nᵏx] for the largest k with Nᵏx numerically nonzero. Throws NotNilpotent.
ProjectivePoint unipotent_limit(const ProjectivePoint& p, const RealMatrix& N, const TolerancePolicy& pol = {});

/// Index of the rate space containing p, if any.
std::optional<std::size_t> fixed_component(const ProjectivePoint& p, const LinearFlow& flow);

bool recurrent_membership(const ProjectivePoint& p, const LinearFlow& flow);
bool chain_recurrent_membership(const ProjectivePoint& p, const LinearFlow& flow);

/// [gᵗ p] at each requested time, integrating from t = 0 in renormalized
/// chunks. Discrete flows require integer times.
std::vector<ProjectivePoint> simulate_projective(const LinearFlow& flow, const ProjectivePoint& start,
                                                 const std::vector<double>& times);

/// Header `t,x1,...,xn,distance`.
void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const std::vector<ProjectivePoint>& points, const std::vector<double>& distance);

/// Sample of ℙ¹ (uniform angle) or ℙ² (Fibonacci points on the upper
/// hemisphere).
std::vector<ProjectivePoint> projective_grid(int n, int resolution);

struct ChainGraph {
    std::vector<ProjectivePoint> grid;
    double eps = 0.0;
    double min_time = 0.0;
    double covering_radius = 0.0;
    std::vector<std::vector<int>> edges; ///< x → y iff d(g^T x, y) < eps
};

ChainGraph build_chain_graph(const LinearFlow& flow, int resolution, double eps, double min_time);

/// Component id per vertex, ids numbered in order of completion.
std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& edges);

struct ChainOracleResult {
    ChainGraph graph;
    std::vector<bool> marked;
    /// Grid points within reference_radius of some ℙV_λ.
    std::vector<bool> reference;
    double reference_radius = 0.0;
    double agreement = 0.0;
    std::size_t marked_count() const;
};

/// Grid points lying on a cycle of the ε-chain graph. Throws GridTooLarge
/// above kMaxGridPoints and InvalidInput unless n ∈ {2, 3}.
ChainOracleResult chain_oracle(const LinearFlow& flow, int resolution, double eps, double min_time,
                               std::optional<double> reference_radius = std::nullopt);

inline constexpr int kMaxGridPoints = 10000;

} // namespace jflow
