#pragma once

#include <cstddef>
#include <vector>

#include "jordanflow/projective.hpp"

namespace jflow {

/// Signature d₁ < … < d_k < n of a flag manifold. dims = (1) is projective
/// space, (1, …, n−1) the full flag manifold.
struct FlagType {
    int n = 0;
    std::vector<int> dims;

    FlagType() = default;
    /// Throws InvalidInput unless 1 ≤ d₁ < … < d_k < n.
    FlagType(int n, std::vector<int> dims);
    static FlagType full(int n);

    /// Increment sizes d_i − d_{i−1}, followed by the residual block n − d_k.
    std::vector<int> increments() const;
    /// Σ_{i<i'} δ_i δ_{i'} over increments (residual block included).
    int manifold_dimension() const;
    int length() const { return static_cast<int>(dims.size()); }
    bool operator==(const FlagType&) const = default;
};

/// Nested subspaces V₁ ⊂ … ⊂ V_k, V_i spanned by the first d_i columns of
/// an orthonormal basis.
struct Flag {
    FlagType type;
    RealMatrix basis; ///< n × d_k

    /// Orthonormalizes columns in order (QR with positive diagonal), which
    /// keeps every V_i. `adjusted` reports whether the input was off by more
    /// than 1e-8 from orthonormal. Throws InvalidInput for rank-deficient
    /// input.
    static Flag from_basis(FlagType type, const RealMatrix& basis, bool* adjusted = nullptr);
    /// Coordinate flag spanned by e₁, e₂, ….
    static Flag standard(FlagType type);

    RealMatrix subspace(int i) const { return basis.leftCols(type.dims[static_cast<std::size_t>(i)]); }
};

/// max_i ‖P_{V_i} − P_{W_i}‖₂ over the orthogonal projections.
double flag_distance(const Flag& a, const Flag& b);

/// Plücker point of span(columns) in ⋀ᵖℝⁿ (lexicographic coordinates).
ProjectivePoint plucker_embed(const RealMatrix& columns);

struct ComponentDimensions {
    int component = 0; ///< dimension of the component itself
    int unstable = 0;  ///< n_w
    int stable = 0;
    bool operator==(const ComponentDimensions&) const = default;
};

/// One Morse component: cells[i][j] dimensions of rate space j (decreasing
/// rate order) placed in increment i (residual block last).
struct FlagMorseComponent {
    std::vector<std::vector<int>> cells;
    ComponentDimensions dims;
};

/// Pair-counting dimensions: slot pairs (a in increment i, b in a later
/// increment) contribute to the unstable, stable or component count as
/// rate(b) − rate(a) is positive, negative or zero.
ComponentDimensions component_dimensions(const std::vector<std::vector<int>>& cells,
                                         const std::vector<double>& rates);

/// All nonnegative integer tables with row sums = increments and column sums
/// = multiplicities, in lexicographically decreasing row-major order. The
/// first is the attractor (largest rates earliest), the last the repeller.
std::vector<FlagMorseComponent> enumerate_morse_components(const std::vector<double>& rates,
                                                           const std::vector<int>& multiplicities,
                                                           const FlagType& type);
std::vector<FlagMorseComponent> enumerate_morse_components(const LinearFlow& flow, const FlagType& type);

/// Index of the component with the given table, or components.size().
std::size_t find_component(const std::vector<FlagMorseComponent>& components,
                           const std::vector<std::vector<int>>& cells);

/// Table of the Bruhat cell together with the smallest singular-value
/// margin (ratio to the rank threshold, ≥ 1) over all rank decisions.
struct CellAssignment {
    std::vector<std::vector<int>> cells;
    double rank_margin = 0.0;
};

/// Cell of the stable set containing f, from the ranks dim(V_i ∩ G_j) with
/// G_j the sum of the j slowest rate spaces. Throws RankAmbiguous when a
/// singular value falls within a factor 100 of the threshold.
CellAssignment stable_cell(const Flag& f, const LinearFlow& flow);
/// Cell of the unstable set, from dim(V_i ∩ F_j), F_j the j fastest.
CellAssignment unstable_cell(const Flag& f, const LinearFlow& flow);

std::size_t bruhat_cell(const Flag& f, const LinearFlow& flow, const std::vector<FlagMorseComponent>& components);
std::size_t unstable_cell_index(const Flag& f, const LinearFlow& flow,
                                const std::vector<FlagMorseComponent>& components);

/// How far f is from the component: the largest sine of the principal angle
/// that must vanish for dim(V_i ∩ E_j) to reach its required value.
double component_distance(const Flag& f, const LinearFlow& flow, const FlagMorseComponent& c);

struct NearestComponent {
    std::size_t index = 0;
    double distance = 0.0;
};
NearestComponent nearest_component(const Flag& f, const LinearFlow& flow,
                                   const std::vector<FlagMorseComponent>& components);

/// A flag lying in the component, built from rate-space basis vectors.
Flag component_flag(const LinearFlow& flow, const FlagType& type, const FlagMorseComponent& c);

/// gᵗ applied to the basis and re-orthonormalized, in renormalized chunks.
std::vector<Flag> simulate_flag(const LinearFlow& flow, const Flag& start, const std::vector<double>& times);

struct FlowClassification {
    bool h_regular = false;
    bool conformal = false;
    bool structurally_stable = false;
    FlagType type;
    std::vector<double> rates;
    std::vector<int> multiplicities;
    std::vector<FlagMorseComponent> components;
    std::size_t attractor = 0;
    std::size_t repeller = 0;
    double rate_gap_ratio = 0.0;
    double nilpotent_norm = 0.0;
    double spectral_gap_ratio = 0.0;
};

FlowClassification classify_flow(const LinearFlow& flow, const FlagType& type);

/// Each V_i invariant under the hyperbolic and nilpotent generators.
bool flag_recurrent_membership(const Flag& f, const LinearFlow& flow);

/// −Σ_i tr(H P_{V_i}) with orthogonal projections; non-increasing along
/// gᵗ when H is self-adjoint and commutes with the rest of the generator.
double height_lyapunov(const Flag& f, const RealMatrix& H);
/// Same function in the flow's adapted inner product.
double height_lyapunov(const Flag& f, const LinearFlow& flow);

} // namespace jflow
