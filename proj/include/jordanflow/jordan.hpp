#pragma once

#include <cstdint>
#include <vector>

#include "jordanflow/matrix_core.hpp"

namespace jflow {

/// Which matrix model an input lives in: sl(n)/SL(n) (traceless, det 1), or
/// the general linear model used for projective-space dynamics.
enum class Model { Special, General };

struct SemisimpleNilpotent {
    RealMatrix semisimple;
    RealMatrix nilpotent;
};

/// X = E + H + N with commuting elliptic, hyperbolic and nilpotent parts.
struct AdditiveJordan {
    RealMatrix source;
    RealMatrix elliptic;
    RealMatrix hyperbolic;
    RealMatrix nilpotent;
    SpectralData spectrum; ///< spectral data of the source
};

/// g = e·h·u with commuting elliptic, hyperbolic and unipotent factors.
struct MultiplicativeJordan {
    RealMatrix source;
    RealMatrix elliptic;
    RealMatrix hyperbolic;
    RealMatrix unipotent;
    RealMatrix log_hyperbolic; ///< exp(log_hyperbolic) = hyperbolic
    SpectralData spectrum;
};

/// Gram matrix M of an inner product in which e acts isometrically.
struct InvariantMetric {
    RealMatrix gram;
};

struct FlowFactors {
    RealMatrix g, e, h, u;
};

/// Jordan–Chevalley split A = S + N, S assembled from the clustered spectral
/// projections so the clustering tolerance is the single knob.
SemisimpleNilpotent sn_decompose(const RealMatrix& A, const TolerancePolicy& pol = {});

AdditiveJordan additive_jordan(const RealMatrix& X, const TolerancePolicy& pol = {}, Model model = Model::Special);

/// s = Σ λP_λ, u = s⁻¹g, h = Σ|λ|P_λ, e = s·h⁻¹, log h = Σ log|λ| P_λ.
MultiplicativeJordan multiplicative_jordan(const RealMatrix& g, const TolerancePolicy& pol = {},
                                           Model model = Model::Special);

/// Continuous-time flow gᵗ = exp(tX) with eᵗ = exp(tE), hᵗ = exp(tH), uᵗ = exp(tN).
FlowFactors flow_at(double t, const AdditiveJordan& dec);

/// Discrete-time flow: gᵗ and eᵗ as integer powers, hᵗ = exp(t log h), uᵗ = exp(t log u).
FlowFactors flow_at(std::int64_t t, const MultiplicativeJordan& dec);

InvariantMetric invariant_metric(const RealMatrix& e, const TolerancePolicy& pol = {});

/// Index sets {i₁ < … < i_p} of {0,…,n-1} in lexicographic order; the wedge basis.
std::vector<std::vector<int>> wedge_basis(int n, int p);

/// Compound matrix ρ(g) on ⋀ᵖ: entry (I, J) is the minor det g[I, J].
RealMatrix wedge_representation(const RealMatrix& g, int p);

/// d₁ρ(X) with (d₁ρX)(v₁∧…∧v_p) = Σᵢ v₁∧…∧Xvᵢ∧…∧v_p.
RealMatrix wedge_infinitesimal(const RealMatrix& X, int p);

/// Coordinates of v₁∧…∧v_p (columns of `columns`) in the wedge basis.
RealVector wedge_product(const RealMatrix& columns);

RealMatrix integer_power(const RealMatrix& A, std::int64_t k);

} // namespace jflow
