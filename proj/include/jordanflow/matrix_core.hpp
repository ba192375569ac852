#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "jordanflow/errors.hpp"

namespace jflow {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr int kMaxDimension = 12;

/// Numerical knobs shared by every decomposition. All of them end up echoed
/// in reports.
struct TolerancePolicy {
    double cluster_tol = 1e-8;  ///< relative eigenvalue-grouping gap
    double residual_tol = 1e-9; ///< matrix-identity residuals and rank/membership thresholds
    double sim_tol = 1e-6;      ///< simulation convergence

    /// Throws InvalidInput unless all values are positive and cluster_tol is
    /// at least 100 machine epsilons.
    void validate() const;
};

/// One group of (numerically) equal eigenvalues. For a real cluster
/// `projection` is the real generalized eigenprojection; for a conjugate pair
/// {value, conj(value)} (value has positive imaginary part) it is the real
/// projection onto the 2m-dimensional invariant subspace, and
/// `complex_projection` is the projection belonging to `value` alone.
struct SpectralCluster {
    Complex value;
    int multiplicity = 0; ///< algebraic multiplicity of `value` (per member of a pair)
    bool conjugate_pair = false;
    RealMatrix projection;
    ComplexMatrix complex_projection;

    int real_dimension() const { return conjugate_pair ? 2 * multiplicity : multiplicity; }
};

struct SpectralData {
    std::vector<SpectralCluster> clusters;
    double cluster_tol = 0.0;
    /// Smallest inter-cluster distance divided by cluster_tol * max(1, |λ|);
    /// values close to 1 mean the grouping decision was borderline.
    double min_gap_ratio = 0.0;
    /// Largest 2-norm among the projections (spectral condition).
    double max_projection_norm = 0.0;

    int dimension() const;

    /// Σ f(λ) P_λ assembled as a real matrix; f must satisfy f(conj z) = conj f(z).
    template <class F>
    RealMatrix apply(F&& f) const;
};

/// Generalized eigenprojections of A grouped by relative distance.
SpectralData complex_spectrum(const RealMatrix& A, const TolerancePolicy& pol = {});

RealMatrix matrix_exp(const RealMatrix& A);

/// Real principal logarithm. Throws BranchObstruction when an eigenvalue lies
/// on the closed negative real axis and A is not unipotent.
RealMatrix principal_log(const RealMatrix& A, const TolerancePolicy& pol = {});

double spectral_radius(const RealMatrix& A, const TolerancePolicy& pol = {});

/// Smallest k ≤ n-1 with A^{k+1} ≈ 0, or nullopt when A is not nilpotent.
std::optional<int> nilpotency_index(const RealMatrix& A, const TolerancePolicy& pol = {});

/// log(I + T) = T - T²/2 + ... for nilpotent T; exact up to rounding.
RealMatrix unipotent_log(const RealMatrix& u);

/// Throws InvalidInput for non-square, empty, oversize or non-finite input.
void require_square_finite(const RealMatrix& A, const char* what);

double operator_norm(const RealMatrix& A);

/// Σ_λ Re(P_λᴴ P_λ) scaled to determinant 1: the inner product in which the
/// spectral subspaces are mutually orthogonal.
RealMatrix projection_gram(const SpectralData& spec);

template <class F>
RealMatrix SpectralData::apply(F&& f) const {
    const int n = dimension();
    RealMatrix out = RealMatrix::Zero(n, n);
    for (const auto& c : clusters) {
        if (c.conjugate_pair) {
            const Complex fz = f(c.value);
            out += 2.0 * (fz * c.complex_projection).real();
        } else {
            out += f(c.value).real() * c.projection;
        }
    }
    return out;
}

} // namespace jflow
