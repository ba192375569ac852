#pragma once

#include <utility>
#include <vector>

#include "jordanflow/flag.hpp"

namespace jflow {

inline constexpr int kMaxHarmonics = 16;
inline constexpr int kMaxFloquetPower = 64;

struct Harmonic {
    int k = 1;
    RealMatrix A; ///< cos coefficient
    RealMatrix B; ///< sin coefficient
};

/// X(t) = A₀ + Σ_k (A_k cos(2πkt/T) + B_k sin(2πkt/T)).
struct PeriodicCoefficient {
    double T = 1.0;
    RealMatrix A0;
    std::vector<Harmonic> harmonics;

    /// Throws InvalidInput for a bad period, shape mismatch, repeated or
    /// out-of-range k, non-finite entries or a coefficient with trace above
    /// residual_tol·max(1, ‖·‖).
    void validate(const TolerancePolicy& pol = {}) const;
    int dimension() const { return static_cast<int>(A0.rows()); }
    RealMatrix operator()(double t) const;
    /// Bound on sup_t ‖X(t)‖ (Frobenius).
    double norm_bound() const;
    bool constant() const;
};

struct IntegrationOptions {
    int periods = 1;          ///< samples cover [0, periods·T]
    double integ_tol = 1e-8;  ///< error budget per unit time
    bool check_budget = true; ///< raise StiffnessSuspected when exceeded
};

/// Sampled g(t) with g' = X(t)g, g(0) = I.
class FundamentalSolution {
public:
    const PeriodicCoefficient& coefficient() const { return coef_; }
    int steps() const { return steps_; } ///< per period
    double step_size() const { return h_; }
    double horizon() const { return h_ * static_cast<double>(samples_.size() - 1); }
    const std::vector<RealMatrix>& samples() const { return samples_; }
    const RealMatrix& monodromy() const { return monodromy_; }
    /// Richardson estimate of the error in g(T).
    double error_estimate() const { return error_estimate_; }
    /// Largest |det g − 1| seen before the per-step renormalization.
    double det_drift() const { return det_drift_; }

    /// Cubic Hermite interpolation inside the sampled horizon, extended by
    /// g(t + kT) = g(t)·g(T)ᵏ elsewhere.
    RealMatrix operator()(double t) const;

private:
    friend FundamentalSolution integrate_fundamental(const PeriodicCoefficient&, int, const IntegrationOptions&);

    PeriodicCoefficient coef_;
    int steps_ = 0;
    double h_ = 0.0;
    std::vector<RealMatrix> samples_;
    std::vector<RealMatrix> slopes_;
    RealMatrix monodromy_;
    RealMatrix monodromy_inv_;
    double error_estimate_ = 0.0;
    double det_drift_ = 0.0;
};

/// Classical RK4 on a uniform grid with g ← g·det(g)^{−1/n} after each step.
/// Requires steps ≥ 64. Throws StiffnessSuspected when h·sup‖X‖ leaves the
/// stability region or the error estimate exceeds the budget.
FundamentalSolution integrate_fundamental(const PeriodicCoefficient& coef, int steps,
                                          const IntegrationOptions& opts = {});

struct FloquetGenerator {
    int m = 1;
    RealMatrix X;            ///< g(T)ᵐ = exp(mT·X)
    double residual = 0.0;   ///< ‖g(T)ᵐ − exp(mT·X)‖
};

/// Smallest m in {1, 2, 4, …, 64} for which the m-th power of the elliptic
/// factor has a principal real logarithm. Throws NoRealLog otherwise.
FloquetGenerator floquet_generator(const RealMatrix& mono, double T, const TolerancePolicy& pol = {});

struct FloquetData {
    FundamentalSolution fundamental;
    double T = 1.0;
    int m = 1;
    RealMatrix monodromy;
    RealMatrix X;
    double generator_residual = 0.0;
    LinearFlow flow; ///< exp(tX) with its Jordan decomposition

    double period() const { return m * T; }
};

FloquetData floquet_analyze(FundamentalSolution fund, const TolerancePolicy& pol = {});

/// a(t) = g(t)·exp(−tX), t reduced mod mT.
RealMatrix periodic_factor(const FloquetData& fd, double t);

/// sup over `samples` uniform t ∈ [0, horizon] of ‖g(t) − a(t)exp(tX)‖.
double reconstruction_residual(const FloquetData& fd, double horizon, int samples = 64);

/// ρ_s(t) = g(t + s)·g(s)⁻¹.
RealMatrix skew_transport(const FloquetData& fd, double s, double t);

/// φᵗ(s, x) = (s + t mod mT, ρ_s(t)x), renormalized chunk by chunk.
std::pair<double, Flag> skew_step(const FloquetData& fd, double s, const Flag& x, double t);
std::pair<double, ProjectivePoint> skew_step(const FloquetData& fd, double s, const ProjectivePoint& x, double t);

/// Skew orbit of (s, x) sampled at increasing nonnegative times.
std::vector<std::pair<double, Flag>> simulate_skew(const FloquetData& fd, double s, const Flag& x,
                                                   const std::vector<double>& times);

/// Components {(s, a(s)x) : x in a component of exp(tX)}; the base
/// components are those of the autonomous flow.
std::vector<FlagMorseComponent> floquet_morse_components(const FloquetData& fd, const FlagType& type);

/// a(s)⁻¹y, the fiber coordinate at s.
Flag fiber_coordinate(const FloquetData& fd, double s, const Flag& y);

/// component_distance of a(s)⁻¹y to c.
double floquet_component_distance(const FloquetData& fd, double s, const Flag& y, const FlagMorseComponent& c);
bool floquet_recurrent_membership(const FloquetData& fd, double s, const Flag& y);

/// F(s, y) = height_lyapunov(a(s)⁻¹y) in the adapted metric of X.
double floquet_lyapunov(const FloquetData& fd, double s, const Flag& y);

} // namespace jflow
