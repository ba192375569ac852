#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "jordanflow/jordan.hpp"

namespace jflow {

enum class TimeMode { Continuous, Discrete };

/// Eigenspace of the hyperbolic part for one exponential rate: Re λ of X in
/// continuous time, log|λ| of g in discrete time.
struct RateSpace {
    double rate = 0.0;
    double growth = 1.0; ///< eigenvalue of h (time-one map), exp(rate)
    int dimension = 0;
    RealMatrix projection; ///< spectral projection (oblique in general)
    RealMatrix basis;      ///< orthonormal basis of the eigenspace
};

/// A linearly induced flow gᵗ together with its Jordan decomposition and the
/// hyperbolic rate filtration every dynamical prediction is built from.
class LinearFlow {
public:
    explicit LinearFlow(AdditiveJordan dec, TolerancePolicy pol = {});
    explicit LinearFlow(MultiplicativeJordan dec, TolerancePolicy pol = {});

    static LinearFlow continuous(const RealMatrix& X, TolerancePolicy pol = {}, Model model = Model::Special);
    static LinearFlow discrete(const RealMatrix& g, TolerancePolicy pol = {}, Model model = Model::Special);

    TimeMode mode() const { return mode_; }
    int dimension() const { return static_cast<int>(source().rows()); }
    const TolerancePolicy& policy() const { return pol_; }

    const RealMatrix& source() const;
    const AdditiveJordan* additive() const { return std::get_if<AdditiveJordan>(&dec_); }
    const MultiplicativeJordan* multiplicative() const { return std::get_if<MultiplicativeJordan>(&dec_); }

    /// gᵗ; discrete flows require integral t.
    RealMatrix propagator(double t) const;
    FlowFactors factors(double t) const;

    /// H (continuous) or log h (discrete).
    const RealMatrix& hyperbolic_generator() const { return hyperbolic_generator_; }
    /// N (continuous) or log u (discrete).
    const RealMatrix& nilpotent_generator() const { return nilpotent_generator_; }
    /// E (continuous) or the elliptic factor e (discrete).
    const RealMatrix& elliptic_part() const;

    /// Rate spaces in strictly decreasing rate order.
    const std::vector<RateSpace>& rate_spaces() const { return rates_; }
    std::vector<double> rates() const;
    std::vector<int> multiplicities() const;

    /// ‖N‖ (continuous) or ‖u - I‖ (discrete), Frobenius.
    double nilpotent_norm() const;
    bool conformal() const;

    /// Smallest relative distance between distinct rates in units of
    /// cluster_tol (infinity when there is a single rate).
    double rate_gap_ratio() const { return rate_gap_ratio_; }

    /// Inner product in which the elliptic part acts isometrically, the rate
    /// spaces are orthogonal and the hyperbolic generator is self-adjoint.
    /// Only defined for conformal flows in general; for flows with a
    /// nilpotent part it is assembled from the same projections.
    RealMatrix adapted_metric() const;

private:
    void build_rates();

    TimeMode mode_;
    std::variant<AdditiveJordan, MultiplicativeJordan> dec_;
    TolerancePolicy pol_;
    RealMatrix hyperbolic_generator_;
    RealMatrix nilpotent_generator_;
    std::vector<RateSpace> rates_;
    double rate_gap_ratio_ = 0.0;
};

/// Propagates column vectors by gᵗ in chunks short enough to stay finite,
/// calling `renormalize` after every chunk (only directions matter).
class FlowStepper {
public:
    explicit FlowStepper(const LinearFlow& flow);
    RealMatrix advance(RealMatrix x, double dt, const std::function<void(RealMatrix&)>& renormalize) const;

private:
    const LinearFlow& flow_;
    RealMatrix g_, g_inv_;
    double chunk_ = 1.0;
};

/// Orthonormal basis for the column span of P when its rank is known.
RealMatrix orthonormal_range(const RealMatrix& P, int rank);

} // namespace jflow
