#include "jordanflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jflow {

namespace {

std::int64_t require_integral(double t) {
    if (!std::isfinite(t) || std::abs(t - std::round(t)) > 1e-12 * std::max(1.0, std::abs(t)))
        throw Error(ErrorKind::InvalidInput, "discrete flows only accept integer times");
    return static_cast<std::int64_t>(std::llround(t));
}

} // namespace

LinearFlow::LinearFlow(AdditiveJordan dec, TolerancePolicy pol)
    : mode_(TimeMode::Continuous), dec_(std::move(dec)), pol_(pol) {
    const auto& d = std::get<AdditiveJordan>(dec_);
    hyperbolic_generator_ = d.hyperbolic;
    nilpotent_generator_ = d.nilpotent;
    build_rates();
}

LinearFlow::LinearFlow(MultiplicativeJordan dec, TolerancePolicy pol)
    : mode_(TimeMode::Discrete), dec_(std::move(dec)), pol_(pol) {
    const auto& d = std::get<MultiplicativeJordan>(dec_);
    hyperbolic_generator_ = d.log_hyperbolic;
    nilpotent_generator_ = unipotent_log(d.unipotent);
    build_rates();
}

LinearFlow LinearFlow::continuous(const RealMatrix& X, TolerancePolicy pol, Model model) {
    pol.validate();
    return LinearFlow(additive_jordan(X, pol, model), pol);
}

LinearFlow LinearFlow::discrete(const RealMatrix& g, TolerancePolicy pol, Model model) {
    pol.validate();
    return LinearFlow(multiplicative_jordan(g, pol, model), pol);
}

const RealMatrix& LinearFlow::source() const {
    if (const auto* a = additive()) return a->source;
    return std::get<MultiplicativeJordan>(dec_).source;
}

const RealMatrix& LinearFlow::elliptic_part() const {
    if (const auto* a = additive()) return a->elliptic;
    return std::get<MultiplicativeJordan>(dec_).elliptic;
}

RealMatrix LinearFlow::propagator(double t) const {
    if (const auto* a = additive()) return matrix_exp(t * a->source);
    return integer_power(std::get<MultiplicativeJordan>(dec_).source, require_integral(t));
}

FlowFactors LinearFlow::factors(double t) const {
    if (const auto* a = additive()) return flow_at(t, *a);
    return flow_at(require_integral(t), std::get<MultiplicativeJordan>(dec_));
}

void LinearFlow::build_rates() {
    const SpectralData& spec = additive() ? additive()->spectrum : multiplicative()->spectrum;
    const bool cont = mode_ == TimeMode::Continuous;
    const int n = dimension();

    struct Entry {
        double rate;
        const SpectralCluster* cluster;
    };
    std::vector<Entry> entries;
    for (const auto& c : spec.clusters)
        entries.push_back({cont ? c.value.real() : std::log(std::abs(c.value)), &c});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.rate > b.rate; });

    // Single linkage on sorted rates reduces to comparing neighbours.
    auto close = [&](double a, double b) {
        return std::abs(a - b) < pol_.cluster_tol * std::max({1.0, std::abs(a), std::abs(b)});
    };
    rates_.clear();
    rate_gap_ratio_ = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i + 1;
        while (j < entries.size() && close(entries[j - 1].rate, entries[j].rate)) ++j;
        RateSpace rs;
        rs.projection = RealMatrix::Zero(n, n);
        double weighted = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            const int d = entries[k].cluster->real_dimension();
            rs.projection += entries[k].cluster->projection;
            rs.dimension += d;
            weighted += d * entries[k].rate;
        }
        rs.rate = weighted / rs.dimension;
        rs.growth = std::exp(rs.rate);
        rs.basis = orthonormal_range(rs.projection, rs.dimension);
        if (!rates_.empty()) {
            const double a = rates_.back().rate, b = rs.rate;
            rate_gap_ratio_ = std::min(
                rate_gap_ratio_, std::abs(a - b) / (pol_.cluster_tol * std::max({1.0, std::abs(a), std::abs(b)})));
        }
        rates_.push_back(std::move(rs));
        i = j;
    }
}

std::vector<double> LinearFlow::rates() const {
    std::vector<double> out;
    for (const auto& r : rates_) out.push_back(r.rate);
    return out;
}

std::vector<int> LinearFlow::multiplicities() const {
    std::vector<int> out;
    for (const auto& r : rates_) out.push_back(r.dimension);
    return out;
}

double LinearFlow::nilpotent_norm() const {
    if (const auto* a = additive()) return a->nilpotent.norm();
    const auto& m = std::get<MultiplicativeJordan>(dec_);
    return (m.unipotent - RealMatrix::Identity(dimension(), dimension())).norm();
}

bool LinearFlow::conformal() const {
    return nilpotent_norm() <= 100.0 * pol_.residual_tol * std::max(1.0, source().norm());
}

RealMatrix LinearFlow::adapted_metric() const {
    return projection_gram(additive() ? additive()->spectrum : multiplicative()->spectrum);
}

FlowStepper::FlowStepper(const LinearFlow& flow) : flow_(flow) {
    if (flow.mode() == TimeMode::Discrete) {
        g_ = flow.source();
        g_inv_ = g_.inverse();
    } else {
        chunk_ = 20.0 / std::max(1e-12, flow.source().cwiseAbs().colwise().sum().maxCoeff());
    }
}

RealMatrix FlowStepper::advance(RealMatrix x, double dt, const std::function<void(RealMatrix&)>& renormalize) const {
    if (flow_.mode() == TimeMode::Discrete) {
        const std::int64_t steps = require_integral(dt);
        const RealMatrix& m = steps >= 0 ? g_ : g_inv_;
        for (std::int64_t k = 0; k < (steps >= 0 ? steps : -steps); ++k) {
            x = m * x;
            renormalize(x);
        }
        return x;
    }
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / chunk_)));
    const RealMatrix step = matrix_exp((dt / pieces) * flow_.source());
    for (int k = 0; k < pieces; ++k) {
        x = step * x;
        renormalize(x);
    }
    if (!x.allFinite()) throw Error(ErrorKind::Overflow, "trajectory left the finite range");
    return x;
}

RealMatrix orthonormal_range(const RealMatrix& P, int rank) {
    if (rank <= 0) return RealMatrix(P.rows(), 0);
    Eigen::JacobiSVD<RealMatrix> svd(P, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(rank);
}

} // namespace jflow
