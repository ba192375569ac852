#include "jordanflow/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace jflow {

namespace {

bool traceless(const RealMatrix& A, const TolerancePolicy& pol) {
    return std::abs(A.trace()) <= pol.residual_tol * std::max(1.0, A.norm());
}

double reduce(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r >= period ? 0.0 : r;
}

void renormalize_det(RealMatrix& g, double* drift) {
    const double det = g.determinant();
    if (drift) *drift = std::max(*drift, std::abs(det - 1.0));
    if (!(det > 0.0) || !std::isfinite(det))
        throw Error(ErrorKind::StiffnessSuspected, "fundamental solution lost orientation or became singular");
    g /= std::pow(det, 1.0 / static_cast<double>(g.rows()));
}

std::vector<RealMatrix> rk4(const PeriodicCoefficient& coef, int total_steps, double h, double* drift) {
    const int n = coef.dimension();
    std::vector<RealMatrix> out;
    out.reserve(static_cast<std::size_t>(total_steps) + 1);
    RealMatrix g = RealMatrix::Identity(n, n);
    out.push_back(g);
    for (int i = 0; i < total_steps; ++i) {
        const double t = i * h;
        const RealMatrix Xa = coef(t), Xm = coef(t + 0.5 * h), Xb = coef(t + h);
        const RealMatrix k1 = Xa * g;
        const RealMatrix k2 = Xm * (g + 0.5 * h * k1);
        const RealMatrix k3 = Xm * (g + 0.5 * h * k2);
        const RealMatrix k4 = Xb * (g + h * k3);
        g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        renormalize_det(g, drift);
        out.push_back(g);
    }
    return out;
}

template <class Renorm>
std::pair<double, RealMatrix> transport(const FloquetData& fd, double s, RealMatrix x, double t, Renorm&& renorm) {
    const double chunk = 0.5 * fd.T;
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(t) / chunk)));
    const double dt = t / pieces;
    for (int k = 0; k < pieces; ++k) {
        x = skew_transport(fd, s, dt) * x;
        renorm(x);
        s = reduce(s + dt, fd.period());
    }
    if (!x.allFinite()) throw Error(ErrorKind::Overflow, "skew orbit left the finite range");
    return {s, std::move(x)};
}

} // namespace

void PeriodicCoefficient::validate(const TolerancePolicy& pol) const {
    if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidInput, "period must be positive and finite");
    require_square_finite(A0, "A0");
    const auto n = A0.rows();
    if (n < 1 || n > kMaxDimension) throw Error(ErrorKind::DimensionTooLarge, "unsupported dimension");
    if (!traceless(A0, pol)) throw Error(ErrorKind::InvalidInput, "A0 is not traceless");
    if (static_cast<int>(harmonics.size()) > kMaxHarmonics)
        throw Error(ErrorKind::InvalidInput, "at most 16 harmonics are supported");
    std::set<int> seen;
    for (const auto& h : harmonics) {
        if (h.k < 1 || h.k > kMaxHarmonics || !seen.insert(h.k).second)
            throw Error(ErrorKind::InvalidInput, "harmonic index " + std::to_string(h.k) + " is repeated or outside 1..16");
        for (const RealMatrix* m : {&h.A, &h.B}) {
            if (m->rows() != n || m->cols() != n || !m->allFinite())
                throw Error(ErrorKind::InvalidInput, "harmonic " + std::to_string(h.k) + " has a bad shape or entry");
            if (!traceless(*m, pol))
                throw Error(ErrorKind::InvalidInput, "harmonic " + std::to_string(h.k) + " is not traceless");
        }
    }
}

RealMatrix PeriodicCoefficient::operator()(double t) const {
    RealMatrix X = A0;
    const double w = 2.0 * std::numbers::pi / T;
    for (const auto& h : harmonics) X += std::cos(w * h.k * t) * h.A + std::sin(w * h.k * t) * h.B;
    return X;
}

double PeriodicCoefficient::norm_bound() const {
    double b = A0.norm();
    for (const auto& h : harmonics) b += h.A.norm() + h.B.norm();
    return b;
}

bool PeriodicCoefficient::constant() const {
    return std::all_of(harmonics.begin(), harmonics.end(),
                       [](const Harmonic& h) { return h.A.isZero(0.0) && h.B.isZero(0.0); });
}

FundamentalSolution integrate_fundamental(const PeriodicCoefficient& coef, int steps, const IntegrationOptions& opts) {
    coef.validate();
    if (steps < 64) throw Error(ErrorKind::InvalidInput, "at least 64 steps per period are required");
    if (opts.periods < 1) throw Error(ErrorKind::InvalidInput, "periods must be at least 1");
    FundamentalSolution fs;
    fs.coef_ = coef;
    fs.steps_ = steps;
    fs.h_ = coef.T / steps;
    if (opts.check_budget && fs.h_ * coef.norm_bound() > 2.5)
        throw Error(ErrorKind::StiffnessSuspected, "step size outside the RK4 stability region; raise steps");

    fs.samples_ = rk4(coef, steps * opts.periods, fs.h_, &fs.det_drift_);
    fs.slopes_.reserve(fs.samples_.size());
    for (std::size_t i = 0; i < fs.samples_.size(); ++i)
        fs.slopes_.push_back(coef(static_cast<double>(i) * fs.h_) * fs.samples_[i]);
    fs.monodromy_ = fs.samples_[static_cast<std::size_t>(steps)];
    fs.monodromy_inv_ = fs.monodromy_.inverse();

    const RealMatrix coarse = rk4(coef, steps / 2, 2.0 * fs.h_, nullptr).back();
    // RK4 halves its error 16-fold per step doubling.
    fs.error_estimate_ = (coarse - fs.monodromy_).norm() / 15.0;
    const double budget = opts.integ_tol * coef.T * std::max(1.0, fs.monodromy_.norm());
    if (opts.check_budget && fs.error_estimate_ > budget)
        throw Error(ErrorKind::StiffnessSuspected, "integration error estimate " + std::to_string(fs.error_estimate_) +
                                                       " exceeds budget " + std::to_string(budget));
    return fs;
}

RealMatrix FundamentalSolution::operator()(double t) const {
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidInput, "time must be finite");
    const double T = coef_.T;
    RealMatrix tail = RealMatrix::Identity(monodromy_.rows(), monodromy_.cols());
    if (t < 0.0 || t > horizon()) {
        const auto k = static_cast<std::int64_t>(std::floor(t / T));
        tail = integer_power(k >= 0 ? monodromy_ : monodromy_inv_, k >= 0 ? k : -k);
        t -= static_cast<double>(k) * T;
        t = std::clamp(t, 0.0, T);
    }
    const std::size_t last = samples_.size() - 1;
    const double pos = t / h_;
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), last - 1);
    const double u = pos - static_cast<double>(i);
    const double u2 = u * u, u3 = u2 * u;
    const RealMatrix g = (2 * u3 - 3 * u2 + 1) * samples_[i] + (u3 - 2 * u2 + u) * h_ * slopes_[i] +
                         (-2 * u3 + 3 * u2) * samples_[i + 1] + (u3 - u2) * h_ * slopes_[i + 1];
    return g * tail;
}

FloquetGenerator floquet_generator(const RealMatrix& mono, double T, const TolerancePolicy& pol) {
    if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidInput, "period must be positive and finite");
    const MultiplicativeJordan dec = multiplicative_jordan(mono, pol, Model::Special);
    const RealMatrix log_u = unipotent_log(dec.unipotent);
    const int n = static_cast<int>(mono.rows());
    for (int m = 1; m <= kMaxFloquetPower; m *= 2) {
        RealMatrix log_e;
        try {
            log_e = principal_log(integer_power(dec.elliptic, m), pol);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BranchObstruction) throw;
            continue;
        }
        FloquetGenerator out;
        out.m = m;
        out.X = (log_e + m * dec.log_hyperbolic + m * log_u) / (m * T);
        out.X -= (out.X.trace() / n) * RealMatrix::Identity(n, n);
        const RealMatrix power = integer_power(mono, m);
        out.residual = (power - matrix_exp((m * T) * out.X)).norm();
        return out;
    }
    throw Error(ErrorKind::NoRealLog, "no real logarithm for g(T)^m with m up to 64");
}

FloquetData floquet_analyze(FundamentalSolution fund, const TolerancePolicy& pol) {
    const double T = fund.coefficient().T;
    const RealMatrix mono = fund.monodromy();
    FloquetGenerator gen = floquet_generator(mono, T, pol);
    LinearFlow flow(additive_jordan(gen.X, pol, Model::Special), pol);
    return FloquetData{std::move(fund), T, gen.m, mono, gen.X, gen.residual, std::move(flow)};
}

RealMatrix periodic_factor(const FloquetData& fd, double t) {
    const double r = reduce(t, fd.period());
    return fd.fundamental(r) * matrix_exp(-r * fd.X);
}

double reconstruction_residual(const FloquetData& fd, double horizon, int samples) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = horizon * i / std::max(1, samples - 1);
        worst = std::max(worst, (fd.fundamental(t) - periodic_factor(fd, t) * matrix_exp(t * fd.X)).norm());
    }
    return worst;
}

RealMatrix skew_transport(const FloquetData& fd, double s, double t) {
    // The coefficient has period T, so only s mod T matters.
    const double r = reduce(s, fd.T);
    return fd.fundamental(r + t) * fd.fundamental(r).inverse();
}

std::pair<double, Flag> skew_step(const FloquetData& fd, double s, const Flag& x, double t) {
    auto [s1, B] = transport(fd, s, x.basis, t, [&](RealMatrix& m) { m = Flag::from_basis(x.type, m).basis; });
    return {s1, Flag::from_basis(x.type, B)};
}

std::pair<double, ProjectivePoint> skew_step(const FloquetData& fd, double s, const ProjectivePoint& x, double t) {
    auto [s1, v] = transport(fd, s, RealMatrix(x.rep), t, [](RealMatrix& m) { m /= m.norm(); });
    return {s1, ProjectivePoint(RealVector(v.col(0)))};
}

std::vector<std::pair<double, Flag>> simulate_skew(const FloquetData& fd, double s, const Flag& x,
                                                   const std::vector<double>& times) {
    std::vector<std::pair<double, Flag>> out;
    double now = 0.0;
    std::pair<double, Flag> cur{reduce(s, fd.period()), x};
    for (double t : times) {
        if (t < now) throw Error(ErrorKind::InvalidInput, "skew sample times must be nondecreasing and nonnegative");
        if (t > now) cur = skew_step(fd, cur.first, cur.second, t - now);
        now = t;
        out.push_back(cur);
    }
    return out;
}

std::vector<FlagMorseComponent> floquet_morse_components(const FloquetData& fd, const FlagType& type) {
    if (type.n != fd.flow.dimension()) throw Error(ErrorKind::InvalidInput, "flag type does not match the dimension");
    return enumerate_morse_components(fd.flow, type);
}

Flag fiber_coordinate(const FloquetData& fd, double s, const Flag& y) {
    return Flag::from_basis(y.type, periodic_factor(fd, s).inverse() * y.basis);
}

double floquet_component_distance(const FloquetData& fd, double s, const Flag& y, const FlagMorseComponent& c) {
    return component_distance(fiber_coordinate(fd, s, y), fd.flow, c);
}

bool floquet_recurrent_membership(const FloquetData& fd, double s, const Flag& y) {
    return flag_recurrent_membership(fiber_coordinate(fd, s, y), fd.flow);
}

double floquet_lyapunov(const FloquetData& fd, double s, const Flag& y) {
    return height_lyapunov(fiber_coordinate(fd, s, y), fd.flow);
}

} // namespace jflow
