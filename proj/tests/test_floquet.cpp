#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flag_support.hpp"
#include "floquet_support.hpp"
#include "jordanflow/floquet.hpp"

using namespace jflow;
using namespace jflow::testing;

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicCoefficient constant_coefficient(const RealMatrix& X, double T = 1.0) {
    PeriodicCoefficient c;
    c.T = T;
    c.A0 = X;
    return c;
}

RotatingSystem spinning_x4() { return {plane_rotation(3, 1, 2, 2 * kPi), X4(1, 2), 1.0}; }

RealMatrix rotation_by_pi_plus_one() {
    RealMatrix m = RealMatrix::Identity(3, 3);
    m(0, 0) = m(1, 1) = -1.0;
    return m;
}

} // namespace

TEST_CASE("periodic coefficient validation") {
    auto c = constant_coefficient(X1(1, 2));
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.T = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.A0(0, 0) += 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.harmonics = {{1, X2(), X3()}, {1, X2(), X3()}};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.harmonics = {{17, X2(), X3()}};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.harmonics = {{2, RealMatrix::Identity(3, 3), X3()}};
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(integrate_fundamental(c, 32), Error);
}

TEST_CASE("fundamental solution examples") {
    SUBCASE("constant coefficient") {
        std::mt19937_64 rng(7);
        for (int k = 0; k < 5; ++k) {
            RealMatrix X = random_matrix(rng, 3, 3);
            X -= (X.trace() / 3.0) * RealMatrix::Identity(3, 3);
            X *= 2.0 / X.norm();
            const auto fs = integrate_fundamental(constant_coefficient(X), 1024);
            CHECK(max_abs_diff(fs.monodromy(), matrix_exp(X)) < 1e-8);
        }
    }
    SUBCASE("scalar modulation") {
        // c(t) = 0.3 + cos(2πt) + 0.5 sin(4πt), ∫₀ᵗ c = 0.3t + sin(2πt)/2π + (1 − cos 4πt)/8π.
        const RealMatrix X0 = X5(0.7);
        PeriodicCoefficient c = constant_coefficient(0.3 * X0);
        c.harmonics = {{1, X0, RealMatrix::Zero(3, 3)}, {2, RealMatrix::Zero(3, 3), 0.5 * X0}};
        const auto fs = integrate_fundamental(c, 2048);
        CHECK(max_abs_diff(fs.monodromy(), matrix_exp(0.3 * X0)) < 1e-8);
        for (double t : {0.1, 0.37, 0.5, 0.81}) {
            const double C = 0.3 * t + std::sin(2 * kPi * t) / (2 * kPi) + (1 - std::cos(4 * kPi * t)) / (8 * kPi);
            CHECK(max_abs_diff(fs(t), matrix_exp(C * X0)) < 1e-8);
        }
    }
    SUBCASE("cocycle over two periods") {
        const auto fs = integrate_fundamental(spinning_x4().coefficient(), 4096, {2});
        const auto& g = fs.samples();
        double worst = 0.0;
        for (int i = 0; i <= 4096; i += 16)
            worst = std::max(worst, (g[static_cast<std::size_t>(i + 4096)] - g[static_cast<std::size_t>(i)] * fs.monodromy()).norm());
        CHECK(worst < 1e-6);
        CHECK(fs.det_drift() < 1e-10);
        CHECK(max_abs_diff(fs(0.0), RealMatrix::Identity(3, 3)) == 0.0);
    }
}

TEST_CASE("RK4 convergence order") {
    const auto coef = spinning_x4().coefficient();
    IntegrationOptions loose;
    loose.check_budget = false;
    double prev = -1.0;
    RealMatrix last = integrate_fundamental(coef, 64, loose).monodromy();
    for (int steps = 128; steps <= 512; steps *= 2) {
        const RealMatrix g = integrate_fundamental(coef, steps, loose).monodromy();
        const double diff = (g - last).norm();
        if (prev > 0) CHECK(prev / diff >= 8.0);
        prev = diff;
        last = g;
    }
}

TEST_CASE("stiffness is reported") {
    PeriodicCoefficient c = constant_coefficient(X1(100, 200));
    CHECK_THROWS_WITH_AS(integrate_fundamental(c, 64), doctest::Contains("StiffnessSuspected"), Error);
}

TEST_CASE("floquet generator examples") {
    SUBCASE("exp-log round trip") {
        const auto gen = floquet_generator(matrix_exp(X1(1, 2)), 1.0);
        CHECK(gen.m == 1);
        CHECK(max_abs_diff(gen.X, X1(1, 2)) < 1e-10);
    }
    SUBCASE("rotation by pi doubles m") {
        const RealMatrix mono = rotation_by_pi_plus_one();
        const auto gen = floquet_generator(mono, 1.0);
        CHECK(gen.m == 2);
        CHECK(gen.X.allFinite());
        const auto dec = additive_jordan(gen.X);
        CHECK(dec.hyperbolic.norm() < 1e-10);
        CHECK(dec.nilpotent.norm() < 1e-10);
        CHECK(max_abs_diff(matrix_exp(2.0 * gen.X), mono * mono) < 1e-10);
    }
    SUBCASE("identity") {
        const auto gen = floquet_generator(RealMatrix::Identity(3, 3), 2.0);
        CHECK(gen.m == 1);
        CHECK(gen.X.norm() < 1e-12);
    }
    SUBCASE("negative real eigenvalues with a Jordan block") {
        RealMatrix g(3, 3);
        g << -2, 1, 0, 0, -2, 0, 0, 0, 0.25;
        const auto gen = floquet_generator(g, 0.5);
        CHECK(gen.m == 2);
        CHECK(gen.residual < 1e-9 * (g * g).norm());
    }
    SUBCASE("invariant on random monodromies") {
        std::mt19937_64 rng(21);
        for (int k = 0; k < 30; ++k) {
            RealMatrix g = random_invertible(rng, 3);
            if (g.determinant() < 0) g.col(0) *= -1.0;
            g /= std::cbrt(g.determinant());
            const auto gen = floquet_generator(g, 1.5);
            const RealMatrix gm = integer_power(g, gen.m);
            CHECK(gen.m <= 2);
            CHECK((gm - matrix_exp(gen.m * 1.5 * gen.X)).norm() <= 1e-8 * std::max(1.0, gm.norm()));
            CHECK(std::abs(gen.X.trace()) < 1e-12);
        }
    }
    SUBCASE("non-unimodular input") { CHECK_THROWS_AS(floquet_generator(2.0 * RealMatrix::Identity(3, 3), 1.0), Error); }
}

TEST_CASE("periodic factor") {
    SUBCASE("constant coefficients give the identity") {
        const auto fd = floquet_analyze(integrate_fundamental(constant_coefficient(X4(0.5, 1.0)), 1024));
        CHECK(fd.m == 1);
        for (int i = 0; i <= 40; ++i)
            CHECK(max_abs_diff(periodic_factor(fd, 0.1 * i), RealMatrix::Identity(3, 3)) < 1e-7);
    }
    SUBCASE("rotating system") {
        const auto sys = spinning_x4();
        const auto fd = floquet_analyze(integrate_fundamental(sys.coefficient(), 4096));
        CHECK(fd.m == 1);
        CHECK(max_abs_diff(fd.X, sys.X0) < 1e-7);
        CHECK(max_abs_diff(periodic_factor(fd, 0.0), RealMatrix::Identity(3, 3)) < 1e-12);
        double worst = 0.0, period_gap = 0.0, jump = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double t = 3.0 * fd.period() * i / 63.0;
            const RealMatrix a = periodic_factor(fd, t);
            worst = std::max(worst, (sys.closed_form(t) - a * matrix_exp(t * fd.X)).norm());
            period_gap = std::max(period_gap, (periodic_factor(fd, t + fd.period()) - a).norm());
            jump = std::max(jump, (periodic_factor(fd, t + 1e-4) - a).norm());
        }
        CHECK(worst < 1e-6);
        CHECK(period_gap < 1e-6);
        CHECK(jump < 1e-2);
        CHECK(reconstruction_residual(fd, 3.0 * fd.period()) < 1e-6);
    }
    SUBCASE("half-turn system needs m = 2") {
        // Half a turn per period; X₀ is block diagonal for the 1-2 plane so
        // X(t) still has period T.
        RealMatrix X0(3, 3);
        X0 << 0.2, 0.5, 0, 0.1, -0.5, 0, 0, 0, 0.3;
        const RotatingSystem sys{plane_rotation(3, 0, 1, kPi), X0, 1.0};
        REQUIRE_FALSE(sys.coefficient().constant());
        const auto fd = floquet_analyze(integrate_fundamental(sys.coefficient(), 1024));
        CHECK(fd.m == 2);
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double t = 3.0 * fd.period() * i / 63.0;
            worst = std::max(worst, (sys.closed_form(t) - periodic_factor(fd, t) * matrix_exp(t * fd.X)).norm());
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("skew product flow") {
    const auto fd = floquet_analyze(integrate_fundamental(spinning_x4().coefficient(), 4096));
    std::mt19937_64 rng(33);
    const FlagType type = FlagType::full(3);
    for (int k = 0; k < 5; ++k) {
        const Flag x = random_flag(rng, type);
        const double s = 0.19 * k;
        const auto same = skew_step(fd, s, x, 0.0);
        CHECK(same.first == doctest::Approx(s));
        CHECK(flag_distance(same.second, x) < 1e-12);

        const auto ab = skew_step(fd, s, x, 0.9);
        const auto a_then_b = skew_step(fd, ab.first, ab.second, 0.45);
        const auto whole = skew_step(fd, s, x, 1.35);
        CHECK(a_then_b.first == doctest::Approx(whole.first));
        CHECK(flag_distance(a_then_b.second, whole.second) < 1e-7);

        const auto loop = skew_step(fd, 0.0, x, fd.period());
        const Flag direct = Flag::from_basis(type, integer_power(fd.monodromy, fd.m) * x.basis);
        CHECK(loop.first == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(flag_distance(loop.second, direct) < 1e-7);
    }
    const ProjectivePoint p(RealVector::Ones(3));
    const auto q = skew_step(fd, 0.2, p, 0.5);
    CHECK(projective_distance(q.second, ProjectivePoint(RealVector(skew_transport(fd, 0.2, 0.5) * p.rep))) < 1e-12);

    SUBCASE("constant coefficients reduce to the autonomous flow") {
        const auto flow = LinearFlow::continuous(X4(1, 2));
        const auto cfd = floquet_analyze(integrate_fundamental(constant_coefficient(X4(1, 2)), 1024));
        const Flag x = random_flag(rng, type);
        const auto y = skew_step(cfd, 0.25, x, 0.6);
        CHECK(y.first == doctest::Approx(0.85));
        CHECK(flag_distance(y.second, simulate_flag(flow, x, {0.6}).back()) < 1e-8);
    }
}

TEST_CASE("floquet Morse components") {
    const auto sys = spinning_x4();
    const auto fd = floquet_analyze(integrate_fundamental(sys.coefficient(), 4096));
    const auto autonomous = LinearFlow::continuous(sys.X0);
    for (const auto& type : {FlagType(3, {1}), FlagType(3, {2}), FlagType::full(3)}) {
        const auto comps = floquet_morse_components(fd, type);
        const auto base = enumerate_morse_components(autonomous, type);
        REQUIRE(comps.size() == base.size());
        for (std::size_t i = 0; i < comps.size(); ++i) CHECK(comps[i].cells == base[i].cells);

        std::mt19937_64 rng(8);
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const Flag x = component_flag(fd.flow, type, comps[c]);
            for (double s : {0.0, 0.3, 0.77}) {
                const Flag y = Flag::from_basis(type, periodic_factor(fd, s) * x.basis);
                CHECK(floquet_component_distance(fd, s, y, comps[c]) < 1e-9);
                CHECK(floquet_recurrent_membership(fd, s, y));
            }
        }
        // Stable-set transport: generic points approach the attractor copy.
        for (int k = 0; k < 5; ++k) {
            const Flag x = random_flag(rng, type);
            const double s = 0.21 * k;
            const Flag y = Flag::from_basis(type, periodic_factor(fd, s) * x.basis);
            const auto end = skew_step(fd, s, y, 12.0);
            CHECK(floquet_component_distance(fd, end.first, end.second, comps.front()) < 1e-6);
            CHECK_FALSE(floquet_recurrent_membership(fd, s, y));
        }
    }
    SUBCASE("constant coefficients") {
        const auto cfd = floquet_analyze(integrate_fundamental(constant_coefficient(X5(1)), 1024));
        const auto comps = floquet_morse_components(cfd, FlagType::full(3));
        const auto base = enumerate_morse_components(LinearFlow::continuous(X5(1)), FlagType::full(3));
        REQUIRE(comps.size() == base.size());
        for (std::size_t i = 0; i < comps.size(); ++i) CHECK(comps[i].cells == base[i].cells);
    }
}

TEST_CASE("skew recurrence returns near the start") {
    // Elliptic rotation by 2π/3 per period: fixed points of the rate spaces
    // come back after three periods.
    const RotatingSystem sys{plane_rotation(3, 1, 2, 2 * kPi), X4(0.4, 2 * kPi / 3), 1.0};
    const auto fd = floquet_analyze(integrate_fundamental(sys.coefficient(), 4096));
    const FlagType type(3, {1});
    const auto comps = floquet_morse_components(fd, type);
    const Flag x = Flag::from_basis(type, (RealMatrix(3, 1) << 0.6, 0.8, 0.0).finished());
    REQUIRE(floquet_recurrent_membership(fd, 0.0, x));
    const double s = 0.4;
    const Flag y = Flag::from_basis(type, periodic_factor(fd, s) * x.basis);
    double best = 1.0;
    for (int k = 1; k <= 6; ++k) {
        const auto back = skew_step(fd, s, y, k * fd.period());
        CHECK(back.first == doctest::Approx(s));
        best = std::min(best, flag_distance(back.second, y));
    }
    CHECK(best < 1e-6);
}

TEST_CASE("floquet Lyapunov function") {
    const auto fd = floquet_analyze(integrate_fundamental(spinning_x4().coefficient(), 4096));
    REQUIRE(fd.flow.conformal());
    const FlagType type = FlagType::full(3);
    const auto comps = floquet_morse_components(fd, type);
    std::mt19937_64 rng(90);
    for (int k = 0; k < 10; ++k) {
        const Flag x = random_flag(rng, type);
        CHECK(floquet_lyapunov(fd, 0.0, x) == doctest::Approx(height_lyapunov(x, fd.flow)).epsilon(1e-10));
        double s = 0.13 * k;
        Flag y = Flag::from_basis(type, periodic_factor(fd, s) * x.basis);
        double prev = floquet_lyapunov(fd, s, y);
        for (int i = 0; i < 20; ++i) {
            std::tie(s, y) = skew_step(fd, s, y, 0.25);
            const double now = floquet_lyapunov(fd, s, y);
            CHECK(now <= prev + 1e-9);
            prev = now;
        }
    }
    for (const auto& c : comps) {
        const Flag x = component_flag(fd.flow, type, c);
        const double f0 = floquet_lyapunov(fd, 0.0, x);
        double s = 0.0;
        Flag y = x;
        for (int i = 0; i < 8; ++i) {
            std::tie(s, y) = skew_step(fd, s, y, 0.3);
            CHECK(floquet_lyapunov(fd, s, y) == doctest::Approx(f0).epsilon(1e-8));
        }
    }
}
