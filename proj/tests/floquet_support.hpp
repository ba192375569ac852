#pragma once

#include <numbers>

#include "jordanflow/floquet.hpp"

namespace jflow::testing {

// X(t) = Ω + R(t)X₀R(t)⁻¹ with R(t) = exp(tΩ), so g(t) = R(t)exp(tX₀).
struct RotatingSystem {
    RealMatrix omega;
    RealMatrix X0;
    double T = 1.0;

    RealMatrix rotation(double t) const { return matrix_exp(t * omega); }
    RealMatrix closed_form(double t) const { return rotation(t) * matrix_exp(t * X0); }
    RealMatrix at(double t) const { return omega + rotation(t) * X0 * rotation(-t); }

    // Entries are trigonometric polynomials of degree ≤ 4 in t, so sampling
    // at 16 points recovers the coefficients exactly.
    PeriodicCoefficient coefficient() const {
        const int N = 16;
        const int n = static_cast<int>(X0.rows());
        PeriodicCoefficient c;
        c.T = T;
        c.A0 = RealMatrix::Zero(n, n);
        std::vector<RealMatrix> samples;
        for (int j = 0; j < N; ++j) samples.push_back(at(T * j / N));
        for (const auto& s : samples) c.A0 += s / N;
        for (int k = 1; k <= 4; ++k) {
            Harmonic h{k, RealMatrix::Zero(n, n), RealMatrix::Zero(n, n)};
            for (int j = 0; j < N; ++j) {
                const double th = 2.0 * std::numbers::pi * k * j / N;
                h.A += (2.0 / N) * std::cos(th) * samples[static_cast<std::size_t>(j)];
                h.B += (2.0 / N) * std::sin(th) * samples[static_cast<std::size_t>(j)];
            }
            h.A = h.A.unaryExpr([](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; });
            h.B = h.B.unaryExpr([](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; });
            c.harmonics.push_back(h);
        }
        c.A0 = c.A0.unaryExpr([](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; });
        return c;
    }
};

// Generator of rotations in the (i, j) coordinate plane at angular speed w.
inline RealMatrix plane_rotation(int n, int i, int j, double w) {
    RealMatrix m = RealMatrix::Zero(n, n);
    m(j, i) = w;
    m(i, j) = -w;
    return m;
}

} // namespace jflow::testing
