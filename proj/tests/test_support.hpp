#pragma once

#include <cmath>
#include <random>

#include "jordanflow/matrix_core.hpp"

namespace jflow::testing {

// The five sl(3) normal forms of the worked three-dimensional example.
inline RealMatrix X1(double a, double b) {
    RealMatrix m = RealMatrix::Zero(3, 3);
    m.diagonal() << -a, -b, a + b;
    return m;
}

inline RealMatrix X2() {
    RealMatrix m = RealMatrix::Zero(3, 3);
    m(0, 1) = 1.0;
    m(1, 2) = 1.0;
    return m;
}

inline RealMatrix X3() {
    RealMatrix m = RealMatrix::Zero(3, 3);
    m(0, 2) = 1.0;
    return m;
}

inline RealMatrix X4(double a, double b) {
    RealMatrix m(3, 3);
    m << -a, -b, 0, b, -a, 0, 0, 0, 2 * a;
    return m;
}

inline RealMatrix X5(double a) {
    RealMatrix m(3, 3);
    m << -a, 1, 0, 0, -a, 0, 0, 0, 2 * a;
    return m;
}

inline RealMatrix unit(int n, int i, int j) {
    RealMatrix m = RealMatrix::Zero(n, n);
    m(i, j) = 1.0;
    return m;
}

inline RealMatrix diag(std::initializer_list<double> d) {
    RealVector v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v(i++) = x;
    return v.asDiagonal();
}

inline double max_abs_diff(const RealMatrix& a, const RealMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline RealMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    RealMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
}

/// Random matrix with condition number kept moderate (identity plus noise).
inline RealMatrix random_invertible(std::mt19937_64& rng, int n, double noise = 0.5) {
    return RealMatrix::Identity(n, n) + random_matrix(rng, n, n, noise / std::sqrt(static_cast<double>(n)));
}

inline RealVector random_unit(std::mt19937_64& rng, int n) {
    RealVector v = random_matrix(rng, n, 1);
    return v / v.norm();
}

inline RealMatrix rotation(double theta) {
    RealMatrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

} // namespace jflow::testing
